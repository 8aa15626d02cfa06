#pragma once

#include <stdexcept>
#include <string>
#include <utility>

// Raised when a message arrives in a state with no receive transition for
// its tag. Shared by the interpreting runtime and by generated code.

namespace tsop {

class ProtocolViolation : public std::runtime_error {
 public:
  ProtocolViolation(std::string object, std::string tag, std::string state_counters)
      : std::runtime_error("protocol violation on " + object + ": message '" + tag +
                           "' is illegal in state " + state_counters),
        object_(std::move(object)),
        tag_(std::move(tag)),
        state_counters_(std::move(state_counters)) {}

  const std::string& object_name() const { return object_; }
  const std::string& tag() const { return tag_; }
  const std::string& state_counters() const { return state_counters_; }

 private:
  std::string object_;
  std::string tag_;
  std::string state_counters_;
};

}  // namespace tsop
