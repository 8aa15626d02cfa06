#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <tsop/automaton.hpp>
#include <tsop/object_spec.hpp>
#include <tsop/runtime.hpp>
#include <tsop/value.hpp>

// Scripted interleavings. The default runner is single-threaded and fully
// deterministic: a call that cannot fire is parked, and after every event
// fireable reactions run exhaustively, waking parked calls in arrival order
// with declaration-order reaction priority. The threaded runner replays the
// same script with real threads and checks only terminal expectations.

namespace tsop {

struct SimEvent {
  enum class Kind { kSend, kCall, kExpectReturns, kExpectViolation, kExpectPending, kExpectCounters };
  Kind kind;
  int line = 0;
  std::string tag;   // kSend, kCall
  Payload args;      // kSend, kCall
  std::string id;    // kCall, kExpectReturns, kExpectPending
  Value expected;    // kExpectReturns
  std::vector<std::pair<std::string, CounterVal>> counters;  // kExpectCounters
};

struct SimScript {
  std::vector<SimEvent> events;
};

inline SimScript parse_script(std::string_view text) {
  using detail::LineTokens;
  SimScript script;
  std::set<std::string> call_ids;
  for (const detail::SpecLine& line : detail::split_spec_lines(text)) {
    LineTokens t(line.text, line.number);
    SimEvent event;
    event.line = line.number;
    std::string keyword = t.expect_ident("a script keyword");
    auto parse_args = [&](LineTokens& tt) {
      tt.expect_punct("(", "to open arguments");
      if (tt.try_punct(")")) return;
      do {
        event.args.push_back(tt.expect_literal("a literal argument"));
      } while (tt.try_punct(","));
      tt.expect_punct(")", "to close arguments");
    };
    if (keyword == "send") {
      event.kind = SimEvent::Kind::kSend;
      event.tag = t.expect_ident("a state tag");
      parse_args(t);
      t.expect_end();
    } else if (keyword == "call") {
      event.kind = SimEvent::Kind::kCall;
      event.id = t.expect_ident("a call id");
      if (!call_ids.insert(event.id).second) t.fail("duplicate call id '" + event.id + "'");
      t.expect_punct("=", "after the call id");
      event.tag = t.expect_ident("an operation tag");
      parse_args(t);
      t.expect_end();
    } else if (keyword == "expect") {
      if (t.try_punct("violation")) {
        event.kind = SimEvent::Kind::kExpectViolation;
        t.expect_end();
      } else if (t.try_punct("pending")) {
        event.kind = SimEvent::Kind::kExpectPending;
        event.id = t.expect_ident("a call id");
        if (!call_ids.count(event.id)) t.fail("'" + event.id + "' does not name a prior call");
        t.expect_end();
      } else if (t.try_punct("counters")) {
        event.kind = SimEvent::Kind::kExpectCounters;
        t.expect_punct("{", "to open the counter map");
        if (!t.try_punct("}")) {
          do {
            std::string tag = t.expect_ident("a tag");
            t.expect_punct(":", "after the tag");
            CounterVal value = t.try_punct("$") ? CounterVal::dollar()
                                                : CounterVal(static_cast<int>(
                                                      t.expect_literal("a count").as_int()));
            event.counters.emplace_back(tag, value);
          } while (t.try_punct(","));
          t.expect_punct("}", "to close the counter map");
        }
        t.expect_end();
      } else {
        event.kind = SimEvent::Kind::kExpectReturns;
        event.id = t.expect_ident("a call id");
        if (!call_ids.count(event.id)) t.fail("'" + event.id + "' does not name a prior call");
        std::string word = t.expect_ident("'returns'");
        if (word != "returns") t.fail("expected 'returns', got '" + word + "'");
        event.expected = t.expect_literal("a literal value");
        t.expect_end();
      }
    } else {
      t.fail("unknown script keyword '" + keyword + "'");
    }
    script.events.push_back(std::move(event));
  }
  return script;
}

struct SimOutcome {
  bool passed = true;
  std::string failure;  // message for the first mismatch
  std::string trace;
};

namespace detail {

// Single-threaded deterministic instance: parked calls replace blocking.
class SimInstance {
 public:
  SimInstance(const ObjectSpec& spec, const MatchingAutomaton& a, std::string& trace)
      : spec_(spec), a_(a), trace_(trace) {
    for (int t = 0; t < a.tag_count(); ++t) {
      bool is_operation = spec.kind(t) == MessageKind::kOperation;
      queues_.push_back(make_queue_repr(a.tags[static_cast<std::size_t>(t)].bound,
                                        is_operation ? 0 : spec.arity(t)));
    }
    for (const ConstructorSend& send : spec.constructor_sends) {
      enqueue(send.tag, send.args);
      if (!receive(send.tag)) break;
    }
  }

  void send(int tag, Payload args) {
    enqueue(tag, std::move(args));
    if (!receive(tag)) return;
    settle();
  }

  void call(const std::string& id, int tag, Payload args) {
    if (auto* cq = std::get_if<CountQueue>(&queues_[static_cast<std::size_t>(tag)])) ++cq->count;
    if (!receive(tag)) {
      violated_calls_.insert(id);
      return;
    }
    parked_.push_back({id, tag, std::move(args)});
    settle();
  }

  bool is_pending(const std::string& id) const {
    for (const ParkedCall& c : parked_)
      if (c.id == id) return true;
    return false;
  }

  const Value* result_of(const std::string& id) const {
    auto it = returned_.find(id);
    return it == returned_.end() ? nullptr : &it->second;
  }

  bool call_violated(const std::string& id) const { return violated_calls_.count(id) > 0; }

  const CounterTuple& counters() const {
    return a_.states[static_cast<std::size_t>(state_)].counters;
  }

  std::optional<std::string> take_violation() {
    auto v = std::move(pending_violation_);
    pending_violation_ = std::nullopt;
    return v;
  }

  bool has_violation() const { return pending_violation_.has_value(); }

 private:
  struct ParkedCall {
    std::string id;
    int tag;
    Payload args;
  };

  void enqueue(int tag, Payload args) {
    QueueRepr& q = queues_[static_cast<std::size_t>(tag)];
    if (auto* cq = std::get_if<CountQueue>(&q))
      ++cq->count;
    else if (auto* sq = std::get_if<SlotQueue>(&q))
      sq->payload = std::move(args);
    else if (auto* fq = std::get_if<FifoQueue>(&q))
      fq->items.push_back(std::move(args));
  }

  // Follows the receive transition; records a violation and returns false
  // when there is none.
  bool receive(int tag) {
    int next = a_.receive_target(state_, tag);
    if (next < 0) {
      pending_violation_ = "message '" + spec_.signature.name(tag) + "' in state #" +
                           std::to_string(state_) + " " + tuple_description(counters(), spec_.signature);
      trace_ += "violation: " + spec_.signature.name(tag) + " in state#" + std::to_string(state_) + "\n";
      return false;
    }
    trace_ += "state#" + std::to_string(state_) + " --" + spec_.signature.name(tag) + "--> state#" +
              std::to_string(next) + "\n";
    state_ = next;
    return true;
  }

  int occupancy(int tag) const {
    const QueueRepr& q = queues_[static_cast<std::size_t>(tag)];
    if (const auto* cq = std::get_if<CountQueue>(&q)) return cq->count;
    if (const auto* sq = std::get_if<SlotQueue>(&q)) return sq->payload ? 1 : 0;
    if (const auto* fq = std::get_if<FifoQueue>(&q)) return static_cast<int>(fq->items.size());
    return a_.states[static_cast<std::size_t>(state_)].counters[static_cast<std::size_t>(tag)].exact();
  }

  // Exhaustive firing: parked calls in arrival order, declaration-order
  // reaction priority; restart after every fire. Stops on a violation.
  void settle() {
    bool fired = true;
    while (fired && !pending_violation_) {
      fired = false;
      for (std::size_t i = 0; i < parked_.size(); ++i) {
        int reaction = -1;
        for (int r : a_.fireable(state_)) {
          const Reaction& candidate = spec_.reactions[static_cast<std::size_t>(r)];
          for (const PatternItem& item : candidate.pattern)
            if (item.tag == parked_[i].tag) {
              reaction = r;
              break;
            }
          if (reaction >= 0) break;
        }
        if (reaction < 0) continue;
        fire(i, reaction);
        fired = true;
        break;
      }
    }
  }

  void fire(std::size_t parked_index, int reaction) {
    ParkedCall call = std::move(parked_[parked_index]);
    parked_.erase(parked_.begin() + static_cast<std::ptrdiff_t>(parked_index));
    const Reaction& r = spec_.reactions[static_cast<std::size_t>(reaction)];
    trace_ += "fire reaction#" + std::to_string(reaction) + "\n";

    Payload payloads;
    for (const PatternItem& item : r.pattern) {
      if (item.tag == call.tag) {
        if (auto* cq = std::get_if<CountQueue>(&queues_[static_cast<std::size_t>(item.tag)]))
          --cq->count;
        payloads.insert(payloads.end(), call.args.begin(), call.args.end());
        continue;
      }
      QueueRepr& q = queues_[static_cast<std::size_t>(item.tag)];
      if (auto* cq = std::get_if<CountQueue>(&q)) {
        --cq->count;
      } else if (auto* sq = std::get_if<SlotQueue>(&q)) {
        Payload p = std::move(*sq->payload);
        sq->payload.reset();
        payloads.insert(payloads.end(), p.begin(), p.end());
      } else if (auto* fq = std::get_if<FifoQueue>(&q)) {
        Payload p = std::move(fq->items.front());
        fq->items.pop_front();
        payloads.insert(payloads.end(), p.begin(), p.end());
      }
    }
    std::vector<std::pair<int, bool>> emptied;
    for (const PatternItem& item : r.pattern)
      if (a_.tags[static_cast<std::size_t>(item.tag)].bound.is_unbounded())
        emptied.emplace_back(item.tag, occupancy(item.tag) == 0);
    std::sort(emptied.begin(), emptied.end());
    const ConsumeTransition& c = a_.consume_for(state_, reaction, emptied);
    state_ = c.to;

    // Body actions run after the consume, exactly like the concurrent
    // runtime runs them after releasing the guard.
    std::map<std::string, Value> env;
    std::size_t next = 0;
    for (const PatternItem& item : r.pattern)
      for (const std::string& binding : item.bindings) env[binding] = payloads.at(next++);
    for (const Action& action : r.body) {
      Payload args;
      for (const std::string& name : action.args) args.push_back(env.at(name));
      if (spec_.kind(action.tag) == MessageKind::kState) {
        enqueue(action.tag, std::move(args));
        if (!receive(action.tag)) {
          violated_calls_.insert(call.id);
          return;
        }
      } else {
        // An operation self-send becomes a nested parked call with a
        // synthetic id; its result is discarded.
        std::string nested = call.id + "." + spec_.signature.name(action.tag);
        call_nested(nested, action.tag, std::move(args));
        if (pending_violation_) {
          violated_calls_.insert(call.id);
          return;
        }
      }
    }
    returned_[call.id] = r.return_binding ? env.at(*r.return_binding) : Value::unit();
  }

  void call_nested(const std::string& id, int tag, Payload args) {
    if (auto* cq = std::get_if<CountQueue>(&queues_[static_cast<std::size_t>(tag)])) ++cq->count;
    if (!receive(tag)) {
      violated_calls_.insert(id);
      return;
    }
    parked_.push_back({id, tag, std::move(args)});
  }

  const ObjectSpec& spec_;
  const MatchingAutomaton& a_;
  std::string& trace_;
  int state_ = 0;
  std::vector<QueueRepr> queues_;
  std::vector<ParkedCall> parked_;
  std::map<std::string, Value> returned_;
  std::set<std::string> violated_calls_;
  std::optional<std::string> pending_violation_;
};

}  // namespace detail

inline SimOutcome run_script(const ObjectSpec& spec, const MatchingAutomaton& a,
                             const SimScript& script) {
  SimOutcome outcome;
  detail::SimInstance instance(spec, a, outcome.trace);

  auto fail = [&](int line, const std::string& message) {
    outcome.passed = false;
    outcome.failure = "line " + std::to_string(line) + ": " + message;
  };

  for (const SimEvent& event : script.events) {
    if (instance.has_violation() && event.kind != SimEvent::Kind::kExpectViolation) {
      fail(event.line, "unexpected protocol violation: " + *instance.take_violation());
      return outcome;
    }
    switch (event.kind) {
      case SimEvent::Kind::kSend: {
        int tag = spec.signature.index_of(event.tag);
        if (tag < 0 || spec.kind(tag) != MessageKind::kState) {
          fail(event.line, "'" + event.tag + "' is not a state tag");
          return outcome;
        }
        if (static_cast<int>(event.args.size()) != spec.arity(tag)) {
          fail(event.line, "arity mismatch for '" + event.tag + "'");
          return outcome;
        }
        instance.send(tag, event.args);
        break;
      }
      case SimEvent::Kind::kCall: {
        int tag = spec.signature.index_of(event.tag);
        if (tag < 0 || spec.kind(tag) != MessageKind::kOperation) {
          fail(event.line, "'" + event.tag + "' is not an operation tag");
          return outcome;
        }
        if (static_cast<int>(event.args.size()) != spec.arity(tag)) {
          fail(event.line, "arity mismatch for '" + event.tag + "'");
          return outcome;
        }
        instance.call(event.id, tag, event.args);
        break;
      }
      case SimEvent::Kind::kExpectViolation:
        if (!instance.has_violation()) {
          fail(event.line, "expected a protocol violation, none occurred");
          return outcome;
        }
        instance.take_violation();
        break;
      case SimEvent::Kind::kExpectReturns: {
        if (instance.call_violated(event.id)) {
          fail(event.line, "call '" + event.id + "' raised a protocol violation");
          return outcome;
        }
        if (instance.is_pending(event.id)) {
          fail(event.line, "call '" + event.id + "' is still pending");
          return outcome;
        }
        const Value* result = instance.result_of(event.id);
        if (!result) {
          fail(event.line, "call '" + event.id + "' has no result");
          return outcome;
        }
        if (!(*result == event.expected)) {
          fail(event.line, "call '" + event.id + "' returned " + result->to_string() +
                               ", expected " + event.expected.to_string());
          return outcome;
        }
        break;
      }
      case SimEvent::Kind::kExpectPending:
        if (!instance.is_pending(event.id)) {
          fail(event.line, "call '" + event.id + "' is not pending");
          return outcome;
        }
        break;
      case SimEvent::Kind::kExpectCounters: {
        const CounterTuple& counters = instance.counters();
        std::vector<bool> listed(counters.size(), false);
        for (const auto& [name, expected] : event.counters) {
          int tag = spec.signature.index_of(name);
          if (tag < 0) {
            fail(event.line, "unknown tag '" + name + "'");
            return outcome;
          }
          listed[static_cast<std::size_t>(tag)] = true;
          if (counters[static_cast<std::size_t>(tag)] != expected) {
            fail(event.line, "counter of '" + name + "' is " +
                                 counters[static_cast<std::size_t>(tag)].to_string() + ", expected " +
                                 expected.to_string());
            return outcome;
          }
        }
        for (std::size_t t = 0; t < counters.size(); ++t) {
          if (!listed[t] && counters[t].at_least_one()) {
            fail(event.line, "counter of '" + spec.signature.name(static_cast<int>(t)) +
                                 "' is " + counters[t].to_string() + ", expected 0");
            return outcome;
          }
        }
        break;
      }
    }
  }
  if (instance.has_violation()) {
    fail(script.events.empty() ? 0 : script.events.back().line,
         "unhandled protocol violation: " + *instance.take_violation());
  }
  return outcome;
}

// Stress mode: every call event runs on its own thread; only terminal
// expectations are checked (returns, per-script violation count, final
// counters; `expect pending` holds when the call has not completed by the
// join deadline). Repeats the script `rounds` times on fresh instances.
inline SimOutcome run_script_threads(std::shared_ptr<const ObjectSpec> spec,
                                     std::shared_ptr<const MatchingAutomaton> a,
                                     const SimScript& script, int rounds) {
  struct CallResult {
    std::optional<Value> value;
    bool violated = false;
    bool done = false;
  };
  // Shared with (possibly abandoned) call threads, so it must outlive the
  // round: a call that never fires parks forever by design.
  struct Round {
    Round(std::shared_ptr<const ObjectSpec> s, std::shared_ptr<const MatchingAutomaton> a)
        : instance(std::move(s), std::move(a)) {}
    ObjectInstance instance;
    std::mutex mutex;
    std::map<std::string, CallResult> results;
    int violations = 0;
  };

  SimOutcome outcome;
  for (int round = 0; round < rounds && outcome.passed; ++round) {
    auto shared = std::make_shared<Round>(spec, a);
    std::vector<std::thread> threads;

    for (const SimEvent& event : script.events) {
      if (event.kind == SimEvent::Kind::kSend) {
        try {
          shared->instance.send_state(event.tag, event.args);
        } catch (const ProtocolViolation&) {
          std::lock_guard<std::mutex> lock(shared->mutex);
          ++shared->violations;
        }
      } else if (event.kind == SimEvent::Kind::kCall) {
        {
          std::lock_guard<std::mutex> lock(shared->mutex);
          shared->results[event.id];
        }
        threads.emplace_back([shared, event] {
          CallResult r;
          try {
            r.value = shared->instance.invoke_operation(event.tag, event.args);
          } catch (const ProtocolViolation&) {
            r.violated = true;
          }
          r.done = true;
          std::lock_guard<std::mutex> lock(shared->mutex);
          if (r.violated) ++shared->violations;
          shared->results[event.id] = std::move(r);
        });
        std::this_thread::sleep_for(std::chrono::microseconds(200));
      }
    }

    // Give every call a chance to complete; a call that has not completed
    // by the deadline counts as pending.
    auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
    bool all_done = false;
    while (!all_done && std::chrono::steady_clock::now() < deadline) {
      {
        std::lock_guard<std::mutex> lock(shared->mutex);
        all_done = true;
        for (const auto& [id, r] : shared->results) all_done &= r.done;
      }
      if (!all_done) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }

    auto fail = [&](int line, const std::string& message) {
      outcome.passed = false;
      outcome.failure = "round " + std::to_string(round + 1) + ", line " + std::to_string(line) +
                        ": " + message;
    };
    int expected_violations = 0;
    {
      std::lock_guard<std::mutex> lock(shared->mutex);
      for (const SimEvent& event : script.events) {
        if (!outcome.passed) break;
        switch (event.kind) {
          case SimEvent::Kind::kExpectReturns: {
            const CallResult& r = shared->results[event.id];
            if (!r.done || !r.value || !(*r.value == event.expected))
              fail(event.line, "call '" + event.id + "' did not return " + event.expected.to_string());
            break;
          }
          case SimEvent::Kind::kExpectViolation:
            ++expected_violations;
            break;
          case SimEvent::Kind::kExpectPending:
            if (shared->results[event.id].done)
              fail(event.line, "call '" + event.id + "' completed but was expected to stay pending");
            break;
          case SimEvent::Kind::kExpectCounters: {
            Snapshot s = shared->instance.snapshot();
            for (const auto& [name, expected] : event.counters) {
              int tag = spec->signature.index_of(name);
              if (tag < 0 || s.counters[static_cast<std::size_t>(tag)] != expected) {
                fail(event.line, "final counter mismatch for '" + name + "'");
                break;
              }
            }
            break;
          }
          default:
            break;
        }
      }
      if (outcome.passed && shared->violations != expected_violations)
        fail(script.events.empty() ? 0 : script.events.back().line,
             "observed " + std::to_string(shared->violations) + " violations, expected " +
                 std::to_string(expected_violations));
    }

    if (all_done) {
      for (std::thread& t : threads) t.join();
      outcome.trace += "round " + std::to_string(round + 1) + ": ok\n";
    } else {
      for (std::thread& t : threads) t.detach();
      outcome.trace += "round " + std::to_string(round + 1) + ": pending calls abandoned\n";
      break;  // the shared state stays alive through the detached threads
    }
  }
  return outcome;
}

}  // namespace tsop
