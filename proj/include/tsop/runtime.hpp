#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <tsop/automaton.hpp>
#include <tsop/object_spec.hpp>
#include <tsop/value.hpp>
#include <tsop/violation.hpp>

// The concurrent runtime: a live object instance that interprets a matching
// automaton. Any thread may send state messages or invoke operations;
// operations block until a reaction consuming them fires. Reaction bodies
// always run outside the guard, so bodies may re-enter the instance.

namespace tsop {

using Payload = std::vector<Value>;

// Message storage per tag, chosen by (bound, payload arity):
//   - bounded tags without payload need no queue (the state counter is exact);
//   - unbounded tags without payload need only an exact count;
//   - 1-bounded tags with payload hold at most one payload (a slot);
//   - everything else is a real FIFO queue.
// Operation arguments never enter a queue: the invoking thread keeps them in
// its frame and passes them to the reaction it fires itself, so operation
// tags store counts only (this is also why generated classes have no fields
// for bounded operations).
struct NoQueue {};
struct CountQueue { int count = 0; };
struct SlotQueue { std::optional<Payload> payload; };
struct FifoQueue { std::deque<Payload> items; };
using QueueRepr = std::variant<NoQueue, CountQueue, SlotQueue, FifoQueue>;

inline QueueRepr make_queue_repr(const Bound& bound, int payload_arity) {
  if (payload_arity == 0) {
    if (bound.is_unbounded()) return CountQueue{};
    return NoQueue{};
  }
  if (!bound.is_unbounded() && bound.max_count() <= 1) return SlotQueue{};
  return FifoQueue{};
}

struct Snapshot {
  int state = 0;
  CounterTuple counters;
  std::vector<int> queue_occupancy;  // per tag; exact message counts
};

class ObjectInstance;

// Host-provided reaction body: receives the consumed payloads flattened in
// pattern order plus the instance for re-entrant sends, returns the
// operation's result.
using HostHandler = std::function<Value(ObjectInstance&, const Payload&)>;
using ReactionHandlers = std::map<int, HostHandler>;

// A step taken inside the guard; exposed to observers for trace checking.
struct Step {
  enum class Kind { kReceive, kConsume };
  Kind kind;
  int from;
  int label;  // tag for receives, reaction index for consumes
  int to;
};

class ObjectInstance {
 public:
  ObjectInstance(std::shared_ptr<const ObjectSpec> spec,
                 std::shared_ptr<const MatchingAutomaton> automaton,
                 ReactionHandlers handlers = {})
      : spec_(std::move(spec)), automaton_(std::move(automaton)), handlers_(std::move(handlers)) {
    const auto& tags = automaton_->tags;
    for (int t = 0; t < automaton_->tag_count(); ++t) {
      const TagInfo& info = tags[static_cast<std::size_t>(t)];
      bool is_operation = info.kind == MessageKind::kOperation;
      queues_.push_back(make_queue_repr(info.bound, is_operation ? 0 : spec_->arity(t)));
      waiters_.push_back(is_operation ? std::make_unique<std::condition_variable>() : nullptr);
    }
    for (const ConstructorSend& send : spec_->constructor_sends)
      send_state(spec_->signature.name(send.tag), send.args);
  }

  ObjectInstance(const ObjectInstance&) = delete;
  ObjectInstance& operator=(const ObjectInstance&) = delete;

  const ObjectSpec& spec() const { return *spec_; }
  const MatchingAutomaton& automaton() const { return *automaton_; }

  // Sends a state message. Never blocks beyond guard acquisition and never
  // fires reactions; wakes invokers whose reactions become fireable.
  void send_state(std::string_view tag, Payload args = {}) {
    int t = checked_tag(tag, MessageKind::kState, args.size());
    std::unique_lock<std::mutex> guard(mutex_);
    enqueue(t, std::move(args));
    int next = automaton_->receive_target(state_, t);
    if (next < 0) {
      std::string counters = violation_counters();
      guard.unlock();
      // The enqueued payload is deliberately not rolled back: the message
      // entered the mailbox before the transition check.
      throw ProtocolViolation(spec_->name, std::string(tag), counters);
    }
    record_step({Step::Kind::kReceive, state_, t, next});
    state_ = next;
    notify_fireable(state_);
  }

  // Invokes an operation: stores the message, then blocks until a reaction
  // whose pattern contains this tag fires, runs its body outside the guard
  // and returns the body's result.
  Value invoke_operation(std::string_view tag, Payload args = {}) {
    int t = checked_tag(tag, MessageKind::kOperation, args.size());
    std::unique_lock<std::mutex> guard(mutex_);
    if (auto* cq = std::get_if<CountQueue>(&queues_[static_cast<std::size_t>(t)])) ++cq->count;
    int next = automaton_->receive_target(state_, t);
    if (next < 0) {
      std::string counters = violation_counters();
      guard.unlock();
      throw ProtocolViolation(spec_->name, std::string(tag), counters);
    }
    record_step({Step::Kind::kReceive, state_, t, next});
    state_ = next;

    for (;;) {
      int reaction = pick_reaction(t);
      if (reaction >= 0) {
        Payload payloads = consume_pattern(reaction, t, args);
        guard.unlock();
        return run_reaction(reaction, payloads);
      }
      waiters_[static_cast<std::size_t>(t)]->wait(guard);
    }
  }

  Snapshot snapshot() const {
    std::unique_lock<std::mutex> guard(mutex_);
    Snapshot s;
    s.state = state_;
    s.counters = automaton_->states[static_cast<std::size_t>(state_)].counters;
    for (int t = 0; t < automaton_->tag_count(); ++t) s.queue_occupancy.push_back(occupancy(t));
    return s;
  }

  // Observer invoked inside the guard for every transition taken; used by
  // tests to check that concurrent histories are automaton paths.
  void set_step_observer(std::function<void(const Step&)> observer) {
    std::unique_lock<std::mutex> guard(mutex_);
    observer_ = std::move(observer);
  }

 private:
  int checked_tag(std::string_view tag, MessageKind expected, std::size_t arity) const {
    int t = spec_->signature.index_of(tag);
    if (t < 0) throw std::invalid_argument("unknown tag '" + std::string(tag) + "'");
    if (spec_->kind(t) != expected)
      throw std::invalid_argument("tag '" + std::string(tag) + "' is a " +
                                  std::string(to_string(spec_->kind(t))) + " message");
    if (static_cast<int>(arity) != spec_->arity(t))
      throw std::invalid_argument("tag '" + std::string(tag) + "' takes " +
                                  std::to_string(spec_->arity(t)) + " arguments, got " +
                                  std::to_string(arity));
    return t;
  }

  void enqueue(int tag, Payload args) {
    QueueRepr& q = queues_[static_cast<std::size_t>(tag)];
    if (auto* cq = std::get_if<CountQueue>(&q)) {
      ++cq->count;
    } else if (auto* sq = std::get_if<SlotQueue>(&q)) {
      sq->payload = std::move(args);  // a second store can only happen on the way to a violation
    } else if (auto* fq = std::get_if<FifoQueue>(&q)) {
      fq->items.push_back(std::move(args));
    }
  }

  int occupancy(int tag) const {
    const QueueRepr& q = queues_[static_cast<std::size_t>(tag)];
    if (const auto* cq = std::get_if<CountQueue>(&q)) return cq->count;
    if (const auto* sq = std::get_if<SlotQueue>(&q)) return sq->payload ? 1 : 0;
    if (const auto* fq = std::get_if<FifoQueue>(&q)) return static_cast<int>(fq->items.size());
    // No queue: the state counter is exact for these tags.
    const CounterVal& c = automaton_->states[static_cast<std::size_t>(state_)]
                              .counters[static_cast<std::size_t>(tag)];
    return c.exact();
  }

  // Highest-priority fireable reaction whose pattern contains `tag`.
  int pick_reaction(int tag) const {
    for (int r : automaton_->fireable(state_)) {
      const Reaction& reaction = spec_->reactions[static_cast<std::size_t>(r)];
      for (const PatternItem& item : reaction.pattern)
        if (item.tag == tag) return r;
    }
    return -1;
  }

  // Removes every pattern message, binding payloads in pattern order, then
  // follows the consume transition selected by the live queue occupancies.
  Payload consume_pattern(int reaction, int own_tag, const Payload& own_args) {
    const Reaction& r = spec_->reactions[static_cast<std::size_t>(reaction)];
    Payload payloads;
    for (const PatternItem& item : r.pattern) {
      if (item.tag == own_tag) {
        if (auto* cq = std::get_if<CountQueue>(&queues_[static_cast<std::size_t>(item.tag)]))
          --cq->count;
        payloads.insert(payloads.end(), own_args.begin(), own_args.end());
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
      if (automaton_->tags[static_cast<std::size_t>(item.tag)].bound.is_unbounded())
        emptied.emplace_back(item.tag, occupancy(item.tag) == 0);
    std::sort(emptied.begin(), emptied.end());
    const ConsumeTransition& c = automaton_->consume_for(state_, reaction, emptied);
    record_step({Step::Kind::kConsume, state_, reaction, c.to});
    state_ = c.to;
    notify_fireable(state_);
    return payloads;
  }

  // Wakes the wait-sets of every operation with a fireable reaction in
  // `state`. Broadcast keeps this safe: an awoken invoker re-checks and may
  // find its messages already consumed.
  void notify_fireable(int state) {
    for (int r : automaton_->fireable(state)) {
      int op = spec_->reactions[static_cast<std::size_t>(r)].operation_tag;
      waiters_[static_cast<std::size_t>(op)]->notify_all();
    }
  }

  Value run_reaction(int reaction, const Payload& payloads) {
    auto handler = handlers_.find(reaction);
    if (handler != handlers_.end()) return handler->second(*this, payloads);
    const Reaction& r = spec_->reactions[static_cast<std::size_t>(reaction)];
    // Bind pattern names to the consumed payloads, in pattern order.
    std::map<std::string, Value> env;
    std::size_t next = 0;
    for (const PatternItem& item : r.pattern)
      for (const std::string& binding : item.bindings) env[binding] = payloads.at(next++);
    for (const Action& action : r.body) {
      Payload args;
      for (const std::string& name : action.args) args.push_back(env.at(name));
      const std::string& tag = spec_->signature.name(action.tag);
      if (spec_->kind(action.tag) == MessageKind::kState)
        send_state(tag, std::move(args));
      else
        invoke_operation(tag, std::move(args));
    }
    return r.return_binding ? env.at(*r.return_binding) : Value::unit();
  }

  std::string violation_counters() const {
    return tuple_description(automaton_->states[static_cast<std::size_t>(state_)].counters,
                             spec_->signature);
  }

  void record_step(const Step& step) {
    if (observer_) observer_(step);
  }

  std::shared_ptr<const ObjectSpec> spec_;
  std::shared_ptr<const MatchingAutomaton> automaton_;
  ReactionHandlers handlers_;

  mutable std::mutex mutex_;
  int state_ = 0;
  std::vector<QueueRepr> queues_;
  std::vector<std::unique_ptr<std::condition_variable>> waiters_;  // operations only
  std::function<void(const Step&)> observer_;
};

inline std::unique_ptr<ObjectInstance> instantiate(std::shared_ptr<const ObjectSpec> spec,
                                                   std::shared_ptr<const MatchingAutomaton> automaton,
                                                   ReactionHandlers handlers = {}) {
  return std::make_unique<ObjectInstance>(std::move(spec), std::move(automaton), std::move(handlers));
}

}  // namespace tsop
