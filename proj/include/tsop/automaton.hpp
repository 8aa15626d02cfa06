#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <tsop/object_spec.hpp>
#include <tsop/semantics.hpp>

// The matching automaton: counter-tuple states annotated with the semantics
// of the protocol derivative that leads to them, receive transitions for
// message arrivals, and consume transitions for reaction firings. States
// whose annotation is empty are illegal and never materialized, so a
// protocol violation surfaces as a missing receive transition.

namespace tsop {

// Counter for one tag within a state: an exact count for bounded tags,
// 0 or $ ("at least one") for unbounded tags.
class CounterVal {
 public:
  constexpr CounterVal() = default;
  explicit constexpr CounterVal(int n) : raw_(n) {}

  static constexpr CounterVal dollar() { return CounterVal(kDollar); }

  bool is_dollar() const { return raw_ == kDollar; }
  int exact() const { return raw_; }  // meaningful only when !is_dollar()

  // >= 1 messages present?
  bool at_least_one() const { return is_dollar() || raw_ >= 1; }

  std::string to_string() const { return is_dollar() ? "$" : std::to_string(raw_); }

  friend auto operator<=>(const CounterVal&, const CounterVal&) = default;

 private:
  static constexpr int kDollar = -1;
  int raw_ = 0;
};

using CounterTuple = std::vector<CounterVal>;

// Compact tuple label in signature order, e.g. "01$0".
inline std::string tuple_label(const CounterTuple& counters) {
  std::string out;
  for (const CounterVal& c : counters) out += c.to_string();
  return out;
}

// Readable form, e.g. "{EMPTY:1, get:$}" (zero entries omitted).
inline std::string tuple_description(const CounterTuple& counters, const Signature& sig) {
  std::string out = "{";
  bool first = true;
  for (int t = 0; t < sig.size(); ++t) {
    const CounterVal& c = counters[static_cast<std::size_t>(t)];
    if (!c.at_least_one()) continue;
    if (!first) out += ", ";
    first = false;
    out += sig.name(t) + ":" + c.to_string();
  }
  return out + "}";
}

struct TagInfo {
  std::string name;
  MessageKind kind = MessageKind::kState;
  Bound bound = Bound::finite(0);
  friend bool operator==(const TagInfo&, const TagInfo&) = default;
};

struct CounterState {
  CounterTuple counters;
  SemSet annotation;  // never empty
  friend bool operator==(const CounterState&, const CounterState&) = default;
};

struct ReceiveTransition {
  int from = -1;
  int tag = -1;
  int to = -1;
  friend bool operator==(const ReceiveTransition&, const ReceiveTransition&) = default;
};

struct ConsumeTransition {
  int from = -1;
  int reaction = -1;
  // One flag per unbounded pattern tag (ascending tag order): true when the
  // firing empties that tag's queue.
  std::vector<std::pair<int, bool>> emptied;
  int to = -1;
  friend bool operator==(const ConsumeTransition&, const ConsumeTransition&) = default;
};

class MatchingAutomaton {
 public:
  std::string object_name;
  std::vector<TagInfo> tags;          // signature order
  std::vector<CounterState> states;   // BFS discovery order; initial = 0
  std::vector<ReceiveTransition> receives;
  std::vector<ConsumeTransition> consumes;

  int tag_count() const { return static_cast<int>(tags.size()); }
  int state_count() const { return static_cast<int>(states.size()); }

  Signature signature() const {
    std::vector<std::string> names;
    for (const TagInfo& t : tags) names.push_back(t.name);
    return Signature(names);
  }

  // Size of the raw counter space before pruning.
  std::uint64_t raw_tuple_count() const {
    std::uint64_t n = 1;
    for (const TagInfo& t : tags)
      n *= t.bound.is_unbounded() ? 2 : static_cast<std::uint64_t>(t.bound.max_count()) + 1;
    return n;
  }

  // -1 when receiving `tag` in `state` is a protocol violation.
  int receive_target(int state, int tag) const {
    return receive_to_[static_cast<std::size_t>(state)][static_cast<std::size_t>(tag)];
  }

  bool is_firing(int state) const { return !fireable_[static_cast<std::size_t>(state)].empty(); }

  // Reactions with at least one consume transition from `state`, in
  // declaration order.
  const std::vector<int>& fireable(int state) const {
    return fireable_[static_cast<std::size_t>(state)];
  }

  const std::vector<int>& consumes_from(int state) const {
    return state_consumes_[static_cast<std::size_t>(state)];
  }

  // The consume transition for a reaction given the per-tag emptied flags
  // observed at runtime.
  const ConsumeTransition& consume_for(int state, int reaction,
                                       const std::vector<std::pair<int, bool>>& emptied) const {
    for (int idx : consumes_from(state)) {
      const ConsumeTransition& c = consumes[static_cast<std::size_t>(idx)];
      if (c.reaction == reaction && c.emptied == emptied) return c;
    }
    throw std::logic_error("no consume transition for reaction " + std::to_string(reaction) +
                           " from state " + std::to_string(state));
  }

  int state_index(const CounterTuple& counters) const {
    auto it = index_.find(counters);
    return it == index_.end() ? -1 : it->second;
  }

  // Recompute the derived lookup tables from the flat fields above (used
  // after deserialization).
  void rebuild_lookups() {
    auto n = static_cast<std::size_t>(state_count());
    receive_to_.assign(n, std::vector<int>(static_cast<std::size_t>(tag_count()), -1));
    for (const ReceiveTransition& r : receives)
      receive_to_[static_cast<std::size_t>(r.from)][static_cast<std::size_t>(r.tag)] = r.to;
    state_consumes_.assign(n, {});
    fireable_.assign(n, {});
    for (std::size_t i = 0; i < consumes.size(); ++i) {
      const ConsumeTransition& c = consumes[i];
      state_consumes_[static_cast<std::size_t>(c.from)].push_back(static_cast<int>(i));
      auto& f = fireable_[static_cast<std::size_t>(c.from)];
      if (std::find(f.begin(), f.end(), c.reaction) == f.end()) f.push_back(c.reaction);
    }
    for (auto& f : fireable_) std::sort(f.begin(), f.end());
    index_.clear();
    for (int i = 0; i < state_count(); ++i) index_[states[static_cast<std::size_t>(i)].counters] = i;
  }

  friend bool operator==(const MatchingAutomaton& a, const MatchingAutomaton& b) {
    return a.object_name == b.object_name && a.tags == b.tags && a.states == b.states &&
           a.receives == b.receives && a.consumes == b.consumes;
  }

 private:
  std::vector<std::vector<int>> receive_to_;
  std::vector<std::vector<int>> state_consumes_;
  std::vector<std::vector<int>> fireable_;
  std::map<CounterTuple, int> index_;
};

namespace detail {

inline CounterTuple increment(const CounterTuple& counters, int tag, const std::vector<TagInfo>& tags) {
  CounterTuple out = counters;
  auto t = static_cast<std::size_t>(tag);
  if (tags[t].bound.is_unbounded()) {
    out[t] = CounterVal::dollar();  // saturating: $ stays $
  } else {
    int next = out[t].exact() + 1;
    if (next > static_cast<int>(tags[t].bound.max_count()))
      throw std::logic_error("counter for '" + tags[t].name + "' would exceed its bound");
    out[t] = CounterVal(next);
  }
  return out;
}

}  // namespace detail

// BFS construction from the all-zero state, pruning states whose derivative
// annotation is empty. Tags are explored in signature order, so state
// indices (and every export) are deterministic.
inline MatchingAutomaton build_automaton(const ObjectSpec& spec) {
  MatchingAutomaton a;
  a.object_name = spec.name;

  SemSet initial = semantics(spec.protocol, spec.signature.size());
  if (initial.empty()) throw SpecError("cannot build automaton: empty protocol");

  for (int t = 0; t < spec.signature.size(); ++t)
    a.tags.push_back({spec.signature.name(t), spec.kind(t), bound(spec.protocol, t, spec.signature)});

  std::map<CounterTuple, int> index;
  std::deque<int> work;
  CounterTuple zero(static_cast<std::size_t>(spec.signature.size()));
  a.states.push_back({zero, initial});
  index[zero] = 0;
  work.push_back(0);

  while (!work.empty()) {
    int s = work.front();
    work.pop_front();
    for (int t = 0; t < spec.signature.size(); ++t) {
      SemSet derived = sem_derivative(a.states[static_cast<std::size_t>(s)].annotation, t);
      if (derived.empty()) continue;  // violation edge: no transition
      CounterTuple next = detail::increment(a.states[static_cast<std::size_t>(s)].counters, t, a.tags);
      auto it = index.find(next);
      int target;
      if (it == index.end()) {
        target = a.state_count();
        a.states.push_back({next, std::move(derived)});
        index[next] = target;
        work.push_back(target);
      } else {
        target = it->second;
        // Annotations are path-independent; two routes to one tuple must
        // agree once canonicalized.
        if (!(a.states[static_cast<std::size_t>(target)].annotation == derived))
          throw std::logic_error("annotation mismatch for state " + tuple_label(next));
      }
      a.receives.push_back({s, t, target});
    }
  }

  for (int s = 0; s < a.state_count(); ++s) {
    const CounterTuple& counters = a.states[static_cast<std::size_t>(s)].counters;
    for (std::size_t r = 0; r < spec.reactions.size(); ++r) {
      const Reaction& reaction = spec.reactions[r];
      bool matches = true;
      std::vector<int> unbounded;
      for (const PatternItem& item : reaction.pattern) {
        const CounterVal& c = counters[static_cast<std::size_t>(item.tag)];
        if (a.tags[static_cast<std::size_t>(item.tag)].bound.is_unbounded()) {
          if (!c.is_dollar()) { matches = false; break; }
          unbounded.push_back(item.tag);
        } else if (c.exact() < 1) {
          matches = false;
          break;
        }
      }
      if (!matches) continue;
      std::sort(unbounded.begin(), unbounded.end());
      for (unsigned mask = 0; mask < (1u << unbounded.size()); ++mask) {
        ConsumeTransition c;
        c.from = s;
        c.reaction = static_cast<int>(r);
        CounterTuple target = counters;
        for (const PatternItem& item : reaction.pattern) {
          auto t = static_cast<std::size_t>(item.tag);
          if (!a.tags[t].bound.is_unbounded()) target[t] = CounterVal(target[t].exact() - 1);
        }
        for (std::size_t u = 0; u < unbounded.size(); ++u) {
          bool emptied = (mask >> u) & 1u;
          c.emptied.emplace_back(unbounded[u], emptied);
          target[static_cast<std::size_t>(unbounded[u])] = emptied ? CounterVal(0) : CounterVal::dollar();
        }
        auto it = index.find(target);
        if (it == index.end())
          throw std::logic_error("consume target " + tuple_label(target) + " is not a legal state");
        c.to = it->second;
        a.consumes.push_back(std::move(c));
      }
    }
  }

  a.rebuild_lookups();
  return a;
}

inline const std::vector<int>& fireable(const MatchingAutomaton& a, int state) {
  return a.fireable(state);
}

// Warnings about a spec that is valid but degenerate with respect to its
// own automaton.
inline std::vector<std::string> validate_against_protocol(const ObjectSpec& spec,
                                                          const MatchingAutomaton& a) {
  std::vector<std::string> warnings;
  if (spec.reactions.empty())
    warnings.push_back("object declares no reactions: it can never answer operations");
  std::vector<bool> fires(spec.reactions.size(), false);
  for (const ConsumeTransition& c : a.consumes) fires[static_cast<std::size_t>(c.reaction)] = true;
  for (std::size_t r = 0; r < spec.reactions.size(); ++r) {
    if (fires[r]) continue;
    std::string pattern;
    for (const PatternItem& item : spec.reactions[r].pattern) {
      if (!pattern.empty()) pattern += " & ";
      pattern += spec.signature.name(item.tag);
    }
    warnings.push_back("reaction " + spec.reaction_name(static_cast<int>(r)) + " (" + pattern +
                       ") can never fire in any legal state");
  }
  return warnings;
}

}  // namespace tsop
