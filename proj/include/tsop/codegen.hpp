#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <tsop/automaton.hpp>
#include <tsop/object_spec.hpp>
#include <tsop/runtime.hpp>

// Source generation: expands an ObjectSpec plus its matching automaton into
// a self-contained C++ class implementing the same transition tables the
// runtime interprets. State methods are private, operations public, and
// reaction bodies always run after the guard is released.

namespace tsop {

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

enum class QueueKind { kNone, kCounter, kSlot, kFifo };

// The per-object emission plan: everything generate_source needs, computed
// once from the spec and the automaton.
struct GenPlan {
  struct TagPlan {
    QueueKind queue = QueueKind::kNone;
    int payload_arity = 0;              // 0 for operations: invokers keep their arguments
    std::vector<std::pair<int, int>> edges;  // (from, to), from ascending
    std::vector<int> violating_states;
    std::vector<int> self_loops;
  };
  struct FireCase {
    int state = -1;
    int reaction = -1;
  };
  std::vector<TagPlan> tags;                    // signature order
  std::vector<std::vector<FireCase>> op_fires;  // per tag; empty for states
  std::vector<std::string> reaction_names;
  bool templated = false;
  bool any_violation = false;
};

inline GenPlan make_gen_plan(const ObjectSpec& spec, const MatchingAutomaton& a) {
  GenPlan plan;
  plan.tags.resize(static_cast<std::size_t>(a.tag_count()));
  plan.op_fires.resize(static_cast<std::size_t>(a.tag_count()));
  for (int t = 0; t < a.tag_count(); ++t) {
    GenPlan::TagPlan& tp = plan.tags[static_cast<std::size_t>(t)];
    bool is_operation = spec.kind(t) == MessageKind::kOperation;
    tp.payload_arity = is_operation ? 0 : spec.arity(t);
    const Bound& b = a.tags[static_cast<std::size_t>(t)].bound;
    if (tp.payload_arity == 0)
      tp.queue = b.is_unbounded() ? QueueKind::kCounter : QueueKind::kNone;
    else if (!b.is_unbounded() && b.max_count() <= 1)
      tp.queue = QueueKind::kSlot;
    else
      tp.queue = QueueKind::kFifo;
    for (int s = 0; s < a.state_count(); ++s) {
      int to = a.receive_target(s, t);
      if (to < 0) {
        tp.violating_states.push_back(s);
        plan.any_violation = true;
      } else if (to == s) {
        tp.self_loops.push_back(s);
      } else {
        tp.edges.emplace_back(s, to);
      }
    }
    if (is_operation) {
      for (int s = 0; s < a.state_count(); ++s) {
        for (int r : a.fireable(s)) {
          const Reaction& reaction = spec.reactions[static_cast<std::size_t>(r)];
          bool contains = false;
          for (const PatternItem& item : reaction.pattern) contains |= item.tag == t;
          if (contains) {
            plan.op_fires[static_cast<std::size_t>(t)].push_back({s, r});
            break;  // highest priority wins
          }
        }
      }
    }
  }
  for (std::size_t r = 0; r < spec.reactions.size(); ++r)
    plan.reaction_names.push_back(spec.reaction_name(static_cast<int>(r)));
  for (const MessageDecl& m : spec.messages)
    if (m.arity() > 0 || m.returns_value) plan.templated = true;
  return plan;
}

namespace detail {

inline std::string hex16(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

inline std::string cxx_literal(const Value& v) {
  if (v.is_unit()) return "{}";
  return v.to_string();  // ints, bools and quoted strings are valid C++
}

class ClassEmitter {
 public:
  ClassEmitter(const ObjectSpec& spec, const MatchingAutomaton& a, const GenPlan& plan)
      : spec_(spec), a_(a), plan_(plan) {}

  std::string emit() {
    out_.clear();
    header();
    line("");
    if (plan_.templated) line("template <typename A>");
    line("class " + spec_.name + " {");
    line(" public:");
    constructor();
    for (const MessageDecl& m : spec_.messages)
      if (m.kind == MessageKind::kOperation) operation_method(m);
    line(" private:");
    for (const MessageDecl& m : spec_.messages)
      if (m.kind == MessageKind::kState) state_method(m);
    for (std::size_t r = 0; r < spec_.reactions.size(); ++r) reaction_method(static_cast<int>(r));
    if (plan_.any_violation) state_label_helper();
    fields();
    line("};");
    return out_;
  }

 private:
  void line(const std::string& s) {
    out_ += s;
    out_ += '\n';
  }

  const GenPlan::TagPlan& tag_plan(int t) const { return plan_.tags[static_cast<std::size_t>(t)]; }

  std::string queue_name(int t) const { return "queue_" + spec_.signature.name(t) + "_"; }
  std::string cond_name(int t) const { return "try_" + spec_.signature.name(t) + "_"; }

  std::string payload_type(int arity) const {
    if (arity == 1) return "A";
    std::string out = "std::tuple<";
    for (int i = 0; i < arity; ++i) {
      if (i) out += ", ";
      out += "A";
    }
    return out + ">";
  }

  void header() {
    line("// Generated by tsopc -- do not edit.");
    line("// object: " + spec_.name);
    line("// protocol: " + to_string(spec_.protocol, spec_.signature));
    line("// spec-hash: fnv1a:" + hex16(fnv1a64(pretty_print(spec_))));
    line("#pragma once");
    line("");
    bool any_op = false, any_slot = false, any_fifo = false, any_tuple = false, any_payload = false;
    for (int t = 0; t < a_.tag_count(); ++t) {
      const GenPlan::TagPlan& tp = tag_plan(t);
      if (spec_.kind(t) == MessageKind::kOperation) any_op = true;
      if (tp.queue == QueueKind::kSlot) any_slot = true;
      if (tp.queue == QueueKind::kFifo) any_fifo = true;
      if (tp.payload_arity >= 2) any_tuple = true;
      if (tp.payload_arity >= 1) any_payload = true;
    }
    if (any_op) line("#include <condition_variable>");
    if (any_fifo) line("#include <deque>");
    if (!spec_.messages.empty()) line("#include <mutex>");
    if (any_slot) line("#include <optional>");
    if (any_tuple) line("#include <tuple>");
    if (any_payload) line("#include <utility>");
    if (plan_.any_violation) {
      line("");
      line("#include <tsop/violation.hpp>");
    }
  }

  void constructor() {
    line("  " + spec_.name + "() {");
    for (const ConstructorSend& send : spec_.constructor_sends) {
      std::string call = "    this->" + spec_.signature.name(send.tag) + "(";
      for (std::size_t i = 0; i < send.args.size(); ++i) {
        if (i) call += ", ";
        call += cxx_literal(send.args[i]);
      }
      line(call + ");");
    }
    line("  }");
    line("");
  }

  std::string violation_throw(int tag) const {
    return "throw tsop::ProtocolViolation(\"" + spec_.name + "\", \"" + spec_.signature.name(tag) +
           "\", state_label(state_));";
  }

  // Operations whose reaction becomes fireable in `state`, in priority
  // order, deduplicated.
  std::vector<int> ops_to_notify(int state) const {
    std::vector<int> ops;
    for (int r : a_.fireable(state)) {
      int op = spec_.reactions[static_cast<std::size_t>(r)].operation_tag;
      if (std::find(ops.begin(), ops.end(), op) == ops.end()) ops.push_back(op);
    }
    return ops;
  }

  // The phase-1 switch over receive transitions shared by state and
  // operation methods. State methods wake newly enabled invokers; operation
  // methods do not (the invoking thread runs its own reaction).
  void receive_switch(int tag, bool notify) {
    const GenPlan::TagPlan& tp = tag_plan(tag);
    bool violations = !tp.violating_states.empty();
    line("    switch (state_) {");
    for (const auto& [from, to] : tp.edges) {
      std::string body = "case " + std::to_string(from) + ": state_ = " + std::to_string(to) + ";";
      if (notify)
        for (int op : ops_to_notify(to)) body += " " + cond_name(op) + ".notify_all();";
      line("      " + body + " break;");
    }
    if (violations) {
      // Self-loops stay explicit so that the default case means violation.
      for (int s : tp.self_loops) line("      case " + std::to_string(s) + ": break;");
      line("      default:");
      line("        guard.unlock();");
      line("        " + violation_throw(tag));
      line("    }");
    } else {
      line("      default: break;");
      line("    }");
    }
  }

  void state_method(const MessageDecl& m) {
    line("  void " + m.name + "(" + param_list(m) + ") {");
    line("    std::unique_lock<std::mutex> guard(lock_);");
    enqueue_statement(m);
    receive_switch(m.tag, /*notify=*/true);
    line("  }");
    line("");
  }

  std::string param_list(const MessageDecl& m) const {
    std::string out;
    for (std::size_t i = 0; i < m.params.size(); ++i) {
      if (i) out += ", ";
      out += "A " + m.params[i];
    }
    return out;
  }

  void enqueue_statement(const MessageDecl& m) {
    const GenPlan::TagPlan& tp = tag_plan(m.tag);
    switch (tp.queue) {
      case QueueKind::kNone:
        return;
      case QueueKind::kCounter:
        line("    ++" + queue_name(m.tag) + ";");
        return;
      case QueueKind::kSlot:
        if (m.arity() == 1) {
          line("    " + queue_name(m.tag) + " = std::move(" + m.params[0] + ");");
        } else {
          std::string args;
          for (std::size_t i = 0; i < m.params.size(); ++i) {
            if (i) args += ", ";
            args += "std::move(" + m.params[i] + ")";
          }
          line("    " + queue_name(m.tag) + ".emplace(" + args + ");");
        }
        return;
      case QueueKind::kFifo:
        if (m.arity() == 1) {
          line("    " + queue_name(m.tag) + ".push_back(std::move(" + m.params[0] + "));");
        } else {
          std::string args;
          for (std::size_t i = 0; i < m.params.size(); ++i) {
            if (i) args += ", ";
            args += "std::move(" + m.params[i] + ")";
          }
          line("    " + queue_name(m.tag) + ".emplace_back(" + args + ");");
        }
        return;
    }
  }

  void operation_method(const MessageDecl& m) {
    std::string ret = m.returns_value ? "A" : "void";
    line("  " + ret + " " + m.name + "(" + param_list(m) + ") {");
    line("    std::unique_lock<std::mutex> guard(lock_);");
    enqueue_statement(m);
    receive_switch(m.tag, /*notify=*/false);
    line("    while (true) {");
    line("      switch (state_) {");
    for (const GenPlan::FireCase& fire : plan_.op_fires[static_cast<std::size_t>(m.tag)])
      fire_case(m, fire);
    line("        default:");
    line("          " + cond_name(m.tag) + ".wait(guard);");
    line("      }");
    line("    }");
    line("  }");
    line("");
  }

  void fire_case(const MessageDecl& m, const GenPlan::FireCase& fire) {
    const Reaction& reaction = spec_.reactions[static_cast<std::size_t>(fire.reaction)];
    line("        case " + std::to_string(fire.state) + ": {");
    std::string indent = "          ";

    // Dequeue pattern messages in pattern order; our own arguments are the
    // method parameters.
    std::vector<std::string> call_args;
    std::vector<int> unbounded;  // ascending tag order
    for (const PatternItem& item : reaction.pattern) {
      if (a_.tags[static_cast<std::size_t>(item.tag)].bound.is_unbounded())
        unbounded.push_back(item.tag);
      if (item.tag == m.tag) {
        if (tag_plan(m.tag).queue == QueueKind::kCounter)
          line(indent + "--" + queue_name(m.tag) + ";");
        for (const std::string& p : m.params) call_args.push_back(p);
        continue;
      }
      const GenPlan::TagPlan& tp = tag_plan(item.tag);
      const std::string q = queue_name(item.tag);
      switch (tp.queue) {
        case QueueKind::kNone:
          break;
        case QueueKind::kCounter:
          line(indent + "--" + q + ";");
          break;
        case QueueKind::kSlot:
          if (item.bindings.size() == 1)
            line(indent + "A " + item.bindings[0] + " = std::move(*" + q + ");");
          else
            line(indent + "auto [" + join(item.bindings) + "] = std::move(*" + q + ");");
          line(indent + q + ".reset();");
          break;
        case QueueKind::kFifo:
          if (item.bindings.size() == 1)
            line(indent + "A " + item.bindings[0] + " = std::move(" + q + ".front());");
          else
            line(indent + "auto [" + join(item.bindings) + "] = std::move(" + q + ".front());");
          line(indent + q + ".pop_front();");
          break;
      }
      for (const std::string& b : item.bindings) call_args.push_back(b);
    }
    std::sort(unbounded.begin(), unbounded.end());

    // Consume target: bounded residues are fixed; each unbounded pattern tag
    // needs a runtime emptiness check.
    std::vector<int> targets = consume_state_update(fire, unbounded, indent);

    // Wake operations that can fire in the new state.
    std::set<int> distinct(targets.begin(), targets.end());
    for (int target : distinct) {
      std::vector<int> ops = ops_to_notify(target);
      if (ops.empty()) continue;
      std::string notifies;
      for (int op : ops) notifies += " " + cond_name(op) + ".notify_all();";
      if (distinct.size() == 1)
        line(indent + notifies.substr(1));
      else
        line(indent + "if (state_ == " + std::to_string(target) + ") {" + notifies + " }");
    }

    line(indent + "guard.unlock();");
    std::string call = plan_.reaction_names[static_cast<std::size_t>(fire.reaction)] + "(" +
                       join(call_args) + ")";
    if (m.returns_value) {
      line(indent + "return " + call + ";");
    } else {
      line(indent + call + ";");
      line(indent + "return;");
    }
    line("        }");
  }

  // Emits the state_ update for a fire and returns every possible target.
  std::vector<int> consume_state_update(const GenPlan::FireCase& fire,
                                        const std::vector<int>& unbounded,
                                        const std::string& indent) {
    auto target_for = [&](unsigned mask) {
      std::vector<std::pair<int, bool>> emptied;
      for (std::size_t u = 0; u < unbounded.size(); ++u)
        emptied.emplace_back(unbounded[u], (mask >> u) & 1u);
      return a_.consume_for(fire.state, fire.reaction, emptied).to;
    };
    std::vector<int> targets;
    if (unbounded.empty()) {
      int to = target_for(0);
      line(indent + "state_ = " + std::to_string(to) + ";");
      targets.push_back(to);
      return targets;
    }
    auto empty_check = [&](int tag) {
      return tag_plan(tag).queue == QueueKind::kFifo ? queue_name(tag) + ".empty()"
                                                     : queue_name(tag) + " == 0";
    };
    if (unbounded.size() == 1) {
      int when_empty = target_for(1);
      int when_left = target_for(0);
      line(indent + "state_ = " + empty_check(unbounded[0]) + " ? " + std::to_string(when_empty) +
           " : " + std::to_string(when_left) + ";");
      targets = {when_empty, when_left};
      return targets;
    }
    for (std::size_t u = 0; u < unbounded.size(); ++u)
      line(indent + "const bool emptied_" + spec_.signature.name(unbounded[u]) + " = " +
           empty_check(unbounded[u]) + ";");
    for (unsigned mask = (1u << unbounded.size()) - 1;; --mask) {
      std::string cond;
      for (std::size_t u = 0; u < unbounded.size(); ++u) {
        if (!cond.empty()) cond += " && ";
        bool emptied = (mask >> u) & 1u;
        cond += (emptied ? "" : "!") + std::string("emptied_") + spec_.signature.name(unbounded[u]);
      }
      int to = target_for(mask);
      targets.push_back(to);
      if (mask == 0) {
        line(indent + "else state_ = " + std::to_string(to) + ";");
        break;
      }
      line(indent + (mask == (1u << unbounded.size()) - 1 ? "if (" : "else if (") + cond +
           ") state_ = " + std::to_string(to) + ";");
    }
    return targets;
  }

  static std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out += ", ";
      out += items[i];
    }
    return out;
  }

  void reaction_method(int index) {
    const Reaction& reaction = spec_.reactions[static_cast<std::size_t>(index)];
    bool returns = spec_.decl(reaction.operation_tag).returns_value;
    std::vector<std::string> params;
    for (const PatternItem& item : reaction.pattern)
      for (const std::string& b : item.bindings) params.push_back("A " + b);
    line("  " + std::string(returns ? "A" : "void") + " " +
         plan_.reaction_names[static_cast<std::size_t>(index)] + "(" + join(params) + ") {");
    for (const Action& action : reaction.body)
      line("    this->" + spec_.signature.name(action.tag) + "(" + join(action.args) + ");");
    if (reaction.return_binding) line("    return " + *reaction.return_binding + ";");
    line("  }");
    line("");
  }

  void state_label_helper() {
    line("  static const char* state_label(int state) {");
    std::string labels;
    for (int s = 0; s < a_.state_count(); ++s) {
      if (s) labels += ", ";
      labels += "\"" + tuple_label(a_.states[static_cast<std::size_t>(s)].counters) + "\"";
    }
    line("    static const char* const kLabels[] = {" + labels + "};");
    line("    return kLabels[state];");
    line("  }");
    line("");
  }

  void fields() {
    if (!spec_.messages.empty()) line("  std::mutex lock_;");
    for (const MessageDecl& m : spec_.messages)
      if (m.kind == MessageKind::kOperation) line("  std::condition_variable " + cond_name(m.tag) + ";");
    line("  int state_ = 0;");
    for (const MessageDecl& m : spec_.messages) {
      const GenPlan::TagPlan& tp = tag_plan(m.tag);
      switch (tp.queue) {
        case QueueKind::kNone:
          break;
        case QueueKind::kCounter:
          line("  int " + queue_name(m.tag) + " = 0;");
          break;
        case QueueKind::kSlot:
          line("  std::optional<" + payload_type(tp.payload_arity) + "> " + queue_name(m.tag) + ";");
          break;
        case QueueKind::kFifo:
          line("  std::deque<" + payload_type(tp.payload_arity) + "> " + queue_name(m.tag) + ";");
          break;
      }
    }
  }

  const ObjectSpec& spec_;
  const MatchingAutomaton& a_;
  const GenPlan& plan_;
  std::string out_;
};

}  // namespace detail

inline std::string generate_source(const ObjectSpec& spec, const MatchingAutomaton& a) {
  GenPlan plan = make_gen_plan(spec, a);
  return detail::ClassEmitter(spec, a, plan).emit();
}

// Byte comparison against a checked-in golden; reports the first difference.
inline bool golden_check(const ObjectSpec& spec, const MatchingAutomaton& a,
                         const std::string& expected, std::ostream* diff = nullptr) {
  std::string actual = generate_source(spec, a);
  if (actual == expected) return true;
  if (diff) {
    std::size_t line = 1, col = 1;
    std::size_t n = std::min(actual.size(), expected.size());
    std::size_t i = 0;
    while (i < n && actual[i] == expected[i]) {
      if (actual[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
    *diff << "generated source differs from golden at line " << line << ", col " << col << "\n";
  }
  return false;
}

}  // namespace tsop
