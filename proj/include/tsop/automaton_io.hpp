#pragma once

#include <string>

#include <json.hpp>

#include <tsop/automaton.hpp>

// Automaton exports: Graphviz DOT for inspection (solid receive edges,
// dashed consume edges, double circles on firing states) and a JSON form
// that round-trips through import_json.

namespace tsop {

inline std::string export_dot(const MatchingAutomaton& a) {
  std::string out = "digraph " + (a.object_name.empty() ? std::string("automaton") : a.object_name) + " {\n";
  out += "  rankdir=LR;\n";
  out += "  node [shape=circle];\n";
  for (int s = 0; s < a.state_count(); ++s) {
    const CounterState& state = a.states[static_cast<std::size_t>(s)];
    out += "  s" + std::to_string(s) + " [label=\"" + tuple_label(state.counters) + " (" +
           std::to_string(s) + ")\"";
    if (a.is_firing(s)) out += ", shape=doublecircle";
    out += "];\n";
  }
  for (const ReceiveTransition& r : a.receives) {
    out += "  s" + std::to_string(r.from) + " -> s" + std::to_string(r.to) + " [label=\"" +
           a.tags[static_cast<std::size_t>(r.tag)].name + "\"];\n";
  }
  for (const ConsumeTransition& c : a.consumes) {
    // Label with the consumed multiset. Bounded consumption is the counter
    // difference; each unbounded pattern tag contributes exactly one.
    const CounterTuple& from = a.states[static_cast<std::size_t>(c.from)].counters;
    const CounterTuple& to = a.states[static_cast<std::size_t>(c.to)].counters;
    std::string label;
    for (int t = 0; t < a.tag_count(); ++t) {
      int consumed = 0;
      if (a.tags[static_cast<std::size_t>(t)].bound.is_unbounded()) {
        for (const auto& [tag, emptied] : c.emptied) {
          (void)emptied;
          if (tag == t) consumed = 1;
        }
      } else {
        consumed = from[static_cast<std::size_t>(t)].exact() - to[static_cast<std::size_t>(t)].exact();
      }
      for (int k = 0; k < consumed; ++k) {
        if (!label.empty()) label += "&";
        label += a.tags[static_cast<std::size_t>(t)].name;
      }
    }
    out += "  s" + std::to_string(c.from) + " -> s" + std::to_string(c.to) +
           " [style=dashed, label=\"" + label + "\"];\n";
  }
  out += "}\n";
  return out;
}

namespace detail {

inline nlohmann::ordered_json counter_json(const CounterVal& c) {
  if (c.is_dollar()) return "$";
  return c.exact();
}

inline nlohmann::ordered_json gen_count_json(const GenCount& c) {
  if (c.is_omega()) return "omega";
  return c.finite();
}

}  // namespace detail

inline std::string export_json(const MatchingAutomaton& a) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["object"] = a.object_name;
  doc["tags"] = ordered_json::array();
  for (const TagInfo& t : a.tags) {
    ordered_json tag;
    tag["name"] = t.name;
    tag["kind"] = to_string(t.kind);
    if (t.bound.is_unbounded())
      tag["bound"] = "unbounded";
    else
      tag["bound"] = t.bound.max_count();
    doc["tags"].push_back(std::move(tag));
  }
  doc["states"] = ordered_json::array();
  for (int s = 0; s < a.state_count(); ++s) {
    const CounterState& state = a.states[static_cast<std::size_t>(s)];
    ordered_json js;
    js["index"] = s;
    js["counters"] = ordered_json::object();
    for (int t = 0; t < a.tag_count(); ++t)
      js["counters"][a.tags[static_cast<std::size_t>(t)].name] =
          detail::counter_json(state.counters[static_cast<std::size_t>(t)]);
    js["annotation"] = ordered_json::array();
    for (const GenVector& v : state.annotation.vectors()) {
      ordered_json vec = ordered_json::object();
      for (int t = 0; t < a.tag_count(); ++t)
        vec[a.tags[static_cast<std::size_t>(t)].name] =
            detail::gen_count_json(v[static_cast<std::size_t>(t)]);
      js["annotation"].push_back(std::move(vec));
    }
    js["firing"] = a.is_firing(s);
    doc["states"].push_back(std::move(js));
  }
  doc["receives"] = ordered_json::array();
  for (const ReceiveTransition& r : a.receives) {
    ordered_json jr;
    jr["from"] = r.from;
    jr["tag"] = a.tags[static_cast<std::size_t>(r.tag)].name;
    jr["to"] = r.to;
    doc["receives"].push_back(std::move(jr));
  }
  doc["consumes"] = ordered_json::array();
  for (const ConsumeTransition& c : a.consumes) {
    ordered_json jc;
    jc["from"] = c.from;
    jc["reaction"] = c.reaction;
    jc["emptied"] = ordered_json::object();
    for (const auto& [tag, emptied] : c.emptied)
      jc["emptied"][a.tags[static_cast<std::size_t>(tag)].name] = emptied;
    jc["to"] = c.to;
    doc["consumes"].push_back(std::move(jc));
  }
  return doc.dump(2) + "\n";
}

inline MatchingAutomaton import_json(const std::string& text) {
  using nlohmann::json;
  json doc = json::parse(text);
  MatchingAutomaton a;
  a.object_name = doc.at("object").get<std::string>();
  for (const json& jt : doc.at("tags")) {
    TagInfo info;
    info.name = jt.at("name").get<std::string>();
    info.kind = jt.at("kind").get<std::string>() == "operation" ? MessageKind::kOperation
                                                                : MessageKind::kState;
    const json& b = jt.at("bound");
    info.bound = b.is_string() ? Bound::unbounded() : Bound::finite(b.get<std::uint32_t>());
    a.tags.push_back(std::move(info));
  }
  auto tag_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < a.tags.size(); ++i)
      if (a.tags[i].name == name) return static_cast<int>(i);
    throw SpecError("automaton json: unknown tag '" + name + "'");
  };
  for (const json& js : doc.at("states")) {
    CounterState state;
    state.counters.resize(a.tags.size());
    for (const auto& [name, value] : js.at("counters").items()) {
      auto t = static_cast<std::size_t>(tag_index(name));
      state.counters[t] = value.is_string() ? CounterVal::dollar() : CounterVal(value.get<int>());
    }
    std::vector<GenVector> vectors;
    for (const json& jv : js.at("annotation")) {
      GenVector v(a.tags.size());
      for (const auto& [name, value] : jv.items()) {
        auto t = static_cast<std::size_t>(tag_index(name));
        v[t] = value.is_string() ? GenCount::omega() : GenCount(value.get<std::uint32_t>());
      }
      vectors.push_back(std::move(v));
    }
    state.annotation = SemSet::of(std::move(vectors));
    a.states.push_back(std::move(state));
  }
  for (const json& jr : doc.at("receives"))
    a.receives.push_back({jr.at("from").get<int>(), tag_index(jr.at("tag").get<std::string>()),
                          jr.at("to").get<int>()});
  for (const json& jc : doc.at("consumes")) {
    ConsumeTransition c;
    c.from = jc.at("from").get<int>();
    c.reaction = jc.at("reaction").get<int>();
    for (const auto& [name, value] : jc.at("emptied").items())
      c.emptied.emplace_back(tag_index(name), value.get<bool>());
    std::sort(c.emptied.begin(), c.emptied.end());
    c.to = jc.at("to").get<int>();
    a.consumes.push_back(std::move(c));
  }
  a.rebuild_lookups();
  return a;
}

}  // namespace tsop
