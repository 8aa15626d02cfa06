#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <tsop/protocol.hpp>
#include <tsop/semantics.hpp>
#include <tsop/value.hpp>

// The object-specification DSL: message declarations (state/operation),
// join-pattern reactions with self-send bodies, the protocol, and
// constructor sends. Files use extension `.tsop`, one object per file.

namespace tsop {

enum class MessageKind { kState, kOperation };

inline const char* to_string(MessageKind k) {
  return k == MessageKind::kState ? "state" : "operation";
}

struct MessageDecl {
  std::string name;
  MessageKind kind = MessageKind::kState;
  std::vector<std::string> params;
  bool returns_value = false;  // operations only
  int tag = -1;                // index in the signature

  int arity() const { return static_cast<int>(params.size()); }
  friend bool operator==(const MessageDecl&, const MessageDecl&) = default;
};

struct PatternItem {
  int tag = -1;
  std::vector<std::string> bindings;
  friend bool operator==(const PatternItem&, const PatternItem&) = default;
};

// A self-send in a reaction body; arguments are binding names.
struct Action {
  int tag = -1;
  std::vector<std::string> args;
  friend bool operator==(const Action&, const Action&) = default;
};

struct Reaction {
  std::vector<PatternItem> pattern;  // written order; tags pairwise distinct
  std::vector<Action> body;
  std::optional<std::string> return_binding;
  int operation_tag = -1;  // the single operation tag in the pattern
  friend bool operator==(const Reaction&, const Reaction&) = default;
};

struct ConstructorSend {
  int tag = -1;
  std::vector<Value> args;
  friend bool operator==(const ConstructorSend&, const ConstructorSend&) = default;
};

struct ObjectSpec {
  std::string name;
  std::vector<MessageDecl> messages;  // declaration order
  Signature signature;                // sorted tag names
  Protocol protocol;
  std::vector<Reaction> reactions;  // declaration order = firing priority
  std::vector<ConstructorSend> constructor_sends;

  const MessageDecl& decl(int tag) const {
    for (const MessageDecl& m : messages)
      if (m.tag == tag) return m;
    throw std::logic_error("no declaration for tag index " + std::to_string(tag));
  }

  MessageKind kind(int tag) const { return decl(tag).kind; }
  int arity(int tag) const { return decl(tag).arity(); }

  // Reaction method name: when_ + pattern tags joined by underscores.
  std::string reaction_name(int index) const {
    std::string out = "when";
    for (const PatternItem& item : reactions.at(static_cast<std::size_t>(index)).pattern) {
      out += '_';
      out += signature.name(item.tag);
    }
    return out;
  }

  friend bool operator==(const ObjectSpec&, const ObjectSpec&) = default;
};

namespace detail {

struct SpecLine {
  int number = 0;
  std::string text;  // comment-stripped, trimmed
};

inline std::vector<SpecLine> split_spec_lines(std::string_view text) {
  std::vector<SpecLine> out;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view raw = text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
    ++number;
    // Strip a # comment, honoring double-quoted literals.
    std::string line;
    bool in_string = false;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      char c = raw[i];
      if (c == '"' && (i == 0 || raw[i - 1] != '\\')) in_string = !in_string;
      if (c == '#' && !in_string) break;
      line += c;
    }
    std::size_t b = line.find_first_not_of(" \t\r");
    std::size_t e = line.find_last_not_of(" \t\r");
    if (b != std::string::npos) out.push_back({number, line.substr(b, e - b + 1)});
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  return out;
}

// Word-level tokenizer for DSL lines (identifiers, punctuation, literals).
class LineTokens {
 public:
  LineTokens(std::string_view text, int line) : text_(text), line_(line) { skip_ws(); }

  bool at_end() const { return pos_ >= text_.size(); }

  char peek_char() const { return at_end() ? '\0' : text_[pos_]; }

  bool try_punct(std::string_view p) {
    if (text_.substr(pos_).starts_with(p)) {
      pos_ += p.size();
      skip_ws();
      return true;
    }
    return false;
  }

  void expect_punct(std::string_view p, std::string_view what) {
    if (!try_punct(p)) fail("expected '" + std::string(p) + "' " + std::string(what));
  }

  std::string expect_ident(std::string_view what) {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string word(text_.substr(start, pos_ - start));
    if (!is_identifier(word)) fail("expected " + std::string(what));
    skip_ws();
    return word;
  }

  // A literal token: quoted string, signed integer, true/false, unit.
  Value expect_literal(std::string_view what) {
    std::size_t start = pos_;
    if (peek_char() == '"') {
      ++pos_;
      while (pos_ < text_.size() && !(text_[pos_] == '"' && text_[pos_ - 1] != '\\')) ++pos_;
      if (pos_ >= text_.size()) fail("unterminated string literal");
      ++pos_;
    } else {
      while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ')' &&
             text_[pos_] != '}' && text_[pos_] != ' ' && text_[pos_] != '\t')
        ++pos_;
    }
    std::string word(text_.substr(start, pos_ - start));
    skip_ws();
    auto v = Value::parse_literal(word);
    if (!v) fail("expected " + std::string(what) + ", got '" + word + "'");
    return *v;
  }

  std::string rest() const { return std::string(text_.substr(pos_)); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw SpecError(msg, line_, static_cast<int>(pos_) + 1);
  }

  void expect_end() {
    if (!at_end()) fail("trailing input '" + rest() + "'");
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_;
};

}  // namespace detail

// Full validation of an ObjectSpec; parse_spec runs this, and programmatic
// construction should too. Throws SpecError on the first problem.
inline void validate_object_spec(const ObjectSpec& spec) {
  if (!is_identifier(spec.name)) throw SpecError("invalid object name '" + spec.name + "'");
  std::vector<std::string> names;
  for (const MessageDecl& m : spec.messages) {
    if (!is_identifier(m.name)) throw SpecError("invalid message name '" + m.name + "'");
    names.push_back(m.name);
    if (m.kind == MessageKind::kState && m.returns_value)
      throw SpecError("state message '" + m.name + "' cannot declare a return");
    for (std::size_t i = 0; i < m.params.size(); ++i) {
      if (!is_identifier(m.params[i]))
        throw SpecError("invalid parameter name '" + m.params[i] + "' on '" + m.name + "'");
      for (std::size_t j = 0; j < i; ++j)
        if (m.params[i] == m.params[j])
          throw SpecError("duplicate parameter '" + m.params[i] + "' on '" + m.name + "'");
    }
    if (spec.signature.index_of(m.name) != m.tag)
      throw SpecError("message '" + m.name + "' does not match the signature");
  }
  if (Signature(names) != spec.signature)
    throw SpecError("signature does not match the declared messages");

  if (!well_formed(spec.protocol, spec.signature))
    throw SpecError("protocol is not well-formed: a starred tag also occurs unstarred");
  if (is_empty(spec.protocol, spec.signature))
    throw SpecError("empty protocol: no legal way of using the object");

  for (std::size_t r = 0; r < spec.reactions.size(); ++r) {
    const Reaction& reaction = spec.reactions[r];
    const std::string where = " in reaction #" + std::to_string(r + 1);
    if (reaction.pattern.empty()) throw SpecError("empty join pattern" + where);
    int operations = 0;
    std::vector<std::string> bound;
    for (const PatternItem& item : reaction.pattern) {
      if (item.tag < 0 || item.tag >= spec.signature.size())
        throw SpecError("unknown tag" + where);
      for (const PatternItem& other : reaction.pattern)
        if (&other != &item && other.tag == item.tag)
          throw SpecError("tag '" + spec.signature.name(item.tag) + "' appears twice in pattern" + where);
      const MessageDecl& decl = spec.decl(item.tag);
      if (decl.kind == MessageKind::kOperation) ++operations;
      if (static_cast<int>(item.bindings.size()) != decl.arity())
        throw SpecError("pattern binds " + std::to_string(item.bindings.size()) + " arguments of '" +
                        decl.name + "' which has " + std::to_string(decl.arity()) + where);
      for (const std::string& b : item.bindings) {
        if (!is_identifier(b)) throw SpecError("invalid binding '" + b + "'" + where);
        for (const std::string& seen : bound)
          if (seen == b) throw SpecError("duplicate binding '" + b + "'" + where);
        bound.push_back(b);
      }
    }
    if (operations != 1)
      throw SpecError("pattern must contain exactly one operation tag, found " +
                      std::to_string(operations) + where);
    int op_tag = -1;
    for (const PatternItem& item : reaction.pattern)
      if (spec.kind(item.tag) == MessageKind::kOperation) op_tag = item.tag;
    if (reaction.operation_tag != op_tag)
      throw SpecError("reaction operation tag mismatch" + where);
    auto is_bound = [&](const std::string& name) {
      return std::find(bound.begin(), bound.end(), name) != bound.end();
    };
    for (const Action& action : reaction.body) {
      if (action.tag < 0 || action.tag >= spec.signature.size())
        throw SpecError("unknown tag in body" + where);
      const MessageDecl& decl = spec.decl(action.tag);
      if (static_cast<int>(action.args.size()) != decl.arity())
        throw SpecError("send of '" + decl.name + "' passes " + std::to_string(action.args.size()) +
                        " arguments, expected " + std::to_string(decl.arity()) + where);
      for (const std::string& a : action.args)
        if (!is_bound(a)) throw SpecError("unbound variable '" + a + "'" + where);
    }
    bool op_returns = spec.decl(op_tag).returns_value;
    if (op_returns && !reaction.return_binding)
      throw SpecError("operation '" + spec.decl(op_tag).name + "' returns a value but the reaction has no return" + where);
    if (!op_returns && reaction.return_binding)
      throw SpecError("operation '" + spec.decl(op_tag).name + "' is void but the reaction returns" + where);
    if (reaction.return_binding && !is_bound(*reaction.return_binding))
      throw SpecError("unbound variable '" + *reaction.return_binding + "' in return" + where);
  }

  for (const ConstructorSend& send : spec.constructor_sends) {
    if (send.tag < 0 || send.tag >= spec.signature.size()) throw SpecError("unknown tag in init");
    const MessageDecl& decl = spec.decl(send.tag);
    if (decl.kind != MessageKind::kState)
      throw SpecError("init sends must target state messages, '" + decl.name + "' is an operation");
    if (static_cast<int>(send.args.size()) != decl.arity())
      throw SpecError("init sends " + std::to_string(send.args.size()) + " arguments to '" +
                      decl.name + "' which has " + std::to_string(decl.arity()));
  }
}

inline ObjectSpec parse_spec(std::string_view text) {
  using detail::LineTokens;
  ObjectSpec spec;
  std::optional<std::string> protocol_text;
  int protocol_line = 0;

  struct RawPattern { std::string tag; std::vector<std::string> bindings; };
  struct RawAction { std::string tag; std::vector<std::string> args; };
  struct RawReaction {
    std::vector<RawPattern> pattern;
    std::vector<RawAction> body;
    std::optional<std::string> return_binding;
    int line;
  };
  struct RawInit { std::string tag; std::vector<Value> args; int line; };
  std::vector<RawReaction> raw_reactions;
  std::vector<RawInit> raw_inits;

  auto parse_name_list = [](LineTokens& t, auto read_item) {
    // Optional parenthesized comma-separated list; absent means zero items.
    if (!t.try_punct("(")) return;
    if (t.try_punct(")")) return;
    do {
      read_item(t);
    } while (t.try_punct(","));
    t.expect_punct(")", "to close argument list");
  };

  for (const detail::SpecLine& line : detail::split_spec_lines(text)) {
    LineTokens t(line.text, line.number);
    std::string keyword = t.expect_ident("a keyword");
    if (keyword == "object") {
      if (!spec.name.empty()) t.fail("duplicate object line");
      spec.name = t.expect_ident("an object name");
      t.expect_end();
    } else if (keyword == "protocol") {
      if (protocol_text) t.fail("duplicate protocol line");
      protocol_text = t.rest();
      protocol_line = line.number;
    } else if (keyword == "state" || keyword == "operation") {
      MessageDecl decl;
      decl.kind = keyword == "state" ? MessageKind::kState : MessageKind::kOperation;
      decl.name = t.expect_ident("a message name");
      parse_name_list(t, [&](LineTokens& tt) { decl.params.push_back(tt.expect_ident("a parameter name")); });
      if (!t.at_end()) {
        std::string word = t.expect_ident("'returns'");
        if (word != "returns") t.fail("expected 'returns', got '" + word + "'");
        std::string what = t.expect_ident("'value'");
        if (what != "value") t.fail("expected 'value', got '" + what + "'");
        decl.returns_value = true;
      }
      t.expect_end();
      spec.messages.push_back(std::move(decl));
    } else if (keyword == "reaction") {
      RawReaction reaction;
      reaction.line = line.number;
      do {
        RawPattern item;
        item.tag = t.expect_ident("a tag in the join pattern");
        parse_name_list(t, [&](LineTokens& tt) { item.bindings.push_back(tt.expect_ident("a binding name")); });
        reaction.pattern.push_back(std::move(item));
      } while (t.try_punct("&"));
      t.expect_punct("->", "between pattern and actions");
      bool first = true;
      while (!t.at_end()) {
        if (!first) t.expect_punct(",", "between actions");
        first = false;
        std::string word = t.expect_ident("a tag or 'return'");
        if (word == "return") {
          reaction.return_binding = t.expect_ident("a binding name");
          t.expect_end();
          break;
        }
        RawAction action;
        action.tag = word;
        parse_name_list(t, [&](LineTokens& tt) { action.args.push_back(tt.expect_ident("an argument name")); });
        reaction.body.push_back(std::move(action));
      }
      raw_reactions.push_back(std::move(reaction));
    } else if (keyword == "init") {
      RawInit init;
      init.line = line.number;
      init.tag = t.expect_ident("a state tag");
      parse_name_list(t, [&](LineTokens& tt) { init.args.push_back(tt.expect_literal("a literal argument")); });
      t.expect_end();
      raw_inits.push_back(std::move(init));
    } else {
      t.fail("unknown keyword '" + keyword + "'");
    }
  }

  if (spec.name.empty()) throw SpecError("missing object line");
  if (!protocol_text) throw SpecError("missing protocol line");

  std::vector<std::string> names;
  for (const MessageDecl& m : spec.messages) names.push_back(m.name);
  try {
    spec.signature = Signature(std::move(names));
  } catch (const SpecError& e) {
    throw SpecError(std::string("in message declarations: ") + e.what());
  }
  for (MessageDecl& m : spec.messages) m.tag = spec.signature.index_of(m.name);

  auto resolve = [&](const std::string& name, int line) {
    int idx = spec.signature.index_of(name);
    if (idx < 0) throw SpecError("unknown tag '" + name + "'", line);
    return idx;
  };

  try {
    spec.protocol = parse_protocol(*protocol_text, spec.signature);
  } catch (const SpecError& e) {
    throw SpecError(std::string("in protocol: ") + e.what(), protocol_line);
  }

  for (const auto& raw : raw_reactions) {
    Reaction reaction;
    for (const auto& item : raw.pattern) {
      PatternItem out;
      out.tag = resolve(item.tag, raw.line);
      out.bindings = item.bindings;
      if (spec.decl(out.tag).kind == MessageKind::kOperation) reaction.operation_tag = out.tag;
      reaction.pattern.push_back(std::move(out));
    }
    for (const auto& action : raw.body)
      reaction.body.push_back({resolve(action.tag, raw.line), action.args});
    reaction.return_binding = raw.return_binding;
    spec.reactions.push_back(std::move(reaction));
  }

  for (const auto& raw : raw_inits)
    spec.constructor_sends.push_back({resolve(raw.tag, raw.line), raw.args});

  validate_object_spec(spec);
  return spec;
}

// Canonical rendering; parse_spec(pretty_print(s)) reproduces s.
inline std::string pretty_print(const ObjectSpec& spec) {
  std::string out = "object " + spec.name + "\n";
  out += "protocol " + to_string(spec.protocol, spec.signature) + "\n";
  for (const MessageDecl& m : spec.messages) {
    out += std::string(to_string(m.kind)) + " " + m.name + "(";
    for (std::size_t i = 0; i < m.params.size(); ++i) {
      if (i) out += ", ";
      out += m.params[i];
    }
    out += ")";
    if (m.returns_value) out += " returns value";
    out += "\n";
  }
  for (const Reaction& r : spec.reactions) {
    out += "reaction ";
    for (std::size_t i = 0; i < r.pattern.size(); ++i) {
      if (i) out += " & ";
      out += spec.signature.name(r.pattern[i].tag);
      if (!r.pattern[i].bindings.empty()) {
        out += "(";
        for (std::size_t j = 0; j < r.pattern[i].bindings.size(); ++j) {
          if (j) out += ", ";
          out += r.pattern[i].bindings[j];
        }
        out += ")";
      }
    }
    out += " ->";
    bool first = true;
    for (const Action& a : r.body) {
      out += first ? " " : ", ";
      first = false;
      out += spec.signature.name(a.tag) + "(";
      for (std::size_t j = 0; j < a.args.size(); ++j) {
        if (j) out += ", ";
        out += a.args[j];
      }
      out += ")";
    }
    if (r.return_binding) {
      out += first ? " " : ", ";
      out += "return " + *r.return_binding;
    }
    out += "\n";
  }
  for (const ConstructorSend& s : spec.constructor_sends) {
    out += "init " + spec.signature.name(s.tag) + "(";
    for (std::size_t i = 0; i < s.args.size(); ++i) {
      if (i) out += ", ";
      out += s.args[i].to_string();
    }
    out += ")\n";
  }
  return out;
}

}  // namespace tsop
