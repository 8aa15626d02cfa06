#pragma once

#include <algorithm>
#include <cctype>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Protocol types: regular-expression-like terms over message tags where
// composition is shuffling, iteration is limited to single tags, and the
// constants 0 and 1 denote the empty language and the empty-trace language.

namespace tsop {

// Error raised by parsers and spec validation. Positions are 1-based;
// 0 means "not applicable".
class SpecError : public std::runtime_error {
 public:
  explicit SpecError(const std::string& msg, int line = 0, int column = 0)
      : std::runtime_error(format(msg, line, column)), line_(line), column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  static std::string format(const std::string& msg, int line, int column) {
    if (line <= 0) return msg;
    std::string out = "line " + std::to_string(line);
    if (column > 0) out += ", col " + std::to_string(column);
    return out + ": " + msg;
  }

  int line_;
  int column_;
};

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

// The ordered set of tags understood by one object. Tags are kept sorted by
// name; a tag's index in this order is used everywhere else (counter tuples,
// count vectors, transition tables).
class Signature {
 public:
  Signature() = default;

  explicit Signature(std::vector<std::string> names) : names_(std::move(names)) {
    std::sort(names_.begin(), names_.end());
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (!is_identifier(names_[i]))
        throw SpecError("invalid tag name '" + names_[i] + "'");
      if (i > 0 && names_[i] == names_[i - 1])
        throw SpecError("duplicate tag '" + names_[i] + "'");
    }
  }

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int index) const { return names_.at(static_cast<std::size_t>(index)); }
  const std::vector<std::string>& names() const { return names_; }

  // -1 when the name is not part of the signature.
  int index_of(std::string_view name) const {
    auto it = std::lower_bound(names_.begin(), names_.end(), name);
    if (it == names_.end() || *it != name) return -1;
    return static_cast<int>(it - names_.begin());
  }

  bool contains(std::string_view name) const { return index_of(name) >= 0; }

  friend bool operator==(const Signature& a, const Signature& b) = default;

 private:
  std::vector<std::string> names_;
};

// Immutable protocol term. Shares subterms; cheap to copy.
class Protocol {
 public:
  enum class Kind { kZero, kOne, kAtom, kStar, kSum, kShuffle };

  Protocol() : Protocol(zero()) {}

  static Protocol zero() { return Protocol(std::make_shared<Node>(Node{Kind::kZero, -1, nullptr, nullptr})); }
  static Protocol one() { return Protocol(std::make_shared<Node>(Node{Kind::kOne, -1, nullptr, nullptr})); }
  static Protocol atom(int tag) { return Protocol(std::make_shared<Node>(Node{Kind::kAtom, tag, nullptr, nullptr})); }
  static Protocol star(int tag) { return Protocol(std::make_shared<Node>(Node{Kind::kStar, tag, nullptr, nullptr})); }
  static Protocol sum(Protocol left, Protocol right) {
    return Protocol(std::make_shared<Node>(Node{Kind::kSum, -1, std::move(left.node_), std::move(right.node_)}));
  }
  static Protocol shuffle(Protocol left, Protocol right) {
    return Protocol(std::make_shared<Node>(Node{Kind::kShuffle, -1, std::move(left.node_), std::move(right.node_)}));
  }

  Kind kind() const { return node_->kind; }
  int tag() const { return node_->tag; }
  Protocol left() const { return Protocol(node_->left); }
  Protocol right() const { return Protocol(node_->right); }

  bool is_constant(Kind k) const { return node_->kind == k; }

  // Structural equality (not language equality; see equiv() in semantics.hpp).
  friend bool operator==(const Protocol& a, const Protocol& b) {
    if (a.node_ == b.node_) return true;
    if (!a.node_ || !b.node_) return false;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
      case Kind::kZero:
      case Kind::kOne:
        return true;
      case Kind::kAtom:
      case Kind::kStar:
        return a.tag() == b.tag();
      case Kind::kSum:
      case Kind::kShuffle:
        return a.left() == b.left() && a.right() == b.right();
    }
    return false;
  }

 private:
  struct Node {
    Kind kind;
    int tag;
    std::shared_ptr<const Node> left;
    std::shared_ptr<const Node> right;
  };

  explicit Protocol(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

namespace detail {

// Tokenizer for protocol expressions. `·` (U+00B7) and `.` are
// interchangeable; whitespace is insignificant.
class ProtocolLexer {
 public:
  struct Token {
    enum class Kind { kIdent, kZero, kOne, kStar, kPlus, kDot, kLParen, kRParen, kEnd };
    Kind kind;
    std::string text;
    int pos;  // 1-based byte position
  };

  explicit ProtocolLexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }

  Token next() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r' || text_[pos_] == '\n'))
      ++pos_;
    int at = static_cast<int>(pos_) + 1;
    if (pos_ >= text_.size()) {
      current_ = {Token::Kind::kEnd, "", at};
      return;
    }
    char c = text_[pos_];
    if (c == '0') { current_ = {Token::Kind::kZero, "0", at}; ++pos_; return; }
    if (c == '1') { current_ = {Token::Kind::kOne, "1", at}; ++pos_; return; }
    if (c == '*') { current_ = {Token::Kind::kStar, "*", at}; ++pos_; return; }
    if (c == '+') { current_ = {Token::Kind::kPlus, "+", at}; ++pos_; return; }
    if (c == '.') { current_ = {Token::Kind::kDot, ".", at}; ++pos_; return; }
    if (c == '(') { current_ = {Token::Kind::kLParen, "(", at}; ++pos_; return; }
    if (c == ')') { current_ = {Token::Kind::kRParen, ")", at}; ++pos_; return; }
    // U+00B7 middle dot, UTF-8 encoded as C2 B7.
    if (static_cast<unsigned char>(c) == 0xC2 && pos_ + 1 < text_.size() &&
        static_cast<unsigned char>(text_[pos_ + 1]) == 0xB7) {
      current_ = {Token::Kind::kDot, ".", at};
      pos_ += 2;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      current_ = {Token::Kind::kIdent, std::string(text_.substr(start, pos_ - start)), at};
      return;
    }
    throw SpecError("unexpected character '" + std::string(1, c) + "' in protocol at position " +
                    std::to_string(at));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Token current_{Token::Kind::kEnd, "", 0};
};

class ProtocolParser {
 public:
  ProtocolParser(std::string_view text, const Signature& signature)
      : lexer_(text), signature_(signature) {}

  Protocol parse() {
    Protocol e = parse_sum();
    const auto& t = lexer_.peek();
    if (t.kind != ProtocolLexer::Token::Kind::kEnd)
      throw SpecError("unexpected '" + t.text + "' in protocol at position " + std::to_string(t.pos));
    return e;
  }

 private:
  using Token = ProtocolLexer::Token;

  Protocol parse_sum() {
    Protocol e = parse_shuffle();
    while (lexer_.peek().kind == Token::Kind::kPlus) {
      lexer_.next();
      e = Protocol::sum(std::move(e), parse_shuffle());
    }
    return e;
  }

  Protocol parse_shuffle() {
    Protocol e = parse_factor();
    while (lexer_.peek().kind == Token::Kind::kDot) {
      lexer_.next();
      e = Protocol::shuffle(std::move(e), parse_factor());
    }
    return e;
  }

  Protocol parse_factor() {
    Token t = lexer_.next();
    switch (t.kind) {
      case Token::Kind::kZero:
        return Protocol::zero();
      case Token::Kind::kOne:
        return Protocol::one();
      case Token::Kind::kIdent:
        return Protocol::atom(tag_index(t));
      case Token::Kind::kStar: {
        Token inner = lexer_.next();
        if (inner.kind != Token::Kind::kIdent)
          throw SpecError("'*' applies to a single tag (position " + std::to_string(t.pos) + ")");
        return Protocol::star(tag_index(inner));
      }
      case Token::Kind::kLParen: {
        Protocol e = parse_sum();
        Token close = lexer_.next();
        if (close.kind != Token::Kind::kRParen)
          throw SpecError("expected ')' at position " + std::to_string(close.pos));
        return e;
      }
      default:
        throw SpecError("unexpected '" + (t.kind == Token::Kind::kEnd ? std::string("end of input") : t.text) +
                        "' in protocol at position " + std::to_string(t.pos));
    }
  }

  int tag_index(const Token& t) {
    int idx = signature_.index_of(t.text);
    if (idx < 0)
      throw SpecError("unknown tag '" + t.text + "' in protocol at position " + std::to_string(t.pos));
    return idx;
  }

  ProtocolLexer lexer_;
  const Signature& signature_;
};

}  // namespace detail

inline Protocol parse_protocol(std::string_view text, const Signature& signature) {
  return detail::ProtocolParser(text, signature).parse();
}

namespace detail {

inline void collect_tags(const Protocol& e, std::vector<bool>& starred, std::vector<bool>& unstarred) {
  switch (e.kind()) {
    case Protocol::Kind::kZero:
    case Protocol::Kind::kOne:
      return;
    case Protocol::Kind::kAtom:
      unstarred[static_cast<std::size_t>(e.tag())] = true;
      return;
    case Protocol::Kind::kStar:
      starred[static_cast<std::size_t>(e.tag())] = true;
      return;
    case Protocol::Kind::kSum:
    case Protocol::Kind::kShuffle:
      collect_tags(e.left(), starred, unstarred);
      collect_tags(e.right(), starred, unstarred);
      return;
  }
}

}  // namespace detail

// A protocol is well-formed when no tag occurs both starred and unstarred.
inline bool well_formed(const Protocol& e, const Signature& signature) {
  std::vector<bool> starred(static_cast<std::size_t>(signature.size()), false);
  std::vector<bool> unstarred(static_cast<std::size_t>(signature.size()), false);
  detail::collect_tags(e, starred, unstarred);
  for (int t = 0; t < signature.size(); ++t)
    if (starred[static_cast<std::size_t>(t)] && unstarred[static_cast<std::size_t>(t)]) return false;
  return true;
}

inline bool occurs_starred(const Protocol& e, int tag) {
  switch (e.kind()) {
    case Protocol::Kind::kZero:
    case Protocol::Kind::kOne:
    case Protocol::Kind::kAtom:
      return false;
    case Protocol::Kind::kStar:
      return e.tag() == tag;
    case Protocol::Kind::kSum:
    case Protocol::Kind::kShuffle:
      return occurs_starred(e.left(), tag) || occurs_starred(e.right(), tag);
  }
  return false;
}

// The derivative E[t]: traces of E with one occurrence of t removed, taken
// from the traces that have at least one. Yields a term equivalent to 0 when
// t cannot occur now. Preserves well-formedness.
inline Protocol derivative(const Protocol& e, int tag) {
  switch (e.kind()) {
    case Protocol::Kind::kZero:
    case Protocol::Kind::kOne:
      return Protocol::zero();
    case Protocol::Kind::kAtom:
      return e.tag() == tag ? Protocol::one() : Protocol::zero();
    case Protocol::Kind::kStar:
      return e.tag() == tag ? e : Protocol::zero();
    case Protocol::Kind::kSum:
      return Protocol::sum(derivative(e.left(), tag), derivative(e.right(), tag));
    case Protocol::Kind::kShuffle:
      return Protocol::sum(Protocol::shuffle(derivative(e.left(), tag), e.right()),
                           Protocol::shuffle(e.left(), derivative(e.right(), tag)));
  }
  return Protocol::zero();
}

namespace detail {

inline void print_protocol(const Protocol& e, const Signature& sig, int parent_level, std::string& out) {
  // Levels: 0 = sum, 1 = shuffle, 2 = factor.
  switch (e.kind()) {
    case Protocol::Kind::kZero:
      out += '0';
      return;
    case Protocol::Kind::kOne:
      out += '1';
      return;
    case Protocol::Kind::kAtom:
      out += sig.name(e.tag());
      return;
    case Protocol::Kind::kStar:
      out += '*';
      out += sig.name(e.tag());
      return;
    case Protocol::Kind::kSum: {
      bool parens = parent_level > 0;
      if (parens) out += '(';
      print_protocol(e.left(), sig, 0, out);
      out += " + ";
      // Parenthesize a right-nested sum so the left-associative parser
      // rebuilds the same tree.
      print_protocol(e.right(), sig, 1, out);
      if (parens) out += ')';
      return;
    }
    case Protocol::Kind::kShuffle: {
      bool parens = parent_level > 1;
      if (parens) out += '(';
      print_protocol(e.left(), sig, 1, out);
      out += " . ";
      print_protocol(e.right(), sig, 2, out);
      if (parens) out += ')';
      return;
    }
  }
}

}  // namespace detail

// ASCII rendering; parses back to the same term.
inline std::string to_string(const Protocol& e, const Signature& signature) {
  std::string out;
  detail::print_protocol(e, signature, 0, out);
  return out;
}

}  // namespace tsop
