#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

// Message payload values: the DSL is untyped, so runtime arguments, literal
// constructor arguments and simulator script literals all share this small
// value type (unit, bool, integer, string).

namespace tsop {

class Value {
 public:
  Value() = default;  // unit

  static Value unit() { return Value(); }
  static Value of_bool(bool b) { return Value(Repr(b)); }
  static Value of_int(std::int64_t n) { return Value(Repr(n)); }
  static Value of_string(std::string s) { return Value(Repr(std::move(s))); }

  bool is_unit() const { return std::holds_alternative<std::monostate>(v_); }
  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_string() const { return std::holds_alternative<std::string>(v_); }

  bool as_bool() const { return std::get<bool>(v_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
  const std::string& as_string() const { return std::get<std::string>(v_); }

  std::string to_string() const {
    if (is_unit()) return "unit";
    if (is_bool()) return as_bool() ? "true" : "false";
    if (is_int()) return std::to_string(as_int());
    std::string out = "\"";
    for (char c : as_string()) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + "\"";
  }

  // Literals: integers (optionally signed), quoted strings with escaped
  // quotes and backslashes, true/false, unit. Nullopt on malformed input.
  static std::optional<Value> parse_literal(std::string_view text) {
    if (text == "unit") return unit();
    if (text == "true") return of_bool(true);
    if (text == "false") return of_bool(false);
    if (!text.empty() && text.front() == '"') {
      if (text.size() < 2 || text.back() != '"') return std::nullopt;
      std::string out;
      for (std::size_t i = 1; i + 1 < text.size(); ++i) {
        char c = text[i];
        if (c == '\\') {
          if (i + 2 >= text.size()) return std::nullopt;
          c = text[++i];
          if (c != '"' && c != '\\') return std::nullopt;
        }
        out += c;
      }
      return of_string(std::move(out));
    }
    if (text.empty()) return std::nullopt;
    std::size_t i = (text[0] == '-') ? 1 : 0;
    if (i == text.size()) return std::nullopt;
    for (std::size_t j = i; j < text.size(); ++j)
      if (text[j] < '0' || text[j] > '9') return std::nullopt;
    try {
      return of_int(std::stoll(std::string(text)));
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  friend bool operator==(const Value&, const Value&) = default;

 private:
  using Repr = std::variant<std::monostate, bool, std::int64_t, std::string>;
  explicit Value(Repr v) : v_(std::move(v)) {}
  Repr v_;
};

}  // namespace tsop
