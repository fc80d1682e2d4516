#include "openden/cli/toml.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

#include "openden/error.hpp"

namespace openden::cli {
namespace {

struct Cursor {
  const std::string& s;
  std::size_t pos = 0;
  const std::string& source;
  std::size_t line;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(source + ":" + std::to_string(line) + ": " + what);
  }
  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  bool done() const { return pos >= s.size(); }
  char peek() const { return done() ? '\0' : s[pos]; }
};

bool bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string parse_string(Cursor& c) {
  ++c.pos;  // opening quote
  std::string out;
  while (!c.done() && c.peek() != '"') {
    char ch = c.s[c.pos++];
    if (ch == '\\') {
      if (c.done()) c.fail("unterminated escape");
      const char e = c.s[c.pos++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        default: c.fail(std::string("unsupported escape \\") + e);
      }
    } else {
      out.push_back(ch);
    }
  }
  if (c.done()) c.fail("unterminated string");
  ++c.pos;
  return out;
}

std::variant<std::int64_t, double> parse_number(Cursor& c) {
  const std::size_t start = c.pos;
  while (!c.done() && (std::isalnum(static_cast<unsigned char>(c.peek())) || c.peek() == '.' ||
                       c.peek() == '+' || c.peek() == '-' || c.peek() == '_')) {
    ++c.pos;
  }
  std::string tok;
  for (std::size_t i = start; i < c.pos; ++i) {
    if (c.s[i] != '_') tok.push_back(c.s[i]);
  }
  if (tok.empty()) c.fail("expected a value");
  if (tok[0] == '+') tok.erase(0, 1);
  const bool is_float = tok.find_first_of(".eE") != std::string::npos;
  if (!is_float) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec == std::errc{} && p == tok.data() + tok.size()) return v;
  } else {
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec == std::errc{} && p == tok.data() + tok.size()) return v;
  }
  c.fail("cannot parse value '" + tok + "'");
}

TomlValue parse_value(Cursor& c) {
  c.skip_ws();
  const char ch = c.peek();
  if (ch == '"') return parse_string(c);
  if (c.s.compare(c.pos, 4, "true") == 0) {
    c.pos += 4;
    return true;
  }
  if (c.s.compare(c.pos, 5, "false") == 0) {
    c.pos += 5;
    return false;
  }
  if (ch == '[') {
    ++c.pos;
    TomlArray arr;
    for (;;) {
      c.skip_ws();
      if (c.peek() == ']') {
        ++c.pos;
        break;
      }
      if (c.peek() == '"') {
        arr.emplace_back(parse_string(c));
      } else {
        auto n = parse_number(c);
        if (std::holds_alternative<std::int64_t>(n)) {
          arr.emplace_back(std::get<std::int64_t>(n));
        } else {
          arr.emplace_back(std::get<double>(n));
        }
      }
      c.skip_ws();
      if (c.peek() == ',') {
        ++c.pos;
      } else if (c.peek() != ']') {
        c.fail("expected ',' or ']' in array");
      }
    }
    return arr;
  }
  auto n = parse_number(c);
  if (std::holds_alternative<std::int64_t>(n)) return std::get<std::int64_t>(n);
  return std::get<double>(n);
}

void strip_comment(Cursor& c) {
  c.skip_ws();
  if (c.peek() == '#') c.pos = c.s.size();
  if (!c.done()) c.fail("unexpected trailing text");
}

}  // namespace

TomlDocument parse_toml(const std::string& text, const std::string& source) {
  TomlDocument doc;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    Cursor c{raw, 0, source, line_no};
    c.skip_ws();
    if (c.done() || c.peek() == '#') continue;
    if (c.peek() == '[') {
      ++c.pos;
      c.skip_ws();
      const std::size_t start = c.pos;
      while (!c.done() && (bare_key_char(c.peek()) || c.peek() == '.')) ++c.pos;
      section = raw.substr(start, c.pos - start);
      c.skip_ws();
      if (section.empty() || c.peek() != ']') c.fail("malformed section header");
      ++c.pos;
      strip_comment(c);
      doc[section];
      continue;
    }
    const std::size_t start = c.pos;
    while (!c.done() && bare_key_char(c.peek())) ++c.pos;
    const std::string key = raw.substr(start, c.pos - start);
    if (key.empty()) c.fail("expected a key");
    c.skip_ws();
    if (c.peek() != '=') c.fail("expected '=' after key '" + key + "'");
    ++c.pos;
    TomlValue value = parse_value(c);
    strip_comment(c);
    auto& table = doc[section];
    if (table.count(key)) c.fail("duplicate key '" + key + "'");
    table.emplace(key, TomlEntry{std::move(value), line_no});
  }
  return doc;
}

}  // namespace openden::cli
