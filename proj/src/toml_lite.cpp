#include "skewlie/toml_lite.hpp"

#include <cctype>
#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <vector>

#include "skewlie/errors.hpp"

namespace skewlie {
namespace {

class LineParser {
 public:
  LineParser(const std::string& text, int line) : s_(text), line_(line) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config line " + std::to_string(line_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  bool at_end_or_comment() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string key() {
    skip_ws();
    if (peek() == '"') return basic_string();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '-'))
      ++pos_;
    if (pos_ == start) fail("expected a key");
    return s_.substr(start, pos_ - start);
  }

  std::string basic_string() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) break;
        switch (s_[pos_++]) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail("unsupported escape");
        }
      }
      out.push_back(c);
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  nlohmann::json value() {
    skip_ws();
    const char c = peek();
    if (c == '"') return basic_string();
    if (c == '[') {
      ++pos_;
      nlohmann::json arr = nlohmann::json::array();
      skip_ws();
      if (peek() == ']') {
        ++pos_;
        return arr;
      }
      for (;;) {
        arr.push_back(value());
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          skip_ws();
          if (peek() == ']') {
            ++pos_;
            return arr;
          }
          continue;
        }
        if (peek() == ']') {
          ++pos_;
          return arr;
        }
        fail("expected ',' or ']' in array");
      }
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '#' && s_[pos_] != ' ' &&
           s_[pos_] != '\t')
      ++pos_;
    std::string tok = s_.substr(start, pos_ - start);
    if (tok == "true") return true;
    if (tok == "false") return false;
    if (tok.empty()) fail("missing value");
    std::erase(tok, '_');
    if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
    if (tok == "-inf") return -std::numeric_limits<double>::infinity();
    const bool is_float = tok.find_first_of(".eE") != std::string::npos;
    const char* first = tok.data() + (tok[0] == '+' ? 1 : 0);
    const char* last = tok.data() + tok.size();
    if (!is_float) {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(first, last, v);
      if (ec == std::errc() && p == last) return v;
    } else {
      double v = 0;
      auto [p, ec] = std::from_chars(first, last, v);
      if (ec == std::errc() && p == last) return v;
    }
    fail("cannot parse value '" + tok + "'");
  }

 private:
  const std::string& s_;
  int line_;
  std::size_t pos_ = 0;
};

nlohmann::json* descend(nlohmann::json& root, const std::vector<std::string>& path, const LineParser& p) {
  nlohmann::json* node = &root;
  for (const auto& k : path) {
    if (!node->contains(k)) (*node)[k] = nlohmann::json::object();
    node = &(*node)[k];
    if (!node->is_object()) p.fail("'" + k + "' is not a table");
  }
  return node;
}

}  // namespace

nlohmann::json parse_toml(std::istream& is) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* table = &root;
  std::string text;
  int line = 0;
  while (std::getline(is, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    LineParser p(text, line);
    if (p.at_end_or_comment()) continue;
    if (p.peek() == '[') {
      p.expect('[');
      std::vector<std::string> path{p.key()};
      p.skip_ws();
      while (p.peek() == '.') {
        p.expect('.');
        path.push_back(p.key());
        p.skip_ws();
      }
      p.expect(']');
      if (!p.at_end_or_comment()) p.fail("trailing characters after table header");
      table = descend(root, path, p);
      continue;
    }
    std::vector<std::string> path{p.key()};
    p.skip_ws();
    while (p.peek() == '.') {
      p.expect('.');
      path.push_back(p.key());
      p.skip_ws();
    }
    p.expect('=');
    nlohmann::json v = p.value();
    if (!p.at_end_or_comment()) p.fail("trailing characters after value");
    const std::string leaf = path.back();
    path.pop_back();
    nlohmann::json* target = descend(*table, path, p);
    if (target->contains(leaf)) p.fail("duplicate key '" + leaf + "'");
    (*target)[leaf] = std::move(v);
  }
  return root;
}

nlohmann::json parse_toml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_toml(in);
}

}  // namespace skewlie
