#include "hpcserve/shell.hpp"

#include <cctype>

namespace hpcserve {

namespace {

bool is_safe_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '@' || c == '%' ||
         c == '+' || c == '=' || c == ':' || c == ',' || c == '.' || c == '/' || c == '-';
}

bool all_safe(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!is_safe_char(c)) return false;
  }
  return true;
}

std::string single_quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += '\'';
  return out;
}

bool is_name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

bool is_env_name(std::string_view name) {
  if (name.empty() || !is_name_start(name.front())) return false;
  for (char c : name) {
    if (!is_name_char(c)) return false;
  }
  return true;
}

std::string shell_quote(std::string_view word) {
  if (all_safe(word)) return std::string(word);
  if (word.size() > 1 && word.front() == '-') {
    const auto eq = word.find('=');
    if (eq != std::string_view::npos && eq > 0 && all_safe(word.substr(0, eq + 1))) {
      return std::string(word.substr(0, eq + 1)) + single_quote(word.substr(eq + 1));
    }
  }
  return single_quote(word);
}

std::string double_quote(std::string_view word) {
  std::string out = "\"";
  for (char c : word) {
    if (c == '"' || c == '\\' || c == '`') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string quote_expanding(std::string_view word) {
  if (word.empty()) return "\"\"";
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (word[i] == '$' && i + 1 < word.size() && word[i + 1] == '{') {
      const auto close = word.find('}', i + 2);
      if (close == std::string_view::npos || !is_env_name(word.substr(i + 2, close - i - 2)))
        return double_quote(word);
      i = close;
      continue;
    }
    if (!is_safe_char(word[i])) return double_quote(word);
  }
  return std::string(word);
}

std::string expand_env(std::string_view text,
                       const std::function<std::optional<std::string>(const std::string&)>& lookup) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '$' || i + 1 >= text.size()) {
      out += text[i];
      continue;
    }
    std::string name;
    std::size_t end = i;
    if (text[i + 1] == '{') {
      const auto close = text.find('}', i + 2);
      if (close == std::string_view::npos) {
        out += text[i];
        continue;
      }
      name = std::string(text.substr(i + 2, close - i - 2));
      end = close;
    } else if (is_name_start(text[i + 1])) {
      std::size_t j = i + 1;
      while (j < text.size() && is_name_char(text[j])) ++j;
      name = std::string(text.substr(i + 1, j - i - 1));
      end = j - 1;
    } else {
      out += text[i];
      continue;
    }
    if (auto v = lookup(name)) out += *v;
    i = end;
  }
  return out;
}

std::string join_continued(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) out += " \\\n  ";
    out += lines[i];
  }
  out += '\n';
  return out;
}

}  // namespace hpcserve
