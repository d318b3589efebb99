#include "hypotopo/text.hpp"

#include <cctype>
#include <cstdio>

namespace hypotopo {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_operator(char c) {
  switch (c) {
    case '+': case '-': case '*': case '/': case '=': case '^': case '<': case '>': case '%':
      return true;
    default:
      return false;
  }
}
bool is_trailing_punct(char c) { return c == '.' || c == ',' || c == ';' || c == '!'; }

// Strips leading zeros of the integer part and trailing zeros of the fraction.
std::string normalize_numeral(std::string_view digits) {
  auto dot = digits.find('.');
  std::string_view int_part = digits.substr(0, dot);
  std::string_view frac_part = dot == std::string_view::npos ? std::string_view{} : digits.substr(dot + 1);
  while (int_part.size() > 1 && int_part.front() == '0') int_part.remove_prefix(1);
  while (!frac_part.empty() && frac_part.back() == '0') frac_part.remove_suffix(1);
  std::string out(int_part);
  if (!frac_part.empty()) {
    out += '.';
    out += frac_part;
  }
  return out;
}

std::string canonicalize_once(std::string_view text) {
  // lowercase + whitespace collapse
  std::string collapsed;
  collapsed.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !collapsed.empty();
      continue;
    }
    if (pending_space) collapsed += ' ';
    pending_space = false;
    collapsed += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }

  // numerals
  std::string numerals;
  numerals.reserve(collapsed.size());
  for (std::size_t i = 0; i < collapsed.size();) {
    if (!is_digit(collapsed[i])) {
      numerals += collapsed[i++];
      continue;
    }
    std::size_t j = i;
    while (j < collapsed.size() && is_digit(collapsed[j])) ++j;
    if (j + 1 < collapsed.size() && collapsed[j] == '.' && is_digit(collapsed[j + 1])) {
      ++j;
      while (j < collapsed.size() && is_digit(collapsed[j])) ++j;
    }
    numerals += normalize_numeral(std::string_view(collapsed).substr(i, j - i));
    i = j;
  }

  // operator spacing
  std::string out;
  out.reserve(numerals.size());
  for (std::size_t i = 0; i < numerals.size(); ++i) {
    char c = numerals[i];
    if (c == ' ') {
      bool before_op = i + 1 < numerals.size() && is_operator(numerals[i + 1]);
      bool after_op = !out.empty() && is_operator(out.back());
      if (before_op || after_op) continue;
    }
    out += c;
  }

  while (!out.empty() && (is_trailing_punct(out.back()) || out.back() == ' ')) out.pop_back();
  return out;
}

}  // namespace

std::string canonicalize(std::string_view text) {
  // Each pass either leaves the string unchanged or shortens it, so iterating
  // to a fixed point terminates and makes the function idempotent.
  std::string current = canonicalize_once(text);
  for (;;) {
    std::string next = canonicalize_once(current);
    if (next == current) return current;
    current = std::move(next);
  }
}

std::vector<std::string> canon_tokens(std::string_view canon) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < canon.size()) {
    while (i < canon.size() && is_space(canon[i])) ++i;
    std::size_t j = i;
    while (j < canon.size() && !is_space(canon[j])) ++j;
    if (j > i) tokens.emplace_back(canon.substr(i, j - i));
    i = j;
  }
  return tokens;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::optional<std::string> canonical_number(std::string_view raw) {
  std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  bool negative = false;
  std::size_t i = 0;
  if (s[0] == '-' || s[0] == '+') {
    negative = s[0] == '-';
    i = 1;
  }
  std::size_t digits_start = i;
  while (i < s.size() && is_digit(s[i])) ++i;
  if (i == digits_start) return std::nullopt;
  if (i < s.size() && s[i] == '.') {
    ++i;
    std::size_t frac_start = i;
    while (i < s.size() && is_digit(s[i])) ++i;
    if (i == frac_start) return std::nullopt;
  }
  if (i != s.size()) return std::nullopt;
  std::string body = normalize_numeral(std::string_view(s).substr(digits_start));
  if (body == "0") negative = false;
  return negative ? "-" + body : body;
}

std::optional<Assignment> parse_assignment(std::string_view canon) {
  auto eq = canon.rfind('=');
  if (eq == std::string_view::npos || eq == 0) return std::nullopt;
  std::string lhs = trim(canon.substr(0, eq));
  std::string rhs = trim(canon.substr(eq + 1));
  if (lhs.empty() || rhs.empty()) return std::nullopt;
  auto lhs_tokens = canon_tokens(lhs);
  auto rhs_tokens = canon_tokens(rhs);
  if (lhs_tokens.empty() || rhs_tokens.empty()) return std::nullopt;
  auto value = canonical_number(rhs_tokens.front());
  if (!value) return std::nullopt;
  return Assignment{lhs_tokens.back(), *value};
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string canon_hash(std::string_view canon) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canon)));
  return buf;
}

}  // namespace hypotopo
