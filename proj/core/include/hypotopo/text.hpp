#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hypotopo {

/// Canonical form used for equivalence testing: ASCII lowercase, whitespace
/// runs collapsed to one space and trimmed, decimal numerals rewritten without
/// leading/trailing zeros, no spaces around arithmetic operators, trailing
/// sentence punctuation dropped. Idempotent.
std::string canonicalize(std::string_view text);

/// Whitespace-separated tokens of a canonical string.
std::vector<std::string> canon_tokens(std::string_view canon);

/// Canonical decimal spelling if `s` (after trimming) is a plain number such as
/// "-007.50"; nullopt otherwise.
std::optional<std::string> canonical_number(std::string_view s);

/// `head = value` view of a canonical step: the text before the last '=' and a
/// numeric right-hand side. Used by the rule-based relation labels and by the
/// numeric consistency check.
struct Assignment {
  std::string head;
  std::string value;
};
std::optional<Assignment> parse_assignment(std::string_view canon);

/// 64-bit FNV-1a. Stable across runs and platforms.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string canon_hash(std::string_view canon);

std::string trim(std::string_view s);

}  // namespace hypotopo
