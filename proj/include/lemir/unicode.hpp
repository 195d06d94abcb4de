#pragma once

#include <string>
#include <string_view>

// Thin helpers over ICU. All positions and lengths in this project count
// Unicode scalar values, never bytes.
namespace lemir::unicode {

/// Decodes UTF-8. Throws InvalidInput on malformed sequences.
std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view text);

char32_t to_lower(char32_t c);
char32_t to_upper(char32_t c);

/// Lowercases `c` only when uppercasing the result gives `c` back.
/// Characters whose case does not round-trip are returned unchanged.
char32_t fold(char32_t c);
std::u32string fold(std::u32string_view text);
std::string fold(std::string_view utf8);

std::string lower(std::string_view utf8);

bool is_letter_or_digit(char32_t c);
bool is_mark(char32_t c);
bool is_space(char32_t c);

std::size_t length(std::string_view utf8);

}  // namespace lemir::unicode
