#include "lemir/unicode.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "lemir/errors.hpp"

namespace lemir::unicode {

std::u32string decode(std::string_view utf8)
{
    std::u32string out;
    out.reserve(utf8.size());
    const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
    const auto size = static_cast<int32_t>(utf8.size());
    int32_t i = 0;
    while (i < size) {
        UChar32 c;
        U8_NEXT(bytes, i, size, c);
        if (c < 0) {
            throw InvalidInput("invalid UTF-8 at byte " + std::to_string(i - 1));
        }
        out.push_back(static_cast<char32_t>(c));
    }
    return out;
}

std::string encode(std::u32string_view text)
{
    std::string out;
    out.reserve(text.size());
    for (char32_t c : text) {
        uint8_t buf[U8_MAX_LENGTH];
        int32_t n = 0;
        UBool error = false;
        U8_APPEND(buf, n, U8_MAX_LENGTH, static_cast<UChar32>(c), error);
        if (error) {
            throw InvalidInput("not a Unicode scalar value: " + std::to_string(static_cast<uint32_t>(c)));
        }
        out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
    }
    return out;
}

char32_t to_lower(char32_t c) { return static_cast<char32_t>(u_tolower(static_cast<UChar32>(c))); }

char32_t to_upper(char32_t c) { return static_cast<char32_t>(u_toupper(static_cast<UChar32>(c))); }

char32_t fold(char32_t c)
{
    const char32_t lo = to_lower(c);
    return (lo != c && to_upper(lo) == c) ? lo : c;
}

std::u32string fold(std::u32string_view text)
{
    std::u32string out(text);
    for (auto& c : out) {
        c = fold(c);
    }
    return out;
}

std::string fold(std::string_view utf8) { return encode(fold(decode(utf8))); }

std::string lower(std::string_view utf8)
{
    auto text = decode(utf8);
    for (auto& c : text) {
        c = to_lower(c);
    }
    return encode(text);
}

bool is_letter_or_digit(char32_t c)
{
    const auto cp = static_cast<UChar32>(c);
    return u_isalpha(cp) || u_isdigit(cp);
}

bool is_mark(char32_t c)
{
    return (U_GET_GC_MASK(static_cast<UChar32>(c)) & U_GC_M_MASK) != 0;
}

bool is_space(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); }

std::size_t length(std::string_view utf8) { return decode(utf8).size(); }

}  // namespace lemir::unicode
