#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace kwcap::utf8 {

struct Decoded {
    char32_t cp = 0;
    std::size_t len = 1;
};

// Decodes one code point at `pos`. Invalid sequences decode as a single
// byte (U+FFFD, len 1) so scanning always makes progress.
Decoded decode(std::string_view text, std::size_t pos);

void append(std::string& out, char32_t cp);

std::size_t length(std::string_view text);

bool is_space(char32_t cp);
bool is_word_char(char32_t cp);
bool is_apostrophe(char32_t cp);
bool is_upper(char32_t cp);
char32_t to_lower(char32_t cp);

std::string_view trim(std::string_view s);
std::string_view trim_right(std::string_view s);

} // namespace kwcap::utf8
