#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "kwcap/srt.hpp"

namespace kwcap {

enum class TokenKind { Word, Punctuation, SoundDescription, SpeakerLabel };

/// Byte offsets [begin, end) into the visible text of a line.
struct CharSpan {
    std::size_t begin = 0;
    std::size_t end = 0;

    auto operator<=>(const CharSpan&) const = default;
};

/// Identifies a token: cue ordinal in the Document (0-based, not the SubRip
/// index), line within the cue, and span within the line.
struct TokenPosition {
    std::size_t cue = 0;
    std::size_t line = 0;
    CharSpan span;

    auto operator<=>(const TokenPosition&) const = default;
};

struct Token {
    TokenPosition pos;
    std::string surface;
    std::string normalized;
    TokenKind kind = TokenKind::Word;
};

/// Lower-cases and maps U+2019 to an ASCII apostrophe.
std::string normalize_form(std::string_view surface);

bool has_digit(std::string_view s);

std::vector<Token> tokenize_cue(const Cue& cue, std::size_t cue_ordinal);

/// Tokens of every line of every cue, in document order.
std::vector<Token> tokenize(const Document& doc);

} // namespace kwcap
