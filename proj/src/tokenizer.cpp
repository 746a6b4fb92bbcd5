#include "kwcap/tokenizer.hpp"

#include <optional>

#include "utf8.hpp"

namespace kwcap {

std::string normalize_form(std::string_view surface) {
    std::string out;
    out.reserve(surface.size());
    for (std::size_t pos = 0; pos < surface.size();) {
        const auto d = utf8::decode(surface, pos);
        if (d.cp == 0xFFFD && d.len == 1) {
            out.push_back(surface[pos]);
        } else if (d.cp == 0x2019) {
            out.push_back('\'');
        } else {
            utf8::append(out, utf8::to_lower(d.cp));
        }
        pos += d.len;
    }
    return out;
}

bool has_digit(std::string_view s) {
    for (char c : s) {
        if (c >= '0' && c <= '9') return true;
    }
    return false;
}

namespace {

char32_t closer_for(char32_t open) { return open == '[' ? ']' : ')'; }

std::size_t end_without_trailing_space(std::string_view text) { return utf8::trim_right(text).size(); }

bool ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

// End of a tag-shaped span `<name ...>`, `</name>` or `{\...}` at pos.
std::optional<std::size_t> literal_markup_end(std::string_view text, std::size_t pos) {
    if (text[pos] == '<') {
        std::size_t name = pos + 1;
        if (name < text.size() && text[name] == '/') ++name;
        if (name >= text.size() || !ascii_alpha(text[name])) return std::nullopt;
        const auto close = text.find_first_of("<>", name);
        if (close == std::string_view::npos || text[close] != '>') return std::nullopt;
        return close + 1;
    }
    if (text[pos] == '{' && pos + 1 < text.size() && text[pos + 1] == '\\') {
        const auto close = text.find('}', pos + 2);
        if (close == std::string_view::npos) return std::nullopt;
        return close + 1;
    }
    return std::nullopt;
}

} // namespace

std::vector<Token> tokenize_cue(const Cue& cue, std::size_t cue_ordinal) {
    std::vector<Token> tokens;
    std::vector<std::string> texts;
    texts.reserve(cue.lines.size());
    for (const auto& line : cue.lines) texts.push_back(line.text());

    // Set while a bracketed annotation continues onto following lines.
    std::optional<char> open_bracket;

    for (std::size_t li = 0; li < texts.size(); ++li) {
        const std::string_view text = texts[li];
        auto push = [&](std::size_t b, std::size_t e, TokenKind kind) {
            Token t;
            t.pos = {cue_ordinal, li, {b, e}};
            t.surface = std::string(text.substr(b, e - b));
            t.normalized = normalize_form(t.surface);
            t.kind = kind;
            tokens.push_back(std::move(t));
        };

        bool at_line_start = true;
        std::size_t pos = 0;
        while (pos < text.size()) {
            const auto d = utf8::decode(text, pos);
            if (utf8::is_space(d.cp)) {
                pos += d.len;
                continue;
            }

            if (open_bracket) {
                const auto close = text.find(*open_bracket, pos);
                if (close != std::string_view::npos) {
                    push(pos, close + 1, TokenKind::SoundDescription);
                    pos = close + 1;
                    open_bracket.reset();
                } else {
                    push(pos, end_without_trailing_space(text), TokenKind::SoundDescription);
                    pos = text.size();
                }
                at_line_start = false;
                continue;
            }

            if (at_line_start && d.cp == '-' &&
                (pos + 1 == text.size() || utf8::is_space(utf8::decode(text, pos + 1).cp))) {
                push(pos, pos + 1, TokenKind::SpeakerLabel);
                pos += 1;
                at_line_start = false;
                continue;
            }
            at_line_start = false;

            // Markup kept as literal text (unknown tags, override blocks) is
            // a single non-word token.
            if (const auto end = literal_markup_end(text, pos)) {
                push(pos, *end, TokenKind::Punctuation);
                pos = *end;
                continue;
            }

            if (d.cp == '[' || d.cp == '(') {
                const char closer = static_cast<char>(closer_for(d.cp));
                const auto close = text.find(closer, pos + 1);
                if (close != std::string_view::npos) {
                    push(pos, close + 1, TokenKind::SoundDescription);
                    pos = close + 1;
                    continue;
                }
                bool closes_later = false;
                for (std::size_t k = li + 1; k < texts.size() && !closes_later; ++k) {
                    closes_later = texts[k].find(closer) != std::string::npos;
                }
                if (closes_later) {
                    push(pos, end_without_trailing_space(text), TokenKind::SoundDescription);
                    pos = text.size();
                    open_bracket = closer;
                    continue;
                }
                push(pos, pos + 1, TokenKind::Punctuation);
                pos += 1;
                continue;
            }

            if (utf8::is_word_char(d.cp)) {
                std::size_t end = pos + d.len;
                while (end < text.size()) {
                    const auto next = utf8::decode(text, end);
                    if (utf8::is_word_char(next.cp)) {
                        end += next.len;
                        continue;
                    }
                    // Apostrophes and hyphens join only when a word character follows.
                    if ((utf8::is_apostrophe(next.cp) || next.cp == '-') && end + next.len < text.size() &&
                        utf8::is_word_char(utf8::decode(text, end + next.len).cp)) {
                        end += next.len;
                        continue;
                    }
                    break;
                }
                push(pos, end, TokenKind::Word);
                pos = end;
                continue;
            }

            push(pos, pos + d.len, TokenKind::Punctuation);
            pos += d.len;
        }
    }
    return tokens;
}

std::vector<Token> tokenize(const Document& doc) {
    std::vector<Token> tokens;
    for (std::size_t i = 0; i < doc.cues.size(); ++i) {
        auto cue_tokens = tokenize_cue(doc.cues[i], i);
        tokens.insert(tokens.end(), std::make_move_iterator(cue_tokens.begin()),
                      std::make_move_iterator(cue_tokens.end()));
    }
    return tokens;
}

} // namespace kwcap
