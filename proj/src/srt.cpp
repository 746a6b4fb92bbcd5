#include "kwcap/srt.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <span>

#include "utf8.hpp"

namespace kwcap {

namespace {

bool parse_digits(std::string_view s, std::int64_t& out) {
    if (s.empty() || s.size() > 12) return false;
    std::int64_t v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool is_hex_color(std::string_view v) {
    if (v.size() != 7 || v[0] != '#') return false;
    return std::all_of(v.begin() + 1, v.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); });
}

enum class TagType { Italic, Bold, Font };

struct Tag {
    TagType type;
    bool closing = false;
    std::string color; // set for opening font tags
};

// `inner` is the text between '<' and '>'.
std::optional<Tag> recognize_tag(std::string_view inner) {
    const std::string t = to_lower_ascii(inner);
    if (t == "i") return Tag{TagType::Italic, false, {}};
    if (t == "/i") return Tag{TagType::Italic, true, {}};
    if (t == "b") return Tag{TagType::Bold, false, {}};
    if (t == "/b") return Tag{TagType::Bold, true, {}};
    if (t == "/font") return Tag{TagType::Font, true, {}};

    // font color="#RRGGBB", quotes optional, spaces around '=' allowed
    if (t.rfind("font", 0) != 0 || t.size() < 5 || (t[4] != ' ' && t[4] != '\t')) return std::nullopt;
    std::string_view rest = utf8::trim(std::string_view(t).substr(5));
    if (rest.rfind("color", 0) != 0) return std::nullopt;
    rest = utf8::trim(rest.substr(5));
    if (rest.empty() || rest.front() != '=') return std::nullopt;
    rest = utf8::trim(rest.substr(1));
    if (!rest.empty() && (rest.front() == '"' || rest.front() == '\'')) {
        const char q = rest.front();
        if (rest.size() < 2 || rest.back() != q) return std::nullopt;
        rest = rest.substr(1, rest.size() - 2);
    }
    if (!is_hex_color(rest)) return std::nullopt;
    std::string color(rest);
    for (auto& c : color) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return Tag{TagType::Font, false, color};
}

struct Item {
    std::string text;         // literal text (may contain '\n'), or raw tag text
    std::optional<Tag> tag;   // set for recognized tags
    bool matched = false;
    std::size_t partner = 0;  // for matched closing tags: index of the opening tag
};

bool style_has(const StyleSet& s, TagType t, const std::string& color) {
    switch (t) {
    case TagType::Italic: return s.italic;
    case TagType::Bold: return s.bold;
    case TagType::Font: return s.color && *s.color == color;
    }
    return false;
}

struct OpenTag {
    TagType type;
    std::string color;
};

std::string open_text(const OpenTag& t) {
    switch (t.type) {
    case TagType::Italic: return "<i>";
    case TagType::Bold: return "<b>";
    case TagType::Font: return "<font color=\"" + t.color + "\">";
    }
    return {};
}

std::string close_text(const OpenTag& t) {
    switch (t.type) {
    case TagType::Italic: return "</i>";
    case TagType::Bold: return "</b>";
    case TagType::Font: return "</font>";
    }
    return {};
}

} // namespace

std::optional<Timestamp> Timestamp::parse(std::string_view text) {
    text = utf8::trim(text);
    const auto c1 = text.find(':');
    if (c1 == std::string_view::npos) return std::nullopt;
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos) return std::nullopt;
    const auto sep = text.find_first_of(",.", c2 + 1);
    if (sep == std::string_view::npos) return std::nullopt;

    std::int64_t h = 0, m = 0, s = 0, ms = 0;
    const auto hs = text.substr(0, c1);
    const auto mins = text.substr(c1 + 1, c2 - c1 - 1);
    const auto secs = text.substr(c2 + 1, sep - c2 - 1);
    const auto millis = text.substr(sep + 1);
    if (!parse_digits(hs, h) || mins.size() != 2 || !parse_digits(mins, m) || secs.size() != 2 ||
        !parse_digits(secs, s) || millis.size() != 3 || !parse_digits(millis, ms)) {
        return std::nullopt;
    }
    if (m > 59 || s > 59) return std::nullopt;
    return Timestamp{((h * 60 + m) * 60 + s) * 1000 + ms};
}

std::string Timestamp::str() const {
    const std::int64_t v = ms < 0 ? 0 : ms;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld,%03lld", static_cast<long long>(v / 3600000),
                  static_cast<long long>(v / 60000 % 60), static_cast<long long>(v / 1000 % 60),
                  static_cast<long long>(v % 1000));
    return buf;
}

StyledLine StyledLine::plain(std::string text) {
    StyledLine line;
    line.append(text, {});
    return line;
}

void StyledLine::append(std::string_view text, const StyleSet& style) {
    if (text.empty()) return;
    if (!segments.empty() && segments.back().style == style) {
        segments.back().text += text;
    } else {
        segments.push_back({std::string(text), style});
    }
}

std::string StyledLine::text() const {
    std::string out;
    for (const auto& seg : segments) out += seg.text;
    return out;
}

std::string Cue::text() const {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        out += lines[i].text();
    }
    return out;
}

bool same_content(const Document& a, const Document& b) { return a.cues == b.cues; }

SrtError::SrtError(Kind kind, std::size_t block, const std::string& what)
    : std::runtime_error(what), kind_(kind), block_(block) {}

std::vector<StyledLine> parse_cue_markup(std::string_view body) {
    // Split into literal runs and tags. A tag never spans a line break.
    std::vector<Item> items;
    auto push_text = [&](std::string_view t) {
        if (t.empty()) return;
        if (!items.empty() && !items.back().tag) {
            items.back().text += t;
        } else {
            items.push_back({std::string(t), std::nullopt});
        }
    };
    std::size_t pos = 0;
    while (pos < body.size()) {
        const auto lt = body.find('<', pos);
        if (lt == std::string_view::npos) {
            push_text(body.substr(pos));
            break;
        }
        push_text(body.substr(pos, lt - pos));
        const auto gt = body.find_first_of(">\n<", lt + 1);
        if (gt == std::string_view::npos || body[gt] != '>') {
            push_text(body.substr(lt, 1));
            pos = lt + 1;
            continue;
        }
        const auto raw = body.substr(lt, gt - lt + 1);
        if (auto tag = recognize_tag(body.substr(lt + 1, gt - lt - 1))) {
            items.push_back({std::string(raw), std::move(tag)});
        } else {
            push_text(raw);
        }
        pos = gt + 1;
    }

    // Pair closing tags with the most recent open tag of the same type.
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!items[i].tag) continue;
        if (!items[i].tag->closing) {
            stack.push_back(i);
            continue;
        }
        for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
            if (items[*it].tag->type == items[i].tag->type) {
                items[*it].matched = true;
                items[i].matched = true;
                items[i].partner = *it;
                stack.erase(std::next(it).base());
                break;
            }
        }
    }

    std::vector<StyledLine> lines(1);
    std::vector<std::size_t> active; // matched opening tags in effect, oldest first
    auto current_style = [&] {
        StyleSet s;
        for (auto idx : active) {
            const auto& tag = *items[idx].tag;
            if (tag.type == TagType::Italic) s.italic = true;
            if (tag.type == TagType::Bold) s.bold = true;
            if (tag.type == TagType::Font) s.color = tag.color;
        }
        return s;
    };
    auto emit = [&](std::string_view text) {
        const StyleSet style = current_style();
        std::size_t p = 0;
        while (true) {
            const auto nl = text.find('\n', p);
            lines.back().append(text.substr(p, nl == std::string_view::npos ? nl : nl - p), style);
            if (nl == std::string_view::npos) break;
            lines.emplace_back();
            p = nl + 1;
        }
    };
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& item = items[i];
        if (!item.tag || !item.matched) {
            emit(item.text);
        } else if (!item.tag->closing) {
            active.push_back(i);
        } else {
            std::erase(active, item.partner);
        }
    }
    return lines;
}

Document parse_srt(std::string_view text) {
    Document doc;
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") {
        doc.had_bom = true;
        text.remove_prefix(3);
    }
    doc.source_newline = text.find("\r\n") != std::string_view::npos ? Newline::CRLF : Newline::LF;

    std::vector<std::string_view> lines;
    for (std::size_t pos = 0; pos <= text.size();) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        pos = nl + 1;
    }

    auto blank = [](std::string_view l) { return utf8::trim(l).empty(); };

    std::size_t block_no = 0;
    int last_index = 0;
    for (std::size_t i = 0; i < lines.size();) {
        if (blank(lines[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < lines.size() && !blank(lines[j])) ++j;
        const std::span<const std::string_view> block(lines.data() + i, j - i);
        i = j;
        ++block_no;

        std::size_t timing_line = 0;
        int index = last_index + 1;
        if (block[0].find("-->") == std::string_view::npos) {
            std::int64_t parsed = 0;
            if (block.size() < 2 || block[1].find("-->") == std::string_view::npos) {
                throw SrtError(SrtError::Kind::MalformedTimestamp, block_no,
                               "cue block " + std::to_string(block_no) + ": missing timing line");
            }
            if (!parse_digits(utf8::trim(block[0]), parsed) || parsed < 1 || parsed > 1'000'000'000) {
                throw SrtError(SrtError::Kind::MalformedIndex, block_no,
                               "cue block " + std::to_string(block_no) + ": invalid cue index '" +
                                   std::string(utf8::trim(block[0])) + "'");
            }
            index = static_cast<int>(parsed);
            timing_line = 1;
        }

        const auto timing = block[timing_line];
        const auto arrow = timing.find("-->");
        auto end_part = utf8::trim(timing.substr(arrow + 3));
        end_part = end_part.substr(0, end_part.find_first_of(" \t"));
        const auto start = Timestamp::parse(timing.substr(0, arrow));
        const auto end = Timestamp::parse(end_part);
        if (!start || !end) {
            throw SrtError(SrtError::Kind::MalformedTimestamp, block_no,
                           "cue block " + std::to_string(block_no) + ": unparseable timing line '" +
                               std::string(timing) + "'");
        }
        if (end->ms <= start->ms) {
            throw SrtError(SrtError::Kind::MalformedTimestamp, block_no,
                           "cue block " + std::to_string(block_no) + ": end time is not after start time");
        }

        std::string body;
        for (std::size_t k = timing_line + 1; k < block.size(); ++k) {
            if (k > timing_line + 1) body += '\n';
            body += block[k];
        }
        Cue cue;
        cue.index = index;
        cue.start = *start;
        cue.end = *end;
        for (auto& line : parse_cue_markup(body)) {
            if (!utf8::trim_right(line.text()).empty()) cue.lines.push_back(std::move(line));
        }
        last_index = index;
        if (!cue.lines.empty()) doc.cues.push_back(std::move(cue));
    }

    if (doc.cues.empty()) throw SrtError(SrtError::Kind::EmptyDocument, 0, "subtitle file contains no cues");

    std::stable_sort(doc.cues.begin(), doc.cues.end(),
                     [](const Cue& a, const Cue& b) { return a.start < b.start; });
    bool increasing = true;
    for (std::size_t k = 1; k < doc.cues.size(); ++k) {
        if (doc.cues[k].index <= doc.cues[k - 1].index) increasing = false;
    }
    if (!increasing) {
        for (std::size_t k = 0; k < doc.cues.size(); ++k) doc.cues[k].index = static_cast<int>(k + 1);
    }
    return doc;
}

std::string serialize_line(const StyledLine& line) {
    std::string out;
    std::vector<OpenTag> stack;
    for (const auto& seg : line.segments) {
        const auto& want = seg.style;
        std::size_t keep = 0;
        while (keep < stack.size() && style_has(want, stack[keep].type, stack[keep].color)) ++keep;
        while (stack.size() > keep) {
            out += close_text(stack.back());
            stack.pop_back();
        }
        auto has = [&](TagType t) {
            return std::any_of(stack.begin(), stack.end(), [&](const OpenTag& o) { return o.type == t; });
        };
        if (want.italic && !has(TagType::Italic)) stack.push_back({TagType::Italic, {}}), out += "<i>";
        if (want.bold && !has(TagType::Bold)) stack.push_back({TagType::Bold, {}}), out += "<b>";
        if (want.color && !has(TagType::Font)) {
            stack.push_back({TagType::Font, *want.color});
            out += open_text(stack.back());
        }
        out += seg.text;
    }
    while (!stack.empty()) {
        out += close_text(stack.back());
        stack.pop_back();
    }
    return out;
}

std::string serialize_srt(const Document& doc) {
    std::string out;
    int n = 0;
    for (const auto& cue : doc.cues) {
        out += std::to_string(++n);
        out += '\n';
        out += cue.start.str();
        out += " --> ";
        out += cue.end.str();
        out += '\n';
        for (const auto& line : cue.lines) {
            out += serialize_line(line);
            out += '\n';
        }
        out += '\n';
    }
    return out;
}

std::optional<std::string> validate(const Document& doc) {
    for (std::size_t k = 0; k < doc.cues.size(); ++k) {
        const auto& cue = doc.cues[k];
        const std::string where = "cue " + std::to_string(k + 1) + ": ";
        if (cue.index < 1) return where + "index must be positive";
        if (cue.start.ms < 0) return where + "negative start";
        if (cue.end <= cue.start) return where + "end not after start";
        if (cue.lines.empty()) return where + "no lines";
        for (const auto& line : cue.lines) {
            if (utf8::trim_right(line.text()).empty()) return where + "empty line";
            for (std::size_t s = 0; s < line.segments.size(); ++s) {
                if (line.segments[s].text.empty()) return where + "empty segment";
                if (s && line.segments[s].style == line.segments[s - 1].style) {
                    return where + "adjacent segments share a style";
                }
            }
        }
        if (k) {
            if (cue.start < doc.cues[k - 1].start) return where + "start before previous cue";
            if (cue.index <= doc.cues[k - 1].index) return where + "index not increasing";
        }
    }
    return std::nullopt;
}

} // namespace kwcap
