#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kwcap {

/// Milliseconds since the start of the media.
struct Timestamp {
    std::int64_t ms = 0;

    auto operator<=>(const Timestamp&) const = default;

    /// Parses `HH:MM:SS,mmm`. Hours may have more than two digits; a `.`
    /// millisecond separator is tolerated. Returns nullopt on any other form.
    static std::optional<Timestamp> parse(std::string_view text);

    /// Formats as `HH:MM:SS,mmm`, zero padded.
    std::string str() const;
};

struct StyleSet {
    bool italic = false;
    bool bold = false;
    std::optional<std::string> color; // "#RRGGBB", upper-case hex

    bool operator==(const StyleSet&) const = default;
    bool plain() const { return !italic && !bold && !color; }
};

struct Segment {
    std::string text;
    StyleSet style;

    bool operator==(const Segment&) const = default;
};

/// One visible line of a cue. Segments are never empty and adjacent segments
/// never share a style; `append` maintains both.
struct StyledLine {
    std::vector<Segment> segments;

    static StyledLine plain(std::string text);

    void append(std::string_view text, const StyleSet& style);

    /// Visible text with markup removed.
    std::string text() const;

    bool operator==(const StyledLine&) const = default;
};

struct Cue {
    int index = 0;
    Timestamp start;
    Timestamp end;
    std::vector<StyledLine> lines;

    std::int64_t duration_ms() const { return end.ms - start.ms; }

    /// Visible text, lines joined with '\n'.
    std::string text() const;

    bool operator==(const Cue&) const = default;
};

enum class Newline { LF, CRLF };

struct Document {
    std::vector<Cue> cues;
    Newline source_newline = Newline::LF;
    bool had_bom = false;

    bool operator==(const Document&) const = default;
};

/// Cue-for-cue equality, ignoring the recorded newline flavor and BOM.
bool same_content(const Document& a, const Document& b);

class SrtError : public std::runtime_error {
public:
    enum class Kind { MalformedTimestamp, MalformedIndex, EmptyDocument };

    SrtError(Kind kind, std::size_t block, const std::string& what);

    Kind kind() const { return kind_; }
    /// 1-based ordinal of the offending cue block; 0 for EmptyDocument.
    std::size_t block() const { return block_; }

private:
    Kind kind_;
    std::size_t block_;
};

/// Parses SubRip text. Cues are sorted by start time (stable); source indices
/// are kept when they are strictly increasing after sorting, otherwise cues
/// are renumbered from 1. Blocks whose text is empty are dropped.
Document parse_srt(std::string_view text);

/// Serializes with LF newlines, no BOM, indices renumbered 1..n and
/// canonical tags (`<i>`, `<b>`, `<font color="#RRGGBB">`).
std::string serialize_srt(const Document& doc);

std::string serialize_line(const StyledLine& line);

/// Parses the styling markup of a cue body (lines separated by '\n').
/// Unknown or unbalanced tags are kept as literal text.
std::vector<StyledLine> parse_cue_markup(std::string_view body);

/// Checks the Document invariants; returns a description of the first
/// violation, or nullopt.
std::optional<std::string> validate(const Document& doc);

} // namespace kwcap
