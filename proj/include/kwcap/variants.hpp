#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kwcap/alignment.hpp"
#include "kwcap/lexicon.hpp"
#include "kwcap/srt.hpp"
#include "kwcap/tokenizer.hpp"

namespace kwcap {

enum class Variant { Standard, KeywordHighlights, TimedKeywords, TimedKeywordHighlights };

/// CLI name: standard, kw, timedkw, timedhl.
std::string_view variant_name(Variant v);
std::optional<Variant> parse_variant(std::string_view name);
/// Output file suffix, e.g. ".timedkw.srt".
std::string variant_suffix(Variant v);
bool is_timed(Variant v);

struct VariantParams {
    std::string highlight_color = "#FFFF00";
    std::int64_t min_display_ms = 500;
    std::int64_t extension_ms = 300;
    Variant variant = Variant::Standard;

    /// Throws std::invalid_argument when a field is out of range. The
    /// color is normalized to upper-case "#RRGGBB".
    VariantParams validated() const;
};

class MissingTiming : public std::runtime_error {
public:
    explicit MissingTiming(TokenPosition pos);
    const TokenPosition& position() const { return pos_; }

private:
    TokenPosition pos_;
};

/// A generated cue tagged with the source cue (ordinal) it came from.
struct SourcedCue {
    Cue cue;
    std::size_t source = 0;
};

/// Truncates each cue at the start of the next cue from a different source
/// that begins before it ends; drops cues left with zero duration. Input must
/// be sorted by start.
std::vector<SourcedCue> resolve_overlaps(std::vector<SourcedCue> cues);

/// Copy of `line` with the given spans recolored.
StyledLine highlight_spans(const StyledLine& line, const std::vector<CharSpan>& spans, const std::string& color);

Document gen_standard(const Document& doc);

Document gen_keyword_highlights(const Document& doc, const KeywordAnnotation& ann, const VariantParams& params);

/// A keyword-only cue before serialization, with the bookkeeping needed to
/// audit the display-extension rule.
struct KeywordCue {
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    std::size_t source = 0;
    std::vector<TokenPosition> members; // token order
    std::vector<std::string> words;
    std::int64_t spoken_end_ms = 0;     // latest unextended offset among members
};

std::vector<KeywordCue> plan_timed_keywords(const Document& doc, const KeywordAnnotation& ann,
                                            const WordTiming& timing, const VariantParams& params);

Document gen_timed_keywords(const Document& doc, const KeywordAnnotation& ann, const WordTiming& timing,
                            const VariantParams& params);

/// Sub-cues of one source cue, each with the onset-clamped keywords it
/// highlights.
struct HighlightSplit {
    std::size_t source = 0;
    std::vector<std::int64_t> bounds;                   // sub-cue k spans [bounds[k], bounds[k+1])
    std::vector<std::vector<TokenPosition>> highlighted; // per sub-cue
};

std::vector<HighlightSplit> plan_timed_highlights(const Document& doc, const KeywordAnnotation& ann,
                                                  const WordTiming& timing, const VariantParams& params);

Document gen_timed_keyword_highlights(const Document& doc, const KeywordAnnotation& ann, const WordTiming& timing,
                                      const VariantParams& params);

/// Dispatches on params.variant.
Document generate(const Document& doc, const KeywordAnnotation& ann, const WordTiming& timing,
                  const VariantParams& params);

} // namespace kwcap
