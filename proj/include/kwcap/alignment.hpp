#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kwcap/srt.hpp"
#include "kwcap/tokenizer.hpp"

namespace kwcap {

enum class AlignStatus { Success, NotFoundInAudio };

/// One word of a forced-alignment transcript; times in seconds.
struct AlignedWord {
    std::string word;
    double start_s = 0.0;
    double end_s = 0.0;
    AlignStatus status = AlignStatus::Success;

    bool operator==(const AlignedWord&) const = default;
};

class AlignmentError : public std::runtime_error {
public:
    AlignmentError(std::optional<std::size_t> word_index, const std::string& what);

    /// Index into the `words` array, when the problem is tied to one entry.
    std::optional<std::size_t> word_index() const { return word_index_; }

private:
    std::optional<std::size_t> word_index_;
};

/// Reads `{"words": [{"word", "case", "start", "end"}, ...]}`. Extra fields
/// are ignored; `case` must be "success" or "not-found-in-audio".
std::vector<AlignedWord> parse_alignment(std::string_view json_text);

enum class TimingSource { Aligned, Interpolated, Proportional };
std::string_view to_string(TimingSource source);

struct WordTime {
    std::int64_t onset_ms = 0;
    std::int64_t offset_ms = 0;
    TimingSource source = TimingSource::Proportional;

    bool operator==(const WordTime&) const = default;
};

/// Timing for every Word token, keyed by token position.
using WordTiming = std::map<TokenPosition, WordTime>;

struct AlignmentOptions {
    std::size_t window = 10;        // recovery search radius, in aligned words
    double min_match_ratio = 0.2;   // below this the alignment is discarded
    std::int64_t slack_ms = 1000;   // allowed drift outside the cue span
};

struct AlignmentResult {
    WordTiming timing;
    std::size_t word_tokens = 0;
    std::size_t matched = 0;  // tokens paired with an aligned word
    double match_ratio = 0.0; // matched / max(word tokens, aligned words)
    bool fell_back = false;   // whole document timed proportionally
};

/// Rounds half up.
std::int64_t seconds_to_ms(double seconds);

/// Splits `total_ms` among `weights` proportionally: floor shares, the
/// remainder to the last element, every share at least 1 ms when
/// total_ms >= weights.size().
std::vector<std::int64_t> split_by_weight(std::int64_t total_ms, const std::vector<std::size_t>& weights);

/// Within each cue, Word tokens share the cue duration in proportion to their
/// length in characters; the last word absorbs the rounding remainder.
WordTiming proportional_timing(const Document& doc);

AlignmentResult align_words(const Document& doc, const std::vector<AlignedWord>& aligned,
                            const AlignmentOptions& options = {});

/// Token timing from a forced alignment, falling back to interpolation and
/// proportional timing where words could not be matched.
WordTiming map_alignment(const Document& doc, const std::vector<AlignedWord>& aligned,
                         const AlignmentOptions& options = {});

/// Checks the WordTiming invariants against `doc`; returns the first
/// violation, or nullopt.
std::optional<std::string> validate_timing(const Document& doc, const WordTiming& timing,
                                           std::int64_t slack_ms = 1000);

} // namespace kwcap
