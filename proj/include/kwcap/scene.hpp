#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kwcap/lexicon.hpp"
#include "kwcap/srt.hpp"

namespace kwcap {

struct PartitionStats {
    std::size_t index = 0;
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    std::optional<std::pair<std::size_t, std::size_t>> cue_range; // first/last cue ordinal, if any
    std::size_t keyword_count = 0;
    std::size_t word_count = 0;
    double density = 0.0; // keyword_count / max(word_count, 1)

    bool operator==(const PartitionStats&) const = default;
};

class InvalidPartitionCount : public std::invalid_argument {
public:
    explicit InvalidPartitionCount(long long n);
};

/// Splits [first cue start, last cue end] into `n` equal-duration parts and
/// assigns each cue to the part holding its start time.
std::vector<PartitionStats> partition_density(const Document& doc, const KeywordAnnotation& ann, long long n = 30);

/// The `k` partitions with the most keywords, highest first; ties go to
/// the lower index. Requires 1 <= k <= stats.size().
std::vector<PartitionStats> top_partitions(std::span<const PartitionStats> stats, std::size_t k);

/// `partition,start_ms,end_ms,keywords,words,density` with a header row.
std::string partitions_csv(std::span<const PartitionStats> stats);

/// Fixed-width table for terminals.
std::string partitions_table(std::span<const PartitionStats> stats);

} // namespace kwcap
