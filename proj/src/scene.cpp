#include "kwcap/scene.hpp"

#include <algorithm>
#include <cstdio>

#include "kwcap/tokenizer.hpp"

namespace kwcap {

namespace {

std::string format_density(double d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", d);
    return buf;
}

} // namespace

InvalidPartitionCount::InvalidPartitionCount(long long n)
    : std::invalid_argument("partition count must be at least 1, got " + std::to_string(n)) {}

std::vector<PartitionStats> partition_density(const Document& doc, const KeywordAnnotation& ann, long long n) {
    if (n < 1) throw InvalidPartitionCount(n);
    if (doc.cues.empty()) throw std::invalid_argument("cannot partition an empty document");

    const auto parts = static_cast<std::size_t>(n);
    const std::int64_t first = doc.cues.front().start.ms;
    std::int64_t last = first;
    for (const auto& cue : doc.cues) last = std::max(last, cue.end.ms);
    const std::int64_t span = last - first;

    // first + span * k / parts, without overflowing the product.
    const auto p = static_cast<std::int64_t>(parts);
    const std::int64_t q = span / p, r = span % p;
    std::vector<std::int64_t> bounds(parts + 1);
    for (std::size_t k = 0; k <= parts; ++k) {
        const auto sk = static_cast<std::int64_t>(k);
        bounds[k] = first + q * sk + r * sk / p;
    }

    std::vector<PartitionStats> stats(parts);
    for (std::size_t k = 0; k < parts; ++k) {
        stats[k].index = k;
        stats[k].start_ms = bounds[k];
        stats[k].end_ms = bounds[k + 1];
    }

    std::vector<std::size_t> words_per_cue(doc.cues.size(), 0);
    for (const auto& t : tokenize(doc)) {
        if (t.kind == TokenKind::Word) ++words_per_cue[t.pos.cue];
    }

    for (std::size_t c = 0; c < doc.cues.size(); ++c) {
        // Last boundary b with b <= start; zero-width parts are skipped over.
        const auto it = std::upper_bound(bounds.begin(), bounds.end() - 1, doc.cues[c].start.ms);
        const auto k = static_cast<std::size_t>(std::distance(bounds.begin(), it)) - 1;
        auto& s = stats[std::min(k, parts - 1)];
        if (!s.cue_range) {
            s.cue_range = std::make_pair(c, c);
        } else {
            s.cue_range->second = c;
        }
        s.word_count += words_per_cue[c];
        s.keyword_count += c < ann.per_cue.size() ? ann.per_cue[c] : 0;
    }
    for (auto& s : stats) {
        s.density = static_cast<double>(s.keyword_count) / static_cast<double>(std::max<std::size_t>(s.word_count, 1));
    }
    return stats;
}

std::vector<PartitionStats> top_partitions(std::span<const PartitionStats> stats, std::size_t k) {
    if (k < 1 || k > stats.size()) {
        throw std::invalid_argument("top count must be between 1 and " + std::to_string(stats.size()));
    }
    std::vector<PartitionStats> sorted(stats.begin(), stats.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const PartitionStats& a, const PartitionStats& b) {
        if (a.keyword_count != b.keyword_count) return a.keyword_count > b.keyword_count;
        return a.index < b.index;
    });
    sorted.resize(k);
    return sorted;
}

std::string partitions_csv(std::span<const PartitionStats> stats) {
    std::string out = "partition,start_ms,end_ms,keywords,words,density\n";
    for (const auto& s : stats) {
        out += std::to_string(s.index) + ',' + std::to_string(s.start_ms) + ',' + std::to_string(s.end_ms) + ',' +
               std::to_string(s.keyword_count) + ',' + std::to_string(s.word_count) + ',' +
               format_density(s.density) + '\n';
    }
    return out;
}

std::string partitions_table(std::span<const PartitionStats> stats) {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%4s  %-12s  %-12s  %8s  %6s  %8s\n", "part", "start", "end", "keywords", "words",
                  "density");
    out += buf;
    for (const auto& s : stats) {
        std::snprintf(buf, sizeof buf, "%4zu  %-12s  %-12s  %8zu  %6zu  %8s\n", s.index,
                      Timestamp{s.start_ms}.str().c_str(), Timestamp{s.end_ms}.str().c_str(), s.keyword_count,
                      s.word_count, format_density(s.density).c_str());
        out += buf;
    }
    return out;
}

} // namespace kwcap
