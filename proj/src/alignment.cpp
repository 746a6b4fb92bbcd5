#include "kwcap/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include <json.hpp>

#include "utf8.hpp"

namespace kwcap {

namespace {

using Pairs = std::vector<std::pair<std::size_t, std::size_t>>;

// f[k] = LCS(a[alo, ahi), b[blo, blo + k)).
std::vector<std::uint32_t> lcs_forward(const std::vector<int>& a, std::size_t alo, std::size_t ahi,
                                       const std::vector<int>& b, std::size_t blo, std::size_t bhi) {
    const std::size_t m = bhi - blo;
    std::vector<std::uint32_t> prev(m + 1, 0), cur(m + 1, 0);
    for (std::size_t i = alo; i < ahi; ++i) {
        for (std::size_t k = 1; k <= m; ++k) {
            cur[k] = a[i] == b[blo + k - 1] ? prev[k - 1] + 1 : std::max(prev[k], cur[k - 1]);
        }
        std::swap(prev, cur);
    }
    return prev;
}

// g[k] = LCS(a[alo, ahi), b[bhi - k, bhi)).
std::vector<std::uint32_t> lcs_backward(const std::vector<int>& a, std::size_t alo, std::size_t ahi,
                                        const std::vector<int>& b, std::size_t blo, std::size_t bhi) {
    const std::size_t m = bhi - blo;
    std::vector<std::uint32_t> prev(m + 1, 0), cur(m + 1, 0);
    for (std::size_t i = ahi; i-- > alo;) {
        for (std::size_t k = 1; k <= m; ++k) {
            cur[k] = a[i] == b[bhi - k] ? prev[k - 1] + 1 : std::max(prev[k], cur[k - 1]);
        }
        std::swap(prev, cur);
    }
    return prev;
}

// Hirschberg: linear-space LCS, pairs appended in increasing order.
void lcs_recurse(const std::vector<int>& a, std::size_t alo, std::size_t ahi, const std::vector<int>& b,
                 std::size_t blo, std::size_t bhi, Pairs& out) {
    if (alo == ahi || blo == bhi) return;
    if (ahi - alo == 1) {
        for (std::size_t j = blo; j < bhi; ++j) {
            if (b[j] == a[alo]) {
                out.emplace_back(alo, j);
                return;
            }
        }
        return;
    }
    const std::size_t mid = alo + (ahi - alo) / 2;
    const auto f = lcs_forward(a, alo, mid, b, blo, bhi);
    const auto g = lcs_backward(a, mid, ahi, b, blo, bhi);
    const std::size_t m = bhi - blo;
    std::size_t best_k = 0;
    std::uint32_t best = 0;
    for (std::size_t k = 0; k <= m; ++k) {
        const auto v = f[k] + g[m - k];
        if (v > best) {
            best = v;
            best_k = k;
        }
    }
    lcs_recurse(a, alo, mid, b, blo, blo + best_k, out);
    lcs_recurse(a, mid, ahi, b, blo + best_k, bhi, out);
}

Pairs lcs_pairs(const std::vector<int>& a, const std::vector<int>& b) {
    Pairs out;
    std::size_t pre = 0;
    while (pre < a.size() && pre < b.size() && a[pre] == b[pre]) {
        out.emplace_back(pre, pre);
        ++pre;
    }
    std::size_t suf = 0;
    while (suf < a.size() - pre && suf < b.size() - pre && a[a.size() - 1 - suf] == b[b.size() - 1 - suf]) ++suf;
    lcs_recurse(a, pre, a.size() - suf, b, pre, b.size() - suf, out);
    for (std::size_t k = suf; k-- > 0;) out.emplace_back(a.size() - 1 - k, b.size() - 1 - k);
    return out;
}

// Aligner output may carry stray punctuation around a word.
std::string clean_form(std::string_view word) {
    std::size_t b = 0, e = word.size();
    while (b < e) {
        const auto d = utf8::decode(word, b);
        if (utf8::is_word_char(d.cp)) break;
        b += d.len;
    }
    while (e > b) {
        std::size_t p = e - 1;
        while (p > b && (static_cast<unsigned char>(word[p]) & 0xC0) == 0x80) --p;
        if (utf8::is_word_char(utf8::decode(word, p).cp)) break;
        e = p;
    }
    return normalize_form(word.substr(b, e - b));
}

std::vector<std::size_t> char_weights(const std::vector<const Token*>& words) {
    std::vector<std::size_t> w;
    w.reserve(words.size());
    for (const auto* t : words) w.push_back(utf8::length(t->surface));
    return w;
}

void assign_span(WordTiming& timing, const std::vector<const Token*>& words, std::int64_t lo, std::int64_t hi,
                 TimingSource source) {
    const auto shares = split_by_weight(hi - lo, char_weights(words));
    std::int64_t t = lo;
    for (std::size_t i = 0; i < words.size(); ++i) {
        timing[words[i]->pos] = {t, t + shares[i], source};
        t += shares[i];
    }
}

// Clamps into [cue.start - slack, cue.end + slack] and enforces
// non-decreasing onsets and positive durations.
void finalize_cue(WordTiming& timing, const Cue& cue, const std::vector<const Token*>& words,
                  std::int64_t slack) {
    const std::int64_t lo = std::max<std::int64_t>(0, cue.start.ms - slack);
    const std::int64_t hi = cue.end.ms + slack;
    std::int64_t last_onset = lo;
    for (const auto* w : words) {
        auto& t = timing[w->pos];
        t.onset_ms = std::clamp(t.onset_ms, lo, hi - 1);
        t.onset_ms = std::max(t.onset_ms, last_onset);
        t.offset_ms = std::clamp(t.offset_ms, t.onset_ms + 1, hi);
        last_onset = t.onset_ms;
    }
}

std::vector<std::vector<const Token*>> words_by_cue(const Document& doc, const std::vector<Token>& tokens) {
    std::vector<std::vector<const Token*>> out(doc.cues.size());
    for (const auto& t : tokens) {
        if (t.kind == TokenKind::Word) out[t.pos.cue].push_back(&t);
    }
    return out;
}

} // namespace

AlignmentError::AlignmentError(std::optional<std::size_t> word_index, const std::string& what)
    : std::runtime_error(what), word_index_(word_index) {}

std::vector<AlignedWord> parse_alignment(std::string_view json_text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(json_text.begin(), json_text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw AlignmentError(std::nullopt, std::string("alignment is not valid JSON: ") + e.what());
    }
    if (!root.is_object() || !root.contains("words") || !root["words"].is_array()) {
        throw AlignmentError(std::nullopt, "alignment must be an object with a 'words' array");
    }

    std::vector<AlignedWord> out;
    const auto& words = root["words"];
    out.reserve(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
        const auto& w = words[i];
        auto fail = [&](const std::string& why) -> AlignmentError {
            return AlignmentError(i, "alignment word " + std::to_string(i) + ": " + why);
        };
        if (!w.is_object()) throw fail("not an object");
        if (!w.contains("word") || !w["word"].is_string()) throw fail("missing string field 'word'");
        if (!w.contains("case") || !w["case"].is_string()) throw fail("missing string field 'case'");

        AlignedWord aw;
        aw.word = w["word"].get<std::string>();
        const auto kase = w["case"].get<std::string>();
        if (kase == "not-found-in-audio") {
            aw.status = AlignStatus::NotFoundInAudio;
        } else if (kase == "success") {
            if (!w.contains("start") || !w["start"].is_number() || !w.contains("end") || !w["end"].is_number()) {
                throw fail("success entries need numeric 'start' and 'end'");
            }
            aw.start_s = w["start"].get<double>();
            aw.end_s = w["end"].get<double>();
            if (!std::isfinite(aw.start_s) || !std::isfinite(aw.end_s) || aw.start_s < 0 || aw.end_s <= aw.start_s) {
                throw fail("times must satisfy 0 <= start < end");
            }
        } else {
            throw fail("unknown case '" + kase + "'");
        }
        out.push_back(std::move(aw));
    }
    return out;
}

std::string_view to_string(TimingSource source) {
    switch (source) {
    case TimingSource::Aligned: return "aligned";
    case TimingSource::Interpolated: return "interpolated";
    case TimingSource::Proportional: return "proportional";
    }
    return "?";
}

// The nudge keeps decimal halves such as 0.5005 s, stored slightly below
// their true value, rounding up.
std::int64_t seconds_to_ms(double seconds) {
    return static_cast<std::int64_t>(std::floor(seconds * 1000.0 + 0.5 + 1e-6));
}

std::vector<std::int64_t> split_by_weight(std::int64_t total_ms, const std::vector<std::size_t>& weights) {
    const std::size_t k = weights.size();
    std::vector<std::int64_t> shares(k, 0);
    if (k == 0) return shares;
    if (total_ms < static_cast<std::int64_t>(k)) {
        std::fill(shares.begin(), shares.end(), 1);
        return shares;
    }
    std::vector<std::size_t> w = weights;
    std::int64_t sum_w = 0;
    for (auto x : w) sum_w += static_cast<std::int64_t>(x);
    if (sum_w == 0) {
        std::fill(w.begin(), w.end(), 1);
        sum_w = static_cast<std::int64_t>(k);
    }

    std::int64_t used = 0;
    for (std::size_t i = 0; i + 1 < k; ++i) {
        shares[i] = std::max<std::int64_t>(1, total_ms * static_cast<std::int64_t>(w[i]) / sum_w);
        used += shares[i];
    }
    shares[k - 1] = total_ms - used;
    while (shares[k - 1] < 1) {
        // Only reachable after the 1 ms minimum kicked in; borrow from the largest share.
        const auto it = std::max_element(shares.begin(), shares.end() - 1);
        --*it;
        ++shares[k - 1];
    }
    return shares;
}

WordTiming proportional_timing(const Document& doc) {
    WordTiming timing;
    const auto tokens = tokenize(doc);
    const auto by_cue = words_by_cue(doc, tokens);
    for (std::size_t c = 0; c < doc.cues.size(); ++c) {
        const auto& cue = doc.cues[c];
        if (by_cue[c].empty()) continue;
        assign_span(timing, by_cue[c], cue.start.ms, cue.end.ms, TimingSource::Proportional);
        finalize_cue(timing, cue, by_cue[c], AlignmentOptions{}.slack_ms);
    }
    return timing;
}

AlignmentResult align_words(const Document& doc, const std::vector<AlignedWord>& aligned,
                            const AlignmentOptions& options) {
    AlignmentResult result;
    const auto tokens = tokenize(doc);
    const auto by_cue = words_by_cue(doc, tokens);

    std::vector<const Token*> words;
    for (const auto& cue_words : by_cue) words.insert(words.end(), cue_words.begin(), cue_words.end());
    result.word_tokens = words.size();

    std::unordered_map<std::string, int> ids;
    auto id_of = [&](const std::string& form) {
        return ids.try_emplace(form, static_cast<int>(ids.size())).first->second;
    };
    std::vector<int> a, b;
    a.reserve(words.size());
    b.reserve(aligned.size());
    for (const auto* w : words) a.push_back(id_of(w->normalized));
    for (const auto& aw : aligned) b.push_back(id_of(clean_form(aw.word)));

    constexpr auto none = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> match(a.size(), none);
    std::vector<bool> used(b.size(), false);
    if (!a.empty() && !b.empty()) {
        for (const auto& [i, j] : lcs_pairs(a, b)) {
            match[i] = j;
            used[j] = true;
        }
    }

    // Recovery pass for reordered lines: look for the word near where the
    // nearest matched neighbour says it should be.
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (match[i] != none) continue;
        std::optional<std::int64_t> expected;
        for (std::size_t p = i; p-- > 0;) {
            if (match[p] != none) {
                expected = static_cast<std::int64_t>(match[p] + (i - p));
                break;
            }
        }
        if (!expected) {
            for (std::size_t q = i + 1; q < a.size(); ++q) {
                if (match[q] != none) {
                    expected = static_cast<std::int64_t>(match[q]) - static_cast<std::int64_t>(q - i);
                    break;
                }
            }
        }
        if (!expected) continue;
        const auto radius = static_cast<std::int64_t>(options.window);
        for (std::int64_t d = 0; d <= radius && match[i] == none; ++d) {
            for (const std::int64_t j : {*expected - d, *expected + d}) {
                if (j < 0 || j >= static_cast<std::int64_t>(b.size())) continue;
                const auto uj = static_cast<std::size_t>(j);
                if (!used[uj] && b[uj] == a[i]) {
                    match[i] = uj;
                    used[uj] = true;
                    break;
                }
            }
        }
    }

    result.matched = static_cast<std::size_t>(std::count_if(match.begin(), match.end(), [](auto j) { return j != none; }));
    const auto denom = std::max(a.size(), b.size());
    result.match_ratio = denom ? static_cast<double>(result.matched) / static_cast<double>(denom) : 0.0;
    if (aligned.empty() || result.match_ratio < options.min_match_ratio) {
        result.timing = proportional_timing(doc);
        result.fell_back = true;
        return result;
    }

    std::size_t flat = 0;
    for (std::size_t c = 0; c < doc.cues.size(); ++c) {
        const auto& cue = doc.cues[c];
        const auto& cw = by_cue[c];
        if (cw.empty()) continue;

        std::vector<std::optional<WordTime>> anchor(cw.size());
        bool any = false;
        for (std::size_t k = 0; k < cw.size(); ++k, ++flat) {
            const auto j = match[flat];
            if (j == none || aligned[j].status != AlignStatus::Success) continue;
            auto onset = seconds_to_ms(aligned[j].start_s);
            auto offset = std::max(seconds_to_ms(aligned[j].end_s), onset + 1);
            anchor[k] = WordTime{onset, offset, TimingSource::Aligned};
            any = true;
        }

        if (!any) {
            assign_span(result.timing, cw, cue.start.ms, cue.end.ms, TimingSource::Proportional);
            finalize_cue(result.timing, cue, cw, options.slack_ms);
            continue;
        }

        for (std::size_t k = 0; k < cw.size();) {
            if (anchor[k]) {
                result.timing[cw[k]->pos] = *anchor[k];
                ++k;
                continue;
            }
            std::size_t q = k;
            while (q < cw.size() && !anchor[q]) ++q;
            const std::vector<const Token*> run(cw.begin() + static_cast<std::ptrdiff_t>(k),
                                                cw.begin() + static_cast<std::ptrdiff_t>(q));
            const auto count = static_cast<std::int64_t>(run.size());
            const bool has_prev = k > 0;
            const bool has_next = q < cw.size();
            std::int64_t lo = has_prev ? anchor[k - 1]->offset_ms : cue.start.ms;
            std::int64_t hi = has_next ? anchor[q]->onset_ms : cue.end.ms;
            if (hi - lo < count) {
                if (has_next && !has_prev) {
                    lo = hi - count;
                } else {
                    hi = lo + count;
                }
            }
            assign_span(result.timing, run, lo, hi, TimingSource::Interpolated);
            k = q;
        }
        finalize_cue(result.timing, cue, cw, options.slack_ms);
    }
    return result;
}

WordTiming map_alignment(const Document& doc, const std::vector<AlignedWord>& aligned,
                         const AlignmentOptions& options) {
    return align_words(doc, aligned, options).timing;
}

std::optional<std::string> validate_timing(const Document& doc, const WordTiming& timing, std::int64_t slack_ms) {
    const auto tokens = tokenize(doc);
    std::size_t words = 0;
    std::optional<TokenPosition> prev;
    std::int64_t prev_onset = 0;
    for (const auto& t : tokens) {
        if (t.kind != TokenKind::Word) continue;
        ++words;
        const auto it = timing.find(t.pos);
        if (it == timing.end()) return "no timing for word '" + t.surface + "'";
        const auto& wt = it->second;
        const auto& cue = doc.cues[t.pos.cue];
        if (wt.offset_ms <= wt.onset_ms) return "non-positive duration for '" + t.surface + "'";
        if (wt.onset_ms < std::max<std::int64_t>(0, cue.start.ms - slack_ms) || wt.offset_ms > cue.end.ms + slack_ms) {
            return "timing of '" + t.surface + "' outside the cue slack window";
        }
        if (prev && prev->cue == t.pos.cue && wt.onset_ms < prev_onset) {
            return "onset of '" + t.surface + "' decreases within its cue";
        }
        prev = t.pos;
        prev_onset = wt.onset_ms;
    }
    if (timing.size() != words) return "timing has entries for non-word tokens";
    return std::nullopt;
}

} // namespace kwcap
