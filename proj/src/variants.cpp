#include "kwcap/variants.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

namespace kwcap {

namespace {

constexpr std::int64_t kNoNextCue = std::numeric_limits<std::int64_t>::max();

Document renumbered(std::vector<Cue> cues) {
    Document out;
    out.cues = std::move(cues);
    for (std::size_t i = 0; i < out.cues.size(); ++i) out.cues[i].index = static_cast<int>(i + 1);
    return out;
}

std::int64_t next_cue_start(const Document& doc, std::size_t c) {
    return c + 1 < doc.cues.size() ? doc.cues[c + 1].start.ms : kNoNextCue;
}

const WordTime& timing_for(const WordTiming& timing, const TokenPosition& pos) {
    const auto it = timing.find(pos);
    if (it == timing.end()) throw MissingTiming(pos);
    return it->second;
}

// Keyword positions per cue, in token order.
std::vector<std::vector<TokenPosition>> keywords_by_cue(const Document& doc, const KeywordAnnotation& ann) {
    std::vector<std::vector<TokenPosition>> out(doc.cues.size());
    for (const auto& pos : ann.keywords) {
        if (pos.cue < out.size()) out[pos.cue].push_back(pos);
    }
    return out;
}

Cue highlighted_cue(const Cue& src, const std::vector<TokenPosition>& keywords, const std::string& color) {
    Cue cue = src;
    for (std::size_t li = 0; li < cue.lines.size(); ++li) {
        std::vector<CharSpan> spans;
        for (const auto& k : keywords) {
            if (k.line == li) spans.push_back(k.span);
        }
        if (!spans.empty()) cue.lines[li] = highlight_spans(src.lines[li], spans, color);
    }
    return cue;
}

// For cues sorted by start: the end each cue keeps after giving way to the
// next cue from a different source, or nullopt when nothing is left.
std::vector<std::optional<std::int64_t>> truncated_ends(const std::vector<std::int64_t>& starts,
                                                        const std::vector<std::int64_t>& ends,
                                                        const std::vector<std::size_t>& sources) {
    std::vector<std::optional<std::int64_t>> out(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i) {
        auto end = ends[i];
        for (std::size_t j = i + 1; j < starts.size() && starts[j] < end; ++j) {
            if (sources[j] != sources[i]) {
                end = starts[j];
                break;
            }
        }
        if (end > starts[i]) out[i] = end;
    }
    return out;
}

std::string word_at(const Document& doc, const TokenPosition& pos) {
    const auto text = doc.cues[pos.cue].lines[pos.line].text();
    return text.substr(pos.span.begin, pos.span.end - pos.span.begin);
}

} // namespace

std::string_view variant_name(Variant v) {
    switch (v) {
    case Variant::Standard: return "standard";
    case Variant::KeywordHighlights: return "kw";
    case Variant::TimedKeywords: return "timedkw";
    case Variant::TimedKeywordHighlights: return "timedhl";
    }
    return "?";
}

std::optional<Variant> parse_variant(std::string_view name) {
    for (auto v : {Variant::Standard, Variant::KeywordHighlights, Variant::TimedKeywords,
                   Variant::TimedKeywordHighlights}) {
        if (variant_name(v) == name) return v;
    }
    return std::nullopt;
}

std::string variant_suffix(Variant v) { return "." + std::string(variant_name(v)) + ".srt"; }

bool is_timed(Variant v) { return v == Variant::TimedKeywords || v == Variant::TimedKeywordHighlights; }

VariantParams VariantParams::validated() const {
    VariantParams p = *this;
    const bool hex = p.highlight_color.size() == 7 && p.highlight_color[0] == '#' &&
                     std::all_of(p.highlight_color.begin() + 1, p.highlight_color.end(),
                                 [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); });
    if (!hex) throw std::invalid_argument("highlight color must be #RRGGBB, got '" + p.highlight_color + "'");
    for (auto& c : p.highlight_color) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (p.min_display_ms <= 0) throw std::invalid_argument("minimum display time must be positive");
    if (p.extension_ms < 0) throw std::invalid_argument("display extension must not be negative");
    return p;
}

MissingTiming::MissingTiming(TokenPosition pos)
    : std::runtime_error("no timing for keyword in cue " + std::to_string(pos.cue + 1) + ", line " +
                         std::to_string(pos.line + 1)),
      pos_(pos) {}

std::vector<SourcedCue> resolve_overlaps(std::vector<SourcedCue> cues) {
    std::vector<std::int64_t> starts, ends;
    std::vector<std::size_t> sources;
    for (const auto& c : cues) {
        starts.push_back(c.cue.start.ms);
        ends.push_back(c.cue.end.ms);
        sources.push_back(c.source);
    }
    const auto kept = truncated_ends(starts, ends, sources);
    std::vector<SourcedCue> out;
    out.reserve(cues.size());
    for (std::size_t i = 0; i < cues.size(); ++i) {
        if (!kept[i]) continue;
        out.push_back(std::move(cues[i]));
        out.back().cue.end.ms = *kept[i];
    }
    return out;
}

StyledLine highlight_spans(const StyledLine& line, const std::vector<CharSpan>& spans, const std::string& color) {
    StyledLine out;
    std::size_t offset = 0;
    for (const auto& seg : line.segments) {
        const std::size_t seg_end = offset + seg.text.size();
        std::vector<std::size_t> cuts{offset, seg_end};
        for (const auto& s : spans) {
            if (s.begin > offset && s.begin < seg_end) cuts.push_back(s.begin);
            if (s.end > offset && s.end < seg_end) cuts.push_back(s.end);
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const auto b = cuts[k], e = cuts[k + 1];
            const bool inside =
                std::any_of(spans.begin(), spans.end(), [&](const CharSpan& s) { return s.begin <= b && e <= s.end; });
            StyleSet style = seg.style;
            if (inside) style.color = color;
            out.append(std::string_view(seg.text).substr(b - offset, e - b), style);
        }
        offset = seg_end;
    }
    return out;
}

Document gen_standard(const Document& doc) {
    std::vector<Cue> cues;
    cues.reserve(doc.cues.size());
    for (const auto& src : doc.cues) {
        Cue cue = src;
        for (auto& line : cue.lines) {
            StyledLine canon;
            for (const auto& seg : line.segments) canon.append(seg.text, seg.style);
            line = std::move(canon);
        }
        cues.push_back(std::move(cue));
    }
    return renumbered(std::move(cues));
}

Document gen_keyword_highlights(const Document& doc, const KeywordAnnotation& ann, const VariantParams& params) {
    const auto p = params.validated();
    const auto by_cue = keywords_by_cue(doc, ann);
    auto out = gen_standard(doc);
    for (std::size_t c = 0; c < out.cues.size(); ++c) {
        if (!by_cue[c].empty()) out.cues[c] = highlighted_cue(out.cues[c], by_cue[c], p.highlight_color);
    }
    return out;
}

std::vector<KeywordCue> plan_timed_keywords(const Document& doc, const KeywordAnnotation& ann,
                                            const WordTiming& timing, const VariantParams& params) {
    const auto p = params.validated();
    const auto by_cue = keywords_by_cue(doc, ann);

    std::vector<KeywordCue> planned;
    for (std::size_t c = 0; c < doc.cues.size(); ++c) {
        const auto next_start = next_cue_start(doc, c);
        std::optional<KeywordCue> group;
        for (const auto& pos : by_cue[c]) {
            const auto& t = timing_for(timing, pos);
            auto end = t.offset_ms;
            if (t.offset_ms - t.onset_ms < p.min_display_ms) {
                end = std::max(t.offset_ms, std::min(t.offset_ms + p.extension_ms, next_start));
            }
            if (group && t.onset_ms < group->end_ms) {
                group->end_ms = std::max(group->end_ms, end);
                group->spoken_end_ms = std::max(group->spoken_end_ms, t.offset_ms);
                group->members.push_back(pos);
                group->words.push_back(word_at(doc, pos));
                continue;
            }
            if (group) planned.push_back(std::move(*group));
            group = KeywordCue{t.onset_ms, end, c, {pos}, {word_at(doc, pos)}, t.offset_ms};
        }
        if (group) planned.push_back(std::move(*group));
    }

    std::stable_sort(planned.begin(), planned.end(),
                     [](const KeywordCue& a, const KeywordCue& b) { return a.start_ms < b.start_ms; });

    // Cross-source overlaps: the earlier cue gives way to the later one.
    std::vector<std::int64_t> starts, ends;
    std::vector<std::size_t> sources;
    for (const auto& k : planned) {
        starts.push_back(k.start_ms);
        ends.push_back(k.end_ms);
        sources.push_back(k.source);
    }
    const auto kept = truncated_ends(starts, ends, sources);
    std::vector<KeywordCue> out;
    out.reserve(planned.size());
    for (std::size_t i = 0; i < planned.size(); ++i) {
        if (!kept[i]) continue;
        out.push_back(std::move(planned[i]));
        out.back().end_ms = *kept[i];
    }
    return out;
}

Document gen_timed_keywords(const Document& doc, const KeywordAnnotation& ann, const WordTiming& timing,
                            const VariantParams& params) {
    const auto planned = plan_timed_keywords(doc, ann, timing, params);
    std::vector<SourcedCue> cues;
    cues.reserve(planned.size());
    for (const auto& k : planned) {
        std::string text;
        for (const auto& w : k.words) {
            if (!text.empty()) text += ' ';
            text += w;
        }
        Cue cue;
        cue.start.ms = k.start_ms;
        cue.end.ms = k.end_ms;
        cue.lines.push_back(StyledLine::plain(std::move(text)));
        cues.push_back({std::move(cue), k.source});
    }
    // Already non-overlapping across sources; kept for the shared contract.
    cues = resolve_overlaps(std::move(cues));
    std::vector<Cue> plain;
    plain.reserve(cues.size());
    for (auto& sc : cues) plain.push_back(std::move(sc.cue));
    return renumbered(std::move(plain));
}

std::vector<HighlightSplit> plan_timed_highlights(const Document& doc, const KeywordAnnotation& ann,
                                                  const WordTiming& timing, const VariantParams& params) {
    const auto p = params.validated();
    const auto by_cue = keywords_by_cue(doc, ann);

    std::vector<HighlightSplit> out;
    out.reserve(doc.cues.size());
    for (std::size_t c = 0; c < doc.cues.size(); ++c) {
        const auto& cue = doc.cues[c];
        const auto& kws = by_cue[c];

        std::vector<std::int64_t> onsets;
        onsets.reserve(kws.size());
        std::int64_t min_residence = std::numeric_limits<std::int64_t>::max();
        for (const auto& pos : kws) {
            const auto onset = std::clamp(timing_for(timing, pos).onset_ms, cue.start.ms, cue.end.ms - 1);
            onsets.push_back(onset);
            min_residence = std::min(min_residence, cue.end.ms - onset);
        }

        HighlightSplit split;
        split.source = c;
        split.bounds.push_back(cue.start.ms);
        std::vector<std::int64_t> points;
        for (auto o : onsets) {
            if (o > cue.start.ms) points.push_back(o);
        }
        std::sort(points.begin(), points.end());
        points.erase(std::unique(points.begin(), points.end()), points.end());
        split.bounds.insert(split.bounds.end(), points.begin(), points.end());

        auto end = cue.end.ms;
        if (!kws.empty() && min_residence < p.min_display_ms) {
            end = std::max(end, std::min(end + p.extension_ms, next_cue_start(doc, c)));
        }
        split.bounds.push_back(end);

        for (std::size_t k = 0; k + 1 < split.bounds.size(); ++k) {
            std::vector<TokenPosition> lit;
            for (std::size_t i = 0; i < kws.size(); ++i) {
                if (onsets[i] <= split.bounds[k]) lit.push_back(kws[i]);
            }
            split.highlighted.push_back(std::move(lit));
        }
        out.push_back(std::move(split));
    }
    return out;
}

Document gen_timed_keyword_highlights(const Document& doc, const KeywordAnnotation& ann, const WordTiming& timing,
                                      const VariantParams& params) {
    const auto p = params.validated();
    const auto standard = gen_standard(doc);
    std::vector<Cue> cues;
    for (const auto& split : plan_timed_highlights(doc, ann, timing, p)) {
        const auto& src = standard.cues[split.source];
        for (std::size_t k = 0; k + 1 < split.bounds.size(); ++k) {
            Cue cue = highlighted_cue(src, split.highlighted[k], p.highlight_color);
            cue.start.ms = split.bounds[k];
            cue.end.ms = split.bounds[k + 1];
            cues.push_back(std::move(cue));
        }
    }
    std::stable_sort(cues.begin(), cues.end(), [](const Cue& a, const Cue& b) { return a.start < b.start; });
    return renumbered(std::move(cues));
}

Document generate(const Document& doc, const KeywordAnnotation& ann, const WordTiming& timing,
                  const VariantParams& params) {
    switch (params.variant) {
    case Variant::Standard: return gen_standard(doc);
    case Variant::KeywordHighlights: return gen_keyword_highlights(doc, ann, params);
    case Variant::TimedKeywords: return gen_timed_keywords(doc, ann, timing, params);
    case Variant::TimedKeywordHighlights: return gen_timed_keyword_highlights(doc, ann, timing, params);
    }
    return gen_standard(doc);
}

} // namespace kwcap
