#include <doctest.h>

#include "kwcap/alignment.hpp"
#include "test_support.hpp"

using namespace kwcap;
using namespace kwcap::testing;

namespace {

Document doc_of(std::initializer_list<std::tuple<std::int64_t, std::int64_t, const char*>> cues) {
    Document d;
    int i = 0;
    for (const auto& [s, e, text] : cues) d.cues.push_back({++i, {s}, {e}, {StyledLine::plain(text)}});
    return d;
}

std::vector<WordTime> times_in_order(const Document& doc, const WordTiming& timing) {
    std::vector<WordTime> out;
    for (const auto& t : tokenize(doc)) {
        if (t.kind == TokenKind::Word) out.push_back(timing.at(t.pos));
    }
    return out;
}

AlignedWord ok(const char* w, double s, double e) { return {w, s, e, AlignStatus::Success}; }
AlignedWord missing(const char* w) { return {w, 0, 0, AlignStatus::NotFoundInAudio}; }

// Gentle-style transcript of a document: every word, spoken at its
// proportional time.
std::vector<AlignedWord> transcript_of(const Document& doc) {
    const auto timing = proportional_timing(doc);
    std::vector<AlignedWord> out;
    for (const auto& t : tokenize(doc)) {
        if (t.kind != TokenKind::Word) continue;
        const auto& wt = timing.at(t.pos);
        out.push_back(ok(t.surface.c_str(), wt.onset_ms / 1000.0, wt.offset_ms / 1000.0));
    }
    return out;
}

} // namespace

TEST_CASE("parse alignment json") {
    const auto words = parse_alignment(R"({"words":[{"word":"spite","case":"success","start":10.02,"end":10.48}]})");
    REQUIRE(words.size() == 1);
    CHECK(words[0] == AlignedWord{"spite", 10.02, 10.48, AlignStatus::Success});

    const auto nf = parse_alignment(
        R"({"transcript":"x","words":[{"word":"uh","case":"not-found-in-audio","startOffset":3,"endOffset":5}]})");
    REQUIRE(nf.size() == 1);
    CHECK(nf[0].status == AlignStatus::NotFoundInAudio);

    CHECK(parse_alignment(R"({"words":[]})").empty());
}

TEST_CASE("malformed alignment json") {
    CHECK_THROWS_AS(parse_alignment("{"), AlignmentError);
    CHECK_THROWS_AS(parse_alignment("[]"), AlignmentError);
    CHECK_THROWS_AS(parse_alignment(R"({"words":{}})"), AlignmentError);
    for (const char* bad : {R"({"words":[{"word":"a","case":"success","start":1,"end":2},{"case":"success"}]})",
                            R"({"words":[{"word":"a","case":"success","start":1,"end":2},{"word":"b","case":"meh"}]})",
                            R"({"words":[{"word":"a","case":"success","start":1,"end":2},{"word":"b","case":"success","start":3,"end":3}]})",
                            R"({"words":[{"word":"a","case":"success","start":1,"end":2},{"word":"b","case":"success","start":-1,"end":3}]})",
                            R"({"words":[{"word":"a","case":"success","start":1,"end":2},{"word":"b","case":"success","start":"1","end":3}]})"}) {
        CAPTURE(bad);
        try {
            parse_alignment(bad);
            FAIL("expected AlignmentError");
        } catch (const AlignmentError& e) {
            CHECK(e.word_index() == 1u);
        }
    }
}

TEST_CASE("seconds round half up") {
    CHECK(seconds_to_ms(10.02) == 10020);
    CHECK(seconds_to_ms(1.2345) == 1235);
    CHECK(seconds_to_ms(0.5005) == 501);
    CHECK(seconds_to_ms(2.0044) == 2004);
    CHECK(seconds_to_ms(0.0) == 0);
}

TEST_CASE("split by weight") {
    CHECK(split_by_weight(1000, {1, 3}) == std::vector<std::int64_t>{250, 750});
    CHECK(split_by_weight(1000, {1, 1, 1}) == std::vector<std::int64_t>{333, 333, 334});
    CHECK(split_by_weight(5, {100, 1, 1}) == std::vector<std::int64_t>{3, 1, 1});
    CHECK(split_by_weight(2, {1, 1, 1}) == std::vector<std::int64_t>{1, 1, 1});
    CHECK(split_by_weight(7, {}).empty());
}

TEST_CASE("proportional timing") {
    const auto doc = doc_of({{0, 1000, "a bcd"}});
    const auto t = times_in_order(doc, proportional_timing(doc));
    REQUIRE(t.size() == 2);
    CHECK(t[0] == WordTime{0, 250, TimingSource::Proportional});
    CHECK(t[1] == WordTime{250, 1000, TimingSource::Proportional});

    const auto single = doc_of({{1234, 5678, "[sighs] Hello!"}});
    const auto s = times_in_order(single, proportional_timing(single));
    REQUIRE(s.size() == 1);
    CHECK(s[0] == WordTime{1234, 5678, TimingSource::Proportional});
}

TEST_CASE("proportional timing conserves cue durations on the styled fixture") {
    const auto doc = parse_srt(read_file(data_path("srt/12_styled12.srt")));
    const auto timing = proportional_timing(doc);
    CHECK_FALSE(validate_timing(doc, timing));
    std::vector<std::int64_t> sums(doc.cues.size(), 0);
    std::vector<bool> has_words(doc.cues.size(), false);
    for (const auto& [pos, wt] : timing) {
        sums[pos.cue] += wt.offset_ms - wt.onset_ms;
        has_words[pos.cue] = true;
    }
    for (std::size_t c = 0; c < doc.cues.size(); ++c) {
        if (has_words[c]) CHECK(sums[c] == doc.cues[c].duration_ms());
    }
    CHECK(std::count(has_words.begin(), has_words.end(), true) >= 11);
}

TEST_CASE("perfect transcript maps one to one") {
    const auto doc = doc_of({{1000, 3000, "Don't fight, Nicole."}, {3500, 5000, "Okay."}});
    const std::vector<AlignedWord> words{ok("Don't", 1.05, 1.4), ok("fight", 1.4, 1.9), ok("Nicole", 2.0, 2.6),
                                         ok("okay", 3.6, 4.1)};
    const auto r = align_words(doc, words);
    CHECK(r.matched == 4);
    CHECK(r.match_ratio == doctest::Approx(1.0));
    CHECK_FALSE(r.fell_back);
    const auto t = times_in_order(doc, r.timing);
    CHECK(t == std::vector<WordTime>{{1050, 1400, TimingSource::Aligned},
                                     {1400, 1900, TimingSource::Aligned},
                                     {2000, 2600, TimingSource::Aligned},
                                     {3600, 4100, TimingSource::Aligned}});
}

TEST_CASE("unmatched word between anchors is interpolated") {
    const auto doc = doc_of({{9000, 12000, "aaa bbb ccc"}});
    const auto r = align_words(doc, {ok("aaa", 10.0, 10.4), missing("bbb"), ok("ccc", 11.0, 11.4)});
    const auto t = times_in_order(doc, r.timing);
    CHECK(t[1] == WordTime{10400, 11000, TimingSource::Interpolated});

    // Two words in the gap share it by character count.
    const auto two = doc_of({{9000, 12000, "aaa b ccc ddd"}});
    const auto r2 = align_words(two, {ok("aaa", 10.0, 10.4), missing("b"), missing("ccc"), ok("ddd", 11.0, 11.4)});
    const auto t2 = times_in_order(two, r2.timing);
    CHECK(t2[1] == WordTime{10400, 10550, TimingSource::Interpolated});
    CHECK(t2[2] == WordTime{10550, 11000, TimingSource::Interpolated});
}

TEST_CASE("leading and trailing unmatched words interpolate against the cue bounds") {
    const auto doc = doc_of({{1000, 3000, "xx aaa yy"}});
    const auto r = align_words(doc, {missing("xx"), ok("aaa", 1.5, 2.0), missing("yy")}, {.min_match_ratio = 0.1});
    const auto t = times_in_order(doc, r.timing);
    CHECK(t[0] == WordTime{1000, 1500, TimingSource::Interpolated});
    CHECK(t[2] == WordTime{2000, 3000, TimingSource::Interpolated});
}

TEST_CASE("cue without any match is proportional within the cue") {
    const auto doc = doc_of({{0, 1000, "one two three four"}, {2000, 3000, "a bcd"}});
    const auto r = align_words(doc, {ok("one", 0.0, 0.2), ok("two", 0.2, 0.4), ok("three", 0.4, 0.7),
                                     ok("four", 0.7, 1.0)});
    CHECK_FALSE(r.fell_back);
    const auto t = times_in_order(doc, r.timing);
    CHECK(t[4] == WordTime{2000, 2250, TimingSource::Proportional});
    CHECK(t[5] == WordTime{2250, 3000, TimingSource::Proportional});
}

TEST_CASE("unrelated transcript falls back to proportional timing") {
    const auto doc = doc_of({{0, 1000, "the settlement is final"}, {1500, 3000, "we go home now"}});
    const auto r = align_words(doc, {ok("lorem", 0.1, 0.2), ok("ipsum", 0.3, 0.4), ok("dolor", 0.5, 0.6),
                                     ok("home", 2.0, 2.2), ok("sit", 2.3, 2.4), ok("amet", 2.5, 2.6)});
    CHECK(r.matched == 1);
    CHECK(r.fell_back);
    CHECK(r.timing == proportional_timing(doc));
    for (const auto& [pos, wt] : r.timing) CHECK(wt.source == TimingSource::Proportional);

    CHECK(map_alignment(doc, {}) == proportional_timing(doc));
}

TEST_CASE("swapped lines are recovered within the window") {
    const auto doc = doc_of({{0, 2000, "alpha beta gamma delta"}, {2000, 4000, "epsilon zeta"}});
    // The aligner heard the second cue's words before "delta".
    const auto r = align_words(doc, {ok("alpha", 0.0, 0.4), ok("beta", 0.4, 0.8), ok("gamma", 0.8, 1.2),
                                     ok("epsilon", 1.2, 1.6), ok("zeta", 1.6, 1.9), ok("delta", 1.9, 2.0)});
    CHECK(r.matched == 6);
    const auto t = times_in_order(doc, r.timing);
    CHECK(t[3].source == TimingSource::Aligned);
    CHECK(t[3].onset_ms == 1900);
    CHECK_FALSE(validate_timing(doc, r.timing));
}

TEST_CASE("aligned times are clamped into the slack window with monotone onsets") {
    const auto doc = doc_of({{5000, 6000, "far early late"}});
    const auto r = align_words(doc, {ok("far", 20.0, 21.0), ok("early", 1.0, 1.5), ok("late", 5.5, 5.6)});
    const auto t = times_in_order(doc, r.timing);
    CHECK(t[0].onset_ms == 6999);
    CHECK(t[0].offset_ms == 7000);
    CHECK(t[1].onset_ms == 6999);
    CHECK(t[2].onset_ms == 6999);
    CHECK_FALSE(validate_timing(doc, r.timing));
}

TEST_CASE("property: alignment timing invariants and idempotence") {
    std::mt19937 rng(99);
    std::bernoulli_distribution drop(0.2), lose(0.1);
    std::normal_distribution<double> jitter(0.0, 0.4);
    for (int i = 0; i < 200; ++i) {
        const auto doc = random_document(rng, {.max_cues = 20, .overlaps = true});
        auto words = transcript_of(doc);
        std::vector<AlignedWord> noisy;
        for (auto w : words) {
            if (drop(rng)) continue;
            if (lose(rng)) {
                w.status = AlignStatus::NotFoundInAudio;
            } else {
                w.start_s = std::max(0.0, w.start_s + jitter(rng));
                w.end_s = w.start_s + 0.05 + std::abs(jitter(rng));
            }
            noisy.push_back(w);
        }
        const auto a = map_alignment(doc, noisy);
        REQUIRE_FALSE(validate_timing(doc, a));
        CHECK(a == map_alignment(doc, noisy));

        const auto exact = align_words(doc, words);
        CHECK(exact.matched == exact.word_tokens);
    }
}
