#include <doctest.h>

#include "kwcap/srt.hpp"
#include "test_support.hpp"

using namespace kwcap;
using namespace kwcap::testing;

namespace {

// LF newlines, no BOM, indices renumbered, one blank line after each block.
std::string normalize(const std::string& text) {
    std::string out;
    int n = 0;
    for (const auto& block : raw_blocks(text)) {
        out += std::to_string(++n) + '\n';
        const std::size_t first = block[0].find("-->") != std::string::npos ? 0 : 1;
        for (std::size_t k = first; k < block.size(); ++k) out += block[k] + '\n';
        out += '\n';
    }
    return out;
}

StyleSet colored(const char* hex) {
    StyleSet s;
    s.color = hex;
    return s;
}

} // namespace

TEST_CASE("timestamps parse and format") {
    CHECK(Timestamp::parse("00:00:01,000")->ms == 1000);
    CHECK(Timestamp::parse("01:02:03,004")->ms == 3723004);
    CHECK(Timestamp::parse("99:59:59,999")->ms == 359999999);
    CHECK(Timestamp::parse("00:00:01.500")->ms == 1500);
    CHECK(Timestamp::parse(" 00:00:01,000 ")->ms == 1000);
    CHECK_FALSE(Timestamp::parse("00:60:00,000"));
    CHECK_FALSE(Timestamp::parse("00:00:01"));
    CHECK_FALSE(Timestamp::parse("0:0:1,000"));
    CHECK_FALSE(Timestamp::parse("00:00:01,5"));
    CHECK_FALSE(Timestamp::parse("aa:00:01,000"));

    CHECK(Timestamp{0}.str() == "00:00:00,000");
    CHECK(Timestamp{359999999}.str() == "99:59:59,999");
    CHECK(Timestamp{363723004}.str() == "101:02:03,004");
}

TEST_CASE("single plain cue") {
    const auto doc = parse_srt("1\n00:00:01,000 --> 00:00:02,000\nHello\n");
    REQUIRE(doc.cues.size() == 1);
    const auto& cue = doc.cues[0];
    CHECK(cue.index == 1);
    CHECK(cue.start.ms == 1000);
    CHECK(cue.end.ms == 2000);
    REQUIRE(cue.lines.size() == 1);
    CHECK(cue.lines[0] == StyledLine::plain("Hello"));
    CHECK(doc.source_newline == Newline::LF);
    CHECK_FALSE(doc.had_bom);
}

TEST_CASE("font color becomes a styled segment") {
    const auto doc = parse_srt("1\n00:00:01,000 --> 00:00:02,000\n<font color=\"#FFFF00\">spite</font> visit\n");
    const auto& segs = doc.cues.at(0).lines.at(0).segments;
    REQUIRE(segs.size() == 2);
    CHECK(segs[0] == Segment{"spite", colored("#FFFF00")});
    CHECK(segs[1] == Segment{" visit", {}});
}

TEST_CASE("tag variants") {
    SUBCASE("lower-case hex and single quotes normalize") {
        const auto doc = parse_srt("1\n00:00:01,000 --> 00:00:02,000\n<font color='#ffff00'>x</font>\n");
        CHECK(doc.cues[0].lines[0].segments[0].style == colored("#FFFF00"));
    }
    SUBCASE("unknown and unbalanced tags stay literal") {
        const auto doc = parse_srt(read_file(data_path("srt/06_unknown_tags.srt")));
        CHECK(doc.cues[0].lines[0] == StyledLine::plain("<u>underlined</u> text"));
        CHECK(doc.cues[1].lines[0] == StyledLine::plain("<font face=\"Arial\">typeface</font> stays literal"));
        CHECK(doc.cues[2].lines[0] == StyledLine::plain("an <i>unclosed italic"));
        CHECK(doc.cues[3].lines[0] == StyledLine::plain("a stray </b> close and 3 < 4 > 2"));
        CHECK(doc.cues[4].lines[0] == StyledLine::plain("{\\an8}<font color=yellow>named</font> color"));
    }
    SUBCASE("cross-nested and multi-line styling") {
        const auto doc = parse_srt(read_file(data_path("srt/11_nesting.srt")));
        REQUIRE(doc.cues.size() == 4); // the cue holding only "<i></i>" is dropped
        StyleSet italic;
        italic.italic = true;
        StyleSet bold;
        bold.bold = true;
        StyleSet both = italic;
        both.bold = true;
        CHECK(doc.cues[0].lines[0].segments[0] == Segment{"upper case", italic});
        CHECK(doc.cues[1].lines[0].segments == std::vector<Segment>{{"both", both}, {" bold only", bold}});
        StyleSet red = bold, green = bold;
        red.color = "#FF0000";
        green.color = "#00FF00";
        CHECK(doc.cues[2].lines[0].segments ==
              std::vector<Segment>{{"red ", red}, {"green", green}, {" red", red}});
        REQUIRE(doc.cues[3].lines.size() == 2);
        CHECK(doc.cues[3].lines[1].segments[0] == Segment{"two lines", italic});
    }
}

TEST_CASE("serialize emits the exact block") {
    Document doc;
    doc.cues.push_back({1, {1000}, {2000}, {StyledLine::plain("Hello")}});
    CHECK(serialize_srt(doc) == "1\n00:00:01,000 --> 00:00:02,000\nHello\n\n");
}

TEST_CASE("serialize renumbers") {
    Document doc;
    doc.cues.push_back({3, {1000}, {2000}, {StyledLine::plain("a")}});
    doc.cues.push_back({7, {3000}, {4000}, {StyledLine::plain("b")}});
    const auto text = serialize_srt(doc);
    CHECK(text == "1\n00:00:01,000 --> 00:00:02,000\na\n\n2\n00:00:03,000 --> 00:00:04,000\nb\n\n");
}

TEST_CASE("serialize keeps tags open across segments") {
    StyledLine line;
    StyleSet italic;
    italic.italic = true;
    StyleSet italic_yellow = italic;
    italic_yellow.color = "#FFFF00";
    line.append("a ", italic);
    line.append("spite", italic_yellow);
    line.append(" visit", italic);
    CHECK(serialize_line(line) == "<i>a <font color=\"#FFFF00\">spite</font> visit</i>");
}

TEST_CASE("CRLF and BOM are recorded, output is LF without BOM") {
    const auto crlf = parse_srt(read_file(data_path("srt/04_crlf.srt")));
    CHECK(crlf.source_newline == Newline::CRLF);
    CHECK(serialize_srt(crlf).find('\r') == std::string::npos);

    const auto bom = parse_srt(read_file(data_path("srt/05_bom.srt")));
    CHECK(bom.had_bom);
    CHECK(bom.cues[0].lines[0].text() == "The settlement is final.");
    CHECK(serialize_srt(bom).rfind("1\n", 0) == 0);
}

TEST_CASE("overlapping cues are sorted stably and renumbered") {
    const auto doc = parse_srt(read_file(data_path("srt/03_overlap.srt")));
    REQUIRE(doc.cues.size() == 6);
    std::vector<std::string> texts;
    for (const auto& c : doc.cues) texts.push_back(c.text());
    CHECK(texts == std::vector<std::string>{"- I told you already.", "- No, you didn't!", "Fine.", "Then we go home.",
                                            "Same start A.", "Same start B."});
    for (std::size_t i = 0; i < doc.cues.size(); ++i) CHECK(doc.cues[i].index == static_cast<int>(i + 1));
    CHECK_FALSE(validate(doc));
}

TEST_CASE("blocks without an index line") {
    const auto doc = parse_srt(read_file(data_path("srt/10_no_index_long.srt")));
    REQUIRE(doc.cues.size() == 3);
    CHECK(doc.cues[0].index == 1);
    CHECK(doc.cues[1].index == 2);
    CHECK(doc.cues[2].index == 7);
    CHECK(doc.cues[2].start.ms == 363723004);
}

TEST_CASE("parse errors") {
    SUBCASE("malformed timestamp reports the block") {
        try {
            parse_srt("1\n00:00:01,000 --> 00:00:02,000\nok\n\n2\n00:00:0x,000 --> 00:00:04,000\nbad\n");
            FAIL("expected SrtError");
        } catch (const SrtError& e) {
            CHECK(e.kind() == SrtError::Kind::MalformedTimestamp);
            CHECK(e.block() == 2);
        }
    }
    SUBCASE("missing timing line") {
        CHECK_THROWS_AS(parse_srt("1\nHello\n"), SrtError);
    }
    SUBCASE("end not after start") {
        try {
            parse_srt("1\n00:00:02,000 --> 00:00:02,000\nx\n");
            FAIL("expected SrtError");
        } catch (const SrtError& e) {
            CHECK(e.kind() == SrtError::Kind::MalformedTimestamp);
            CHECK(e.block() == 1);
        }
    }
    SUBCASE("bad index") {
        try {
            parse_srt("one\n00:00:01,000 --> 00:00:02,000\nx\n");
            FAIL("expected SrtError");
        } catch (const SrtError& e) {
            CHECK(e.kind() == SrtError::Kind::MalformedIndex);
        }
    }
    SUBCASE("empty document") {
        for (const char* text : {"", "\n\n", "\xEF\xBB\xBF", "1\n00:00:01,000 --> 00:00:02,000\n<i></i>\n"}) {
            try {
                parse_srt(text);
                FAIL("expected SrtError");
            } catch (const SrtError& e) {
                CHECK(e.kind() == SrtError::Kind::EmptyDocument);
            }
        }
    }
}

TEST_CASE("12-cue styled fixture round-trips structurally") {
    const auto doc = parse_srt(read_file(data_path("srt/12_styled12.srt")));
    REQUIRE(doc.cues.size() == 12);
    CHECK(parse_srt(serialize_srt(doc)) == doc);
}

TEST_CASE("serialize(parse(T)) equals the normalized text of canonical fixtures") {
    for (const char* name : {"01_plain.srt", "02_styled.srt", "04_crlf.srt", "05_bom.srt", "08_sound_speaker.srt",
                             "09_unicode.srt", "12_styled12.srt"}) {
        CAPTURE(name);
        const auto text = read_file(data_path(std::string("srt/") + name));
        CHECK(serialize_srt(parse_srt(text)) == normalize(text));
    }
}

TEST_CASE("every fixture reaches a fixed point and keeps its visible text") {
    for (const auto& path : srt_corpus()) {
        CAPTURE(path.filename().string());
        const auto text = read_file(path);
        const auto doc = parse_srt(text);
        CHECK_FALSE(validate(doc));
        const auto once = serialize_srt(doc);
        CHECK(serialize_srt(parse_srt(once)) == once);
        CHECK(same_cues_ignoring_index(parse_srt(once), doc));
        CHECK(visible_texts(once) == visible_texts(text));
    }
}

TEST_CASE("property: random documents round-trip") {
    std::mt19937 rng(20240611);
    for (int i = 0; i < 300; ++i) {
        const auto doc = random_document(rng, {.overlaps = true});
        REQUIRE_FALSE(validate(doc));
        const auto text = serialize_srt(doc);
        const auto back = parse_srt(text);
        REQUIRE(same_content(back, doc));
        CHECK(serialize_srt(back) == text);
    }
}

TEST_CASE("property: literal tag-like text reaches a fixed point") {
    std::mt19937 rng(77);
    for (int i = 0; i < 300; ++i) {
        const auto doc = random_document(rng, {.literal_markup = true});
        const auto once = serialize_srt(parse_srt(serialize_srt(doc)));
        CHECK(serialize_srt(parse_srt(once)) == once);
        CHECK(visible_texts(once) == visible_texts(serialize_srt(doc)));
    }
}
