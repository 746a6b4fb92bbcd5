#include "kwcap/lexicon.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "utf8.hpp"

namespace kwcap {

namespace {

constexpr std::array<std::string_view, 7> kLevelNames{"A1", "A2", "B1", "B2", "C1", "C2", "Unknown"};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw WordlistError(WordlistError::Kind::Unreadable, path.string(), 0, "cannot open file");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Calls fn(line_number, raw_line, content) for each non-empty line; content
// has comments and surrounding whitespace removed.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    std::size_t line_no = 0;
    for (std::size_t pos = 0; pos < text.size();) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view raw = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        std::string_view content = raw.substr(0, raw.find('#'));
        content = utf8::trim(content);
        if (content.empty()) continue;
        fn(line_no, raw, content);
    }
}

std::vector<std::string_view> split_fields(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = s.find(',', pos);
        out.push_back(utf8::trim(s.substr(pos, comma == std::string_view::npos ? comma : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

[[noreturn]] void malformed(const std::string& source, std::size_t line, const std::string& detail) {
    throw WordlistError(WordlistError::Kind::MalformedLine, source, line, detail);
}

std::string checked_form(std::string_view field, const std::string& source, std::size_t line) {
    if (field.empty()) malformed(source, line, "empty word form");
    return normalize_form(field);
}

CefrLevel checked_level(std::string_view field, const std::string& source, std::size_t line) {
    const auto level = parse_level(field);
    if (!level) malformed(source, line, "unknown CEFR level '" + std::string(field) + "'");
    return *level;
}

void keep_lowest(std::map<std::string, LexiconEntry, std::less<>>& entries, const std::string& form,
                 LexiconEntry entry) {
    auto [it, inserted] = entries.try_emplace(form, entry);
    if (!inserted && below(entry.level, it->second.level)) it->second = entry;
    // Unknown never beats a known level.
    if (!inserted && it->second.level == CefrLevel::Unknown && entry.level != CefrLevel::Unknown) {
        it->second = entry;
    }
}

// Possessive and pronoun clitics: "nicole's" -> "nicole", "you're" -> "you".
std::optional<std::string_view> strip_clitic(std::string_view form) {
    static constexpr std::array<std::string_view, 6> kClitics{"'s", "'m", "'re", "'ve", "'ll", "'d"};
    for (auto c : kClitics) {
        if (form.size() > c.size() && form.ends_with(c)) return form.substr(0, form.size() - c.size());
    }
    return std::nullopt;
}

// nullopt: no decision from this form alone.
std::optional<bool> classify_form(const Lexicon& lex, std::string_view form) {
    if (const auto* rule = lex.override_for(form)) {
        switch (rule->directive) {
        case Directive::ForceKeyword: return true;
        case Directive::ForceNonKeyword:
        case Directive::ProperName: return false;
        case Directive::ForceLevel: return !below(rule->level.value_or(CefrLevel::Unknown), lex.threshold());
        }
    }
    if (has_digit(form)) return false;
    if (lex.is_proper_name(form)) return false;
    if (const auto* entry = lex.find(form)) return !below(entry->level, lex.threshold());
    return std::nullopt;
}

bool sentence_terminator(std::string_view p) {
    return p == "." || p == "!" || p == "?" || p == "\xE2\x80\xA6";
}

} // namespace

std::optional<CefrLevel> parse_level(std::string_view text) {
    text = utf8::trim(text);
    std::string up(text);
    for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (std::size_t i = 0; i + 1 < kLevelNames.size(); ++i) {
        if (up == kLevelNames[i]) return static_cast<CefrLevel>(i);
    }
    if (up == "UNKNOWN") return CefrLevel::Unknown;
    return std::nullopt;
}

std::string_view to_string(CefrLevel level) { return kLevelNames[static_cast<std::size_t>(level)]; }

bool below(CefrLevel level, CefrLevel threshold) {
    if (level == CefrLevel::Unknown || threshold == CefrLevel::Unknown) return false;
    return static_cast<int>(level) < static_cast<int>(threshold);
}

std::string_view to_string(EntrySource source) {
    switch (source) {
    case EntrySource::Oxford: return "oxford";
    case EntrySource::Family: return "family";
    case EntrySource::Override: return "override";
    }
    return "?";
}

WordlistError::WordlistError(Kind kind, std::string file, std::size_t line, const std::string& detail)
    : std::runtime_error(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + detail),
      kind_(kind),
      file_(std::move(file)),
      line_(line) {}

GradedList parse_graded_list(std::string_view text, std::string source) {
    GradedList list{std::move(source), {}};
    for_each_line(text, [&](std::size_t line, std::string_view, std::string_view content) {
        const auto fields = split_fields(content);
        if (fields.size() != 2) malformed(list.source, line, "expected 'form,level'");
        list.entries.emplace_back(checked_form(fields[0], list.source, line),
                                  checked_level(fields[1], list.source, line));
    });
    return list;
}

FamilyList parse_family_list(std::string_view text, std::string source) {
    FamilyList list{std::move(source), {}};
    for_each_line(text, [&](std::size_t line, std::string_view raw, std::string_view content) {
        const bool indented = raw.front() == ' ' || raw.front() == '\t';
        const auto fields = split_fields(content);
        if (indented) {
            if (list.families.empty()) malformed(list.source, line, "member line before any family head");
            if (fields.size() != 1) malformed(list.source, line, "member line must hold a single form");
            list.families.back().members.push_back(checked_form(fields[0], list.source, line));
        } else {
            if (fields.size() != 2) malformed(list.source, line, "expected family head 'head,level'");
            list.families.push_back(
                {checked_form(fields[0], list.source, line), checked_level(fields[1], list.source, line), {}});
        }
    });
    return list;
}

OverrideList parse_overrides(std::string_view text, std::string source) {
    OverrideList list{std::move(source), {}};
    for_each_line(text, [&](std::size_t line, std::string_view, std::string_view content) {
        const auto fields = split_fields(content);
        if (fields.size() < 2 || fields.size() > 3) malformed(list.source, line, "expected 'form,directive[,level]'");
        const auto form = checked_form(fields[0], list.source, line);
        OverrideRule rule;
        const auto d = fields[1];
        if (d == "force_level") {
            rule.directive = Directive::ForceLevel;
            if (fields.size() != 3) malformed(list.source, line, "force_level needs a level");
            rule.level = checked_level(fields[2], list.source, line);
        } else {
            if (d == "force_keyword") {
                rule.directive = Directive::ForceKeyword;
            } else if (d == "force_non_keyword") {
                rule.directive = Directive::ForceNonKeyword;
            } else if (d == "proper_name") {
                rule.directive = Directive::ProperName;
            } else {
                malformed(list.source, line, "unknown directive '" + std::string(d) + "'");
            }
            if (fields.size() == 3) malformed(list.source, line, "only force_level takes a level");
        }
        auto [it, inserted] = list.rules.try_emplace(form, rule);
        if (!inserted && !(it->second == rule)) {
            throw WordlistError(WordlistError::Kind::ConflictingOverride, list.source, line,
                                "conflicting override for '" + form + "'");
        }
    });
    return list;
}

const LexiconEntry* Lexicon::find(std::string_view form) const {
    const auto it = entries_.find(form);
    return it == entries_.end() ? nullptr : &it->second;
}

const OverrideRule* Lexicon::override_for(std::string_view form) const {
    const auto it = overrides_.find(form);
    return it == overrides_.end() ? nullptr : &it->second;
}

bool Lexicon::is_proper_name(std::string_view form) const { return proper_names_.contains(form); }

Lexicon Lexicon::with_threshold(CefrLevel threshold) const {
    if (threshold == CefrLevel::A1 || threshold == CefrLevel::Unknown) {
        throw std::invalid_argument("keyword threshold must be between A2 and C2");
    }
    Lexicon copy = *this;
    copy.threshold_ = threshold;
    return copy;
}

Lexicon Lexicon::with_proper_names(const std::set<std::string>& names) const {
    Lexicon copy = *this;
    copy.proper_names_.insert(names.begin(), names.end());
    return copy;
}

Lexicon build_lexicon(const GradedList& graded, std::span<const FamilyList> families, const OverrideList& overrides,
                      CefrLevel threshold) {
    Lexicon lex;
    for (const auto& [form, level] : graded.entries) keep_lowest(lex.entries_, form, {level, EntrySource::Oxford});

    std::map<std::string, LexiconEntry, std::less<>> propagated;
    for (const auto& list : families) {
        for (const auto& fam : list.families) {
            keep_lowest(propagated, fam.head, {fam.level, EntrySource::Family});
            for (const auto& m : fam.members) keep_lowest(propagated, m, {fam.level, EntrySource::Family});
        }
    }
    for (auto& [form, entry] : propagated) lex.entries_.try_emplace(form, entry);

    for (const auto& [form, rule] : overrides.rules) {
        lex.overrides_.emplace(form, rule);
        if (rule.directive == Directive::ForceLevel) {
            lex.entries_.insert_or_assign(form, LexiconEntry{*rule.level, EntrySource::Override});
        } else if (rule.directive == Directive::ProperName) {
            lex.proper_names_.insert(form);
        }
    }
    return lex.with_threshold(threshold);
}

Lexicon load_lexicon(const std::filesystem::path& graded, std::span<const std::filesystem::path> families,
                     const std::optional<std::filesystem::path>& overrides, CefrLevel threshold) {
    const auto graded_list = parse_graded_list(read_file(graded), graded.string());
    std::vector<FamilyList> family_lists;
    for (const auto& path : families) family_lists.push_back(parse_family_list(read_file(path), path.string()));
    OverrideList override_list;
    if (overrides) override_list = parse_overrides(read_file(*overrides), overrides->string());
    return build_lexicon(graded_list, family_lists, override_list, threshold);
}

bool is_keyword(const Lexicon& lex, const Token& token) {
    if (token.kind != TokenKind::Word) return false;
    if (auto decided = classify_form(lex, token.normalized)) return *decided;
    if (auto base = strip_clitic(token.normalized)) {
        if (auto decided = classify_form(lex, *base)) return *decided;
    }
    return true;
}

KeywordAnnotation annotate(const Lexicon& lex, const Document& doc) {
    KeywordAnnotation ann;
    ann.per_cue.assign(doc.cues.size(), 0);
    for (const auto& token : tokenize(doc)) {
        if (is_keyword(lex, token)) {
            ann.keywords.insert(token.pos);
            ++ann.per_cue[token.pos.cue];
        }
    }
    return ann;
}

std::set<std::string> detect_proper_names(const Document& doc, const Lexicon& lex) {
    struct Tally {
        bool always_capitalized = true;
        bool seen_mid_sentence = false;
    };
    std::map<std::string, Tally> tallies;

    bool sentence_start = true;
    std::size_t current_cue = static_cast<std::size_t>(-1);
    for (const auto& token : tokenize(doc)) {
        if (token.pos.cue != current_cue) {
            current_cue = token.pos.cue;
            sentence_start = true;
        }
        switch (token.kind) {
        case TokenKind::SpeakerLabel:
        case TokenKind::SoundDescription: sentence_start = true; continue;
        case TokenKind::Punctuation:
            if (sentence_terminator(token.surface)) sentence_start = true;
            continue;
        case TokenKind::Word: break;
        }

        const bool initial = sentence_start;
        sentence_start = false;
        if (has_digit(token.normalized)) continue;
        const auto first = utf8::decode(token.surface, 0).cp;
        if (!utf8::is_word_char(first)) continue;

        std::string form = token.normalized;
        if (auto base = strip_clitic(form)) form = std::string(*base);
        auto& t = tallies[form];
        const bool capitalized = utf8::is_upper(first);
        t.always_capitalized = t.always_capitalized && capitalized;
        t.seen_mid_sentence = t.seen_mid_sentence || !initial;
    }

    std::set<std::string> names;
    for (const auto& [form, t] : tallies) {
        if (t.always_capitalized && t.seen_mid_sentence && !lex.find(form) && !lex.override_for(form)) {
            names.insert(form);
        }
    }
    return names;
}

} // namespace kwcap
