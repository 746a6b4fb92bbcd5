#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kwcap/srt.hpp"
#include "kwcap/tokenizer.hpp"

namespace kwcap {

/// CEFR level. A1 < A2 < ... < C2; Unknown sits outside the order and is
/// never "below" any threshold.
enum class CefrLevel : std::uint8_t { A1, A2, B1, B2, C1, C2, Unknown };

std::optional<CefrLevel> parse_level(std::string_view text);
std::string_view to_string(CefrLevel level);

/// True when `level` is a known level strictly below `threshold`.
bool below(CefrLevel level, CefrLevel threshold);

enum class EntrySource { Oxford, Family, Override };
std::string_view to_string(EntrySource source);

struct LexiconEntry {
    CefrLevel level = CefrLevel::Unknown;
    EntrySource source = EntrySource::Oxford;

    bool operator==(const LexiconEntry&) const = default;
};

enum class Directive { ForceLevel, ForceKeyword, ForceNonKeyword, ProperName };

struct OverrideRule {
    Directive directive = Directive::ForceKeyword;
    std::optional<CefrLevel> level; // ForceLevel only

    bool operator==(const OverrideRule&) const = default;
};

class WordlistError : public std::runtime_error {
public:
    enum class Kind { MalformedLine, ConflictingOverride, Unreadable };

    WordlistError(Kind kind, std::string file, std::size_t line, const std::string& detail);

    Kind kind() const { return kind_; }
    const std::string& file() const { return file_; }
    std::size_t line() const { return line_; }

private:
    Kind kind_;
    std::string file_;
    std::size_t line_;
};

// Parsed wordlist files. `source` names the file in error messages.

struct GradedList {
    std::string source;
    std::vector<std::pair<std::string, CefrLevel>> entries;
};

struct WordFamily {
    std::string head;
    CefrLevel level = CefrLevel::Unknown;
    std::vector<std::string> members;
};

struct FamilyList {
    std::string source;
    std::vector<WordFamily> families;
};

struct OverrideList {
    std::string source;
    std::map<std::string, OverrideRule> rules;
};

/// `form,level` per line; `#` starts a comment.
GradedList parse_graded_list(std::string_view text, std::string source);

/// `head,level` lines, each followed by indented member lines (one form each).
FamilyList parse_family_list(std::string_view text, std::string source);

/// `form,directive[,level]` where directive is one of force_level,
/// force_keyword, force_non_keyword, proper_name. A form given two
/// different directives is a ConflictingOverride.
OverrideList parse_overrides(std::string_view text, std::string source);

/// Form -> CEFR level map plus proper names and manual overrides. Immutable
/// once built; the `with_*` helpers return modified copies.
class Lexicon {
public:
    Lexicon() = default;

    const LexiconEntry* find(std::string_view form) const;
    const OverrideRule* override_for(std::string_view form) const;
    bool is_proper_name(std::string_view form) const;

    CefrLevel threshold() const { return threshold_; }

    const std::map<std::string, LexiconEntry, std::less<>>& entries() const { return entries_; }
    const std::map<std::string, OverrideRule, std::less<>>& overrides() const { return overrides_; }
    const std::set<std::string, std::less<>>& proper_names() const { return proper_names_; }

    /// Threshold must be A2..C2.
    Lexicon with_threshold(CefrLevel threshold) const;
    Lexicon with_proper_names(const std::set<std::string>& names) const;

    friend Lexicon build_lexicon(const GradedList&, std::span<const FamilyList>, const OverrideList&, CefrLevel);

private:
    std::map<std::string, LexiconEntry, std::less<>> entries_;
    std::map<std::string, OverrideRule, std::less<>> overrides_;
    std::set<std::string, std::less<>> proper_names_;
    CefrLevel threshold_ = CefrLevel::B2;
};

/// Exact graded forms win over family propagation; a form listed more than
/// once (in either kind of list) takes its lowest level; overrides shadow
/// both.
Lexicon build_lexicon(const GradedList& graded, std::span<const FamilyList> families, const OverrideList& overrides,
                      CefrLevel threshold = CefrLevel::B2);

/// Reads and parses the files, then builds. Unreadable files raise
/// WordlistError::Kind::Unreadable.
Lexicon load_lexicon(const std::filesystem::path& graded, std::span<const std::filesystem::path> families,
                     const std::optional<std::filesystem::path>& overrides, CefrLevel threshold = CefrLevel::B2);

/// Reverse keyword rule: a word is a keyword unless the lexicon places it
/// below the threshold, it is a proper name, or it carries a digit.
/// Override directives take precedence over everything else.
bool is_keyword(const Lexicon& lex, const Token& token);

struct KeywordAnnotation {
    std::set<TokenPosition> keywords;
    std::vector<std::size_t> per_cue; // one count per cue of the annotated Document

    std::size_t total() const { return keywords.size(); }
    bool contains(const TokenPosition& pos) const { return keywords.contains(pos); }
};

KeywordAnnotation annotate(const Lexicon& lex, const Document& doc);

/// Forms capitalized at every occurrence, seen at least once away from a
/// sentence start, and not known to the lexicon.
std::set<std::string> detect_proper_names(const Document& doc, const Lexicon& lex);

} // namespace kwcap
