#include "cli_app.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "kwcap/alignment.hpp"
#include "kwcap/lexicon.hpp"
#include "kwcap/scene.hpp"
#include "kwcap/srt.hpp"
#include "kwcap/variants.hpp"

namespace kwcap::cli {

namespace {

namespace fs = std::filesystem;

/// An error that maps straight to an exit code.
struct Failure {
    ExitCode code;
    std::string message;
    bool usage = false; // also point at --help
};

struct Options {
    std::string graded;
    std::vector<std::string> families;
    std::string overrides;
    std::string threshold = "B2";
    std::string alignment;
    std::vector<std::string> variants;
    std::string color = "#FFFF00";
    std::int64_t min_display_ms = 500;
    std::int64_t extension_ms = 300;
    long long parts = 30;
    long long top = 4;
    std::string out_dir = ".";
    std::string input;
};

std::optional<std::string> slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Lexicon load_configured_lexicon(const Options& o) {
    if (o.graded.empty()) throw Failure{kConfigError, "a graded wordlist is required (--graded)"};
    const auto level = parse_level(o.threshold);
    if (!level || *level == CefrLevel::A1 || *level == CefrLevel::Unknown) {
        throw Failure{kConfigError, "--threshold must be one of A2, B1, B2, C1, C2"};
    }
    std::vector<fs::path> families(o.families.begin(), o.families.end());
    std::optional<fs::path> overrides;
    if (!o.overrides.empty()) overrides = o.overrides;
    try {
        return load_lexicon(o.graded, families, overrides, *level);
    } catch (const WordlistError& e) {
        throw Failure{kConfigError, e.what()};
    }
}

Document load_document(const std::string& path) {
    const auto text = slurp(path);
    if (!text) throw Failure{kInputError, path + ": cannot open subtitle file"};
    try {
        return parse_srt(*text);
    } catch (const SrtError& e) {
        throw Failure{kInputError, path + ": " + e.what()};
    }
}

std::vector<AlignedWord> load_alignment(const std::string& path) {
    const auto text = slurp(path);
    if (!text) throw Failure{kAlignmentError, path + ": cannot open alignment file"};
    try {
        return parse_alignment(*text);
    } catch (const AlignmentError& e) {
        throw Failure{kAlignmentError, path + ": " + e.what()};
    }
}

fs::path prepare_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw Failure{kConfigError, dir + ": output directory is not usable"};
    return dir;
}

std::string stem_of(const std::string& input) { return fs::path(input).stem().string(); }

int cmd_lexicon_build(const Options& o, std::ostream& out) {
    const auto lex = load_configured_lexicon(o);

    std::map<EntrySource, std::size_t> by_source;
    std::map<CefrLevel, std::size_t> by_level;
    std::size_t below_threshold = 0;
    for (const auto& [form, entry] : lex.entries()) {
        ++by_source[entry.source];
        ++by_level[entry.level];
        if (below(entry.level, lex.threshold())) ++below_threshold;
    }

    out << "entries: " << lex.entries().size() << '\n';
    for (auto s : {EntrySource::Oxford, EntrySource::Family, EntrySource::Override}) {
        out << "  " << to_string(s) << ": " << by_source[s] << '\n';
    }
    out << "levels:\n";
    for (auto l : {CefrLevel::A1, CefrLevel::A2, CefrLevel::B1, CefrLevel::B2, CefrLevel::C1, CefrLevel::C2,
                   CefrLevel::Unknown}) {
        out << "  " << to_string(l) << ": " << by_level[l] << '\n';
    }
    out << "overrides: " << lex.overrides().size() << '\n';
    out << "proper names: " << lex.proper_names().size() << '\n';
    out << "threshold: " << to_string(lex.threshold()) << '\n';
    out << "non-keyword forms: " << below_threshold << '\n';
    return kOk;
}

std::vector<Variant> requested_variants(const Options& o) {
    std::vector<Variant> out;
    const std::vector<std::string> names = o.variants.empty() ? std::vector<std::string>{"all"} : o.variants;
    for (const auto& name : names) {
        if (name == "all") {
            out = {Variant::Standard, Variant::KeywordHighlights, Variant::TimedKeywords,
                   Variant::TimedKeywordHighlights};
            break;
        }
        const auto v = parse_variant(name);
        if (!v) throw Failure{kConfigError, "unknown variant '" + name + "'", true};
        if (std::find(out.begin(), out.end(), *v) == out.end()) out.push_back(*v);
    }
    return out;
}

int cmd_generate(const Options& o, std::ostream& out, std::ostream& err) {
    const auto variants = requested_variants(o);
    VariantParams params;
    params.highlight_color = o.color;
    params.min_display_ms = o.min_display_ms;
    params.extension_ms = o.extension_ms;
    try {
        params = params.validated();
    } catch (const std::invalid_argument& e) {
        throw Failure{kConfigError, e.what()};
    }

    auto lex = load_configured_lexicon(o);
    const auto doc = load_document(o.input);
    std::optional<std::vector<AlignedWord>> aligned;
    if (!o.alignment.empty()) aligned = load_alignment(o.alignment);
    const auto dir = prepare_out_dir(o.out_dir);

    lex = lex.with_proper_names(detect_proper_names(doc, lex));
    const auto ann = annotate(lex, doc);

    WordTiming timing;
    if (std::any_of(variants.begin(), variants.end(), is_timed)) {
        if (!aligned) {
            err << "notice: no alignment given; timed variants use proportional word timing\n";
            timing = proportional_timing(doc);
        } else {
            const auto result = align_words(doc, *aligned);
            if (result.fell_back) {
                err << "notice: alignment matched " << result.matched << " of " << result.word_tokens
                    << " words; timed variants use proportional word timing\n";
            }
            timing = result.timing;
        }
    }

    // Render everything before touching the output directory.
    std::vector<std::pair<fs::path, std::string>> outputs;
    for (auto v : variants) {
        params.variant = v;
        outputs.emplace_back(dir / (stem_of(o.input) + variant_suffix(v)),
                             serialize_srt(generate(doc, ann, timing, params)));
    }
    write_all_atomically(outputs);
    for (const auto& [path, text] : outputs) out << path.string() << '\n';
    return kOk;
}

int cmd_analyze(const Options& o, std::ostream& out) {
    if (o.parts < 1) throw Failure{kConfigError, "--parts must be at least 1", true};
    if (o.top < 1 || o.top > o.parts) throw Failure{kConfigError, "--top must be between 1 and --parts", true};

    auto lex = load_configured_lexicon(o);
    const auto doc = load_document(o.input);
    const auto dir = prepare_out_dir(o.out_dir);

    lex = lex.with_proper_names(detect_proper_names(doc, lex));
    const auto ann = annotate(lex, doc);
    const auto stats = partition_density(doc, ann, o.parts);
    const auto top = top_partitions(stats, static_cast<std::size_t>(o.top));

    const auto csv_path = dir / (stem_of(o.input) + ".partitions.csv");
    write_atomically(csv_path, partitions_csv(stats));

    out << partitions_table(stats);
    out << "\ntop " << top.size() << " partitions by keyword count:\n";
    out << partitions_table(top);
    out << "\nwrote " << csv_path.string() << '\n';
    return kOk;
}

} // namespace

void write_atomically(const fs::path& path, std::string_view content) {
    write_all_atomically({{path, std::string(content)}});
}

void write_all_atomically(const std::vector<std::pair<fs::path, std::string>>& files) {
    std::vector<fs::path> staged;
    auto discard = [&] {
        std::error_code ec;
        for (const auto& tmp : staged) fs::remove(tmp, ec);
    };
    for (const auto& [path, content] : files) {
        auto tmp = path;
        tmp += ".tmp";
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (f) staged.push_back(tmp);
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.close();
        if (!f) {
            discard();
            throw std::runtime_error(path.string() + ": cannot write output");
        }
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
        std::error_code ec;
        fs::rename(staged[i], files[i].first, ec);
        if (ec) {
            discard();
            throw std::runtime_error(files[i].first.string() + ": cannot move output into place");
        }
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Keyword-enhanced caption generator for SubRip files", "kwcap"};
    app.set_config("--config", "", "Read flags from a key=value file (command-line flags take precedence)");
    app.fallthrough();
    app.require_subcommand(1);

    app.add_option("--graded", o.graded, "Graded wordlist (form,level)");
    app.add_option("--family", o.families, "Word family list (repeatable)");
    app.add_option("--overrides", o.overrides, "Override file (form,directive[,level])");
    app.add_option("--threshold", o.threshold, "Lowest CEFR level counted as a keyword (A2..C2)")
        ->capture_default_str();
    app.add_option("--alignment", o.alignment, "Forced-alignment JSON for timed variants");
    app.add_option("--variant", o.variants, "standard, kw, timedkw, timedhl or all (repeatable)")->delimiter(',');
    app.add_option("--color", o.color, "Highlight color #RRGGBB")->capture_default_str();
    app.add_option("--min-display-ms", o.min_display_ms, "Keywords shown shorter than this are extended")
        ->capture_default_str();
    app.add_option("--extension-ms", o.extension_ms, "Display extension for short keywords")->capture_default_str();
    app.add_option("--parts", o.parts, "Number of equal-duration partitions")->capture_default_str();
    app.add_option("--top", o.top, "Number of top partitions to report")->capture_default_str();
    app.add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();

    auto* lexicon = app.add_subcommand("lexicon", "Wordlist tools");
    lexicon->require_subcommand(1);
    auto* build = lexicon->add_subcommand("build", "Build the lexicon and print a summary");

    auto* generate_cmd = app.add_subcommand("generate", "Write caption variants for a subtitle file");
    generate_cmd->add_option("input", o.input, "Input .srt file")->required();
    bool all = false;
    generate_cmd->add_flag("--all", all, "Write all four variants");

    auto* analyze = app.add_subcommand("analyze", "Keyword density per partition");
    analyze->add_option("input", o.input, "Input .srt file")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kConfigError;
    }
    if (all) o.variants = {"all"};

    try {
        if (build->parsed()) return cmd_lexicon_build(o, out);
        if (generate_cmd->parsed()) return cmd_generate(o, out, err);
        if (analyze->parsed()) return cmd_analyze(o, out);
    } catch (const Failure& f) {
        err << "error: " << f.message << '\n';
        if (f.usage) err << "Run with --help for more information.\n";
        return f.code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return kConfigError;
}

} // namespace kwcap::cli
