#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kwcap::cli {

enum ExitCode : int {
    kOk = 0,
    kInputError = 1,     // unreadable or malformed subtitle file
    kConfigError = 2,    // flags, config file, wordlists, output location
    kAlignmentError = 3, // unreadable or malformed alignment JSON
};

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Writes via a temporary file in the same directory and renames it into
/// place, so a failed run never leaves a half-written file at `path`.
/// Throws std::runtime_error on failure.
void write_atomically(const std::filesystem::path& path, std::string_view content);

/// Stages every file first and renames them into place only once all were
/// written; on failure the staged files are removed.
void write_all_atomically(const std::vector<std::pair<std::filesystem::path, std::string>>& files);

} // namespace kwcap::cli
