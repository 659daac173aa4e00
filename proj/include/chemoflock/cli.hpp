#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>

namespace chemoflock {

// Writes through a temporary file in the same directory, then renames it
// over `path`, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);

// Entry point of the command-line tool. Subcommands: run, oracle-compare,
// lyapunov, cm-decay. Returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace chemoflock
