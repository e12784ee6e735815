#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace gsub::cli {

enum ExitCode : int {
    kOk = 0,
    kInputError = 1,
    kAttainability = 2,
    kPsdFailure = 3,
    kSkipped = 4,
    kVerifyFailed = 5,
};

/// Fully resolved run configuration (defaults < config file < flags).
struct RunConfig {
    std::string command;
    std::string marginal = "normal";
    std::string acf = "white";
    std::string acf_file;
    std::string input;
    std::size_t T = 4096;
    std::size_t reps = 2000;
    std::size_t lags = 5;
    std::uint64_t seed = 42;
    double alpha = 0.01;
    std::string out = "gsub_out";
    std::size_t bandwidth = 0;
    double hurst = 0.7;
    bool repair_psd = false;
    std::size_t truncation = 64;
    std::vector<std::size_t> t_grid;

    /// key = value lines, sorted by key; readable by parse_config_text.
    [[nodiscard]] std::map<std::string, std::string> to_map() const;
};

/// "key = value" lines; '#' starts a comment. Unknown keys are an error.
[[nodiscard]] std::map<std::string, std::string> parse_config_text(const std::string& text);

/// Applies `layers` in order over the defaults for `command`.
[[nodiscard]] RunConfig resolve(const std::vector<std::map<std::string, std::string>>& layers);

/// Text of the manifest written next to every command's output.
[[nodiscard]] std::string manifest_text(const RunConfig& cfg);

/// Runs one command; returns the process exit code. Output files are written
/// atomically: either every file of the command appears, or none.
int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// argv entry point (argv[0] is the program name).
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace gsub::cli
