#pragma once

#include "twochoices/dynamics.hpp"
#include "twochoices/graph.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace twochoices {

inline constexpr std::string_view kVersion = "1.0.0";

using Json = nlohmann::ordered_json;

/// Bad configuration or command line; maps to exit status 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
    XiFrequency,
    Growth,
    Convergence,
    Metastability,
    InitTail,
    Lemma2Scan,
    LecamScan,
    CslAccuracy,
};

[[nodiscard]] std::string_view to_string(ExperimentKind kind) noexcept;
[[nodiscard]] ExperimentKind parse_experiment_kind(std::string_view text);
[[nodiscard]] GenerationMethod parse_generation_method(std::string_view text);
[[nodiscard]] std::string_view to_string(GenerationMethod method) noexcept;
[[nodiscard]] Rule parse_rule(std::string_view text);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::XiFrequency;

    // Graph: loaded from graph_path when set, else generated.
    int n = 1000;
    int a = 128;
    int b = 2;
    GenerationMethod method = GenerationMethod::Pairing;
    std::optional<std::uint64_t> graph_seed; ///< defaults to seed
    std::optional<std::filesystem::path> graph_path;

    Rule rule = Rule::TwoChoices;
    std::uint64_t seed = 1;
    int trials = 100;
    int rounds = 200;
    double kappa = kDefaultKappa;

    // Planted biases (growth, convergence, metastability); unset picks the
    // kind's default.
    std::optional<int> s1;
    std::optional<int> s2;

    std::vector<double> thresholds{0.5, 1.0, 2.0}; ///< init_tail, in units of √n
    int ell = 0;                                    ///< csl_accuracy; 0 means 4⌈log₂ 2n⌉
    int snapshot = 0;                               ///< csl_accuracy; 0 means 6⌈ln 2n⌉
    std::uint64_t pair_budget = 100000;             ///< csl_accuracy, 2n > 4000 only
    double min_accuracy = 0.99;

    // Acceptance assertion; the exit status reflects it only when enabled.
    bool assert_result = false;
    double min_success = 0.95;  ///< convergence, metastability, csl_accuracy
    double min_clustered = 0.05; ///< xi_frequency
    double max_clustered = 0.95;
    double min_mono = 0.05;

    // Execution; neither affects any output byte.
    int workers = 1;
    std::filesystem::path out_dir = ".";
    std::string name; ///< output file stem; defaults to the kind

    /// Applies "key=value". Throws ConfigError naming the key on failure.
    void set(std::string_view key, std::string_view value);
    void apply_override(std::string_view assignment);

    [[nodiscard]] std::string stem() const { return name.empty() ? std::string(to_string(kind)) : name; }

    /// Every setting that can change results, with kind defaults resolved
    /// against the graph size n.
    [[nodiscard]] Json resolved(int graph_n) const;
};

/// Flat key=value text; '#' starts a comment, blank lines are ignored.
[[nodiscard]] ExperimentConfig parse_config(std::istream& in, std::string_view origin = "<config>");
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

struct ExperimentResult {
    Json summary; ///< carries "version", "config" and the kind's results
    std::string csv;
    bool passed = true;
    bool asserted = false;

    [[nodiscard]] int exit_code() const noexcept { return asserted && !passed ? 1 : 0; }
};

/// Deterministic in the config: any worker count yields identical bytes.
[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Runs the experiment on an already built graph.
[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& cfg, const ClusteredRegularGraph& g);

/// Writes <out_dir>/<stem>.json and <out_dir>/<stem>.csv, creating out_dir.
void write_result(const ExperimentConfig& cfg, const ExperimentResult& result);

/// The graph named by the config, loaded or generated.
[[nodiscard]] ClusteredRegularGraph config_graph(const ExperimentConfig& cfg);

/// One line of `verify` output.
struct CheckRecord {
    std::string check;
    Json params;
    double observed = 0.0;
    double bound = 0.0;
    bool pass = false;

    [[nodiscard]] Json to_json() const;
};

/// Structural, oracle and bound checks on one graph, `trials` sampled
/// configurations per check.
[[nodiscard]] std::vector<CheckRecord> verify_graph(const ClusteredRegularGraph& g, std::uint64_t seed, int trials,
                                                    int workers = 1);

/// Smallest s >= target with the parity of n, clamped to n.
[[nodiscard]] int parity_adjusted(int n, long long target);

/// Fixed-precision text for CSV cells.
[[nodiscard]] std::string format_real(double x);

} // namespace twochoices
