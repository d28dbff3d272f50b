#pragma once

#include "twochoices/graph.hpp"
#include "twochoices/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace twochoices {

enum class Color : std::uint8_t { Red = 0, Blue = 1 };

constexpr Color opposite(Color c) noexcept { return c == Color::Red ? Color::Blue : Color::Red; }

/// One color per node, indexed by node id.
class Configuration {
public:
    Configuration() = default;
    Configuration(std::size_t count, Color fill) : colors_(count, fill) {}
    explicit Configuration(std::vector<Color> colors) : colors_(std::move(colors)) {}

    [[nodiscard]] std::size_t size() const noexcept { return colors_.size(); }
    [[nodiscard]] Color operator[](std::size_t u) const noexcept { return colors_[u]; }
    void set(std::size_t u, Color c) noexcept { colors_[u] = c; }
    [[nodiscard]] std::span<const Color> colors() const noexcept { return colors_; }
    [[nodiscard]] std::span<Color> colors() noexcept { return colors_; }

    /// Red and blue exchanged everywhere.
    [[nodiscard]] Configuration flipped() const;
    [[nodiscard]] bool monochromatic() const noexcept;

    friend bool operator==(const Configuration&, const Configuration&) = default;

private:
    std::vector<Color> colors_;
};

/// s_i = |R_i| - |B_i| for community i.
struct BiasPair {
    int s1 = 0;
    int s2 = 0;
    friend bool operator==(const BiasPair&, const BiasPair&) = default;
};

[[nodiscard]] BiasPair biases(const ClusteredRegularGraph& g, const Configuration& c);

/// Number of nodes holding the community's minority color, (n - |s|) / 2.
[[nodiscard]] constexpr int minority_count(int n, int bias) noexcept { return (n - (bias < 0 ? -bias : bias)) / 2; }

enum class Outcome { Monochromatic, AlmostClustered, Mixed };

[[nodiscard]] std::string_view to_string(Outcome o) noexcept;

inline constexpr double kDefaultKappa = 8.0;

/// κ·ln n / ln ln n, the outlier scale of an almost-clustered configuration.
/// Zero for n < 3, where ln ln n is not positive.
[[nodiscard]] double outlier_scale(int n, double kappa) noexcept;

/// Monochromatic iff |s1| = |s2| = n with equal sign. AlmostClustered iff
/// s1·s2 < 0 and n - |s_i| <= floor(κ·ln n / ln ln n) for both i.
[[nodiscard]] Outcome classify(BiasPair bias, int n, double kappa = kDefaultKappa);

/// Fair independent color per node, from the node's round -1 draw.
[[nodiscard]] Configuration random_init(const ClusteredRegularGraph& g, const RngContext& ctx);
[[nodiscard]] Configuration random_init(const ClusteredRegularGraph& g, std::uint64_t seed);

/// Community i gets (n + s_i) / 2 red nodes, the lowest ids, the rest blue.
[[nodiscard]] Configuration seeded_init(const ClusteredRegularGraph& g, int s1, int s2);

enum class Rule { TwoChoices, Voter };

[[nodiscard]] std::string_view to_string(Rule r) noexcept;

/// Synchronous update of every node from `in` into `out` using the draws of
/// ctx.round. Returns the biases of `out`. The output is identical for any
/// worker count.
BiasPair step_into(const ClusteredRegularGraph& g, const Configuration& in, Configuration& out, Rule rule,
                   const RngContext& ctx, int workers = 1);

/// Each node draws two neighbors with replacement (draws 0 and 1) and adopts
/// their color iff they agree.
[[nodiscard]] Configuration step_two_choices(const ClusteredRegularGraph& g, const Configuration& c,
                                             const RngContext& ctx, int workers = 1);

/// Each node copies the color of one uniformly drawn neighbor (draw 0).
[[nodiscard]] Configuration step_voter(const ClusteredRegularGraph& g, const Configuration& c,
                                       const RngContext& ctx, int workers = 1);

struct StopCriteria {
    int max_rounds = 0;
    bool stop_on_monochromatic = false;
    /// Stop once classify(·, n, κ) reports AlmostClustered.
    std::optional<double> stop_on_almost_clustered;
    /// κ for the terminal classification.
    double kappa = kDefaultKappa;
};

struct RoundRecord {
    std::int64_t round = 0;
    int s1 = 0;
    int s2 = 0;
    int minority1 = 0;
    int minority2 = 0;
    friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

struct Trajectory {
    std::vector<RoundRecord> records;
    Outcome terminal = Outcome::Mixed;
    int rounds_executed = 0;
    Configuration final_configuration;
    /// Filled only when requested; snapshots[k] belongs to records[k].
    std::vector<Configuration> snapshots;
};

struct RunOptions {
    int workers = 1;
    bool keep_snapshots = false;
};

/// Iterates `rule` from c0, starting at round ctx.round, until a stop criterion
/// fires. Criteria are checked before every step, so a monochromatic c0 with
/// stop_on_monochromatic executes no step.
[[nodiscard]] Trajectory run(const ClusteredRegularGraph& g, const Configuration& c0, Rule rule,
                             const StopCriteria& stop, const RngContext& ctx, RunOptions options = {});

/// Header "round,s1,s2,minority1,minority2"; the last row carries
/// ",terminal=<class>".
void write_trajectory_csv(std::ostream& out, const Trajectory& t);

} // namespace twochoices
