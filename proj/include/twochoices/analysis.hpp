#pragma once

#include "twochoices/dynamics.hpp"
#include "twochoices/graph.hpp"
#include "twochoices/rng.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace twochoices {

/// Color tracked as "minority" of a community by convention: blue in V1,
/// red in V2 (community 1 leans red, community 2 leans blue).
[[nodiscard]] constexpr Color designated_minority(int community) noexcept
{
    return community == 1 ? Color::Blue : Color::Red;
}

/// Exact E[#nodes of `color` in `community` after one 2-Choices round | c].
/// A node holding `color` keeps it unless both draws hit the other color,
/// a node holding the other color switches iff both draws hit `color`.
/// Neighbor counts are taken over the full graph. O(Σ deg).
[[nodiscard]] double exact_expected_count(const ClusteredRegularGraph& g, const Configuration& c, int community,
                                          Color color);

/// The per-node terms of exact_expected_count, in node order.
[[nodiscard]] std::vector<double> next_color_probabilities(const ClusteredRegularGraph& g, const Configuration& c,
                                                           int community, Color color);

/// exact_expected_count for the designated minority color: E[|B1'|] for
/// community 1 and E[|R2'|] for community 2.
[[nodiscard]] double exact_expected_minority(const ClusteredRegularGraph& g, const Configuration& c, int community);

/// Upper bound on E[|B1'|] given |B1|, |B2| and the constants c1, c2:
///
///   |B1|·[1 - s1/2n + c2²/√n + (2c1/√n)·√((|B2|/|B1|)(1/2 - s1/2n + c2²/√n + c1²|B2|/(n|B1|)))]
///
/// with s1 = n - 2|B1|. The red-minority bound of community 2 is the same
/// call with (|R2|, |R1|). Throws for |B1| = 0, where the form is undefined.
[[nodiscard]] double lemma2_bound(int n, long long minority_here, long long same_color_other, double c1, double c2);

/// Per-node probabilities p_u that u holds the community's minority color
/// after one round, for the nodes of one community.
struct MinorityFlipProfile {
    int community = 1;
    Color minority = Color::Blue;
    std::vector<double> p;
    double sum_p = 0.0;    ///< the Poisson rate of the minority count
    double sum_p_sq = 0.0; ///< Le Cam error term
};

/// Majority-colored u: p_u = (m_u/d)², m_u = neighbors holding the minority.
/// Minority-colored u: p_u = 1 - (M_u/d)², M_u = neighbors holding the majority.
/// Throws if the community is tied (s_i = 0).
[[nodiscard]] MinorityFlipProfile minority_flip_profile(const ClusteredRegularGraph& g, const Configuration& c,
                                                        int community);

/// Exact law of a sum of independent Bernoulli(p_i), via the O(k²)
/// convolution recurrence. With max_value set, only masses 0..max_value are
/// computed; they are still exact.
[[nodiscard]] std::vector<double> poisson_binomial_distribution(std::span<const double> p,
                                                                std::optional<std::size_t> max_value = {});

[[nodiscard]] double poisson_pmf(double lambda, std::size_t k);

/// P[X > t] for X ~ Poisson(lambda).
[[nodiscard]] double poisson_tail(double lambda, double t);

/// Φ̄(x) = 1 - Φ(x) for the standard normal, computed as erfc(x/√2)/2.
[[nodiscard]] double normal_tail(double x);

struct PoissonApproximation {
    /// Σ_k |P[S = k] - Poisson(Σp)(k)|; an upper bound when truncated.
    double l1_distance = 0.0;
    double sum_p = 0.0;
    double sum_p_sq = 0.0;
    std::size_t support = 0;
    bool truncated = false;
    [[nodiscard]] bool within_le_cam() const noexcept { return l1_distance <= 2.0 * sum_p_sq; }
};

inline constexpr std::size_t kExactLeCamLimit = 10000;

/// Distance between the Poisson-binomial law of `p` and Poisson(Σp). Profiles
/// longer than `exact_limit` run the DP only up to a point beyond which both
/// laws have negligible mass, and the remaining tails are added as a bound.
[[nodiscard]] PoissonApproximation poisson_approximation(std::span<const double> p,
                                                         std::size_t exact_limit = kExactLeCamLimit);

struct EventEstimate {
    std::uint64_t trials = 0;
    std::uint64_t successes = 0;
    double estimate = 0.0;
    double low = 0.0;  ///< 95% Wilson interval
    double high = 0.0;
    [[nodiscard]] double half_width() const noexcept { return (high - low) / 2.0; }
};

[[nodiscard]] EventEstimate wilson_interval(std::uint64_t successes, std::uint64_t trials);

/// Trial i gets RngContext{seed, run = i, round = 0}.
using EventTrial = std::function<bool(const RngContext&)>;

[[nodiscard]] EventEstimate estimate_event_probability(const EventTrial& experiment, std::uint64_t trials,
                                                       std::uint64_t seed, int workers = 1);

/// ⌈κ·ln n / ln ln n⌉, the minority ceiling of the metastable phase.
[[nodiscard]] int metastability_threshold(int n, double kappa);

struct MetastabilityReport {
    int threshold = 0;
    std::array<int, 2> max_minority{0, 0};
    /// First round at which some community's minority exceeded the threshold.
    std::optional<std::int64_t> first_violation;
    /// First round at which a bias lost the sign it had at round 0.
    std::optional<std::int64_t> first_sign_flip;
    std::int64_t rounds = 0;
    [[nodiscard]] bool signs_preserved() const noexcept { return !first_sign_flip; }
};

/// Runs 2-Choices from c0 for `rounds` rounds. The minority of each community
/// is recomputed from the sign of its bias every round, round 0 included.
[[nodiscard]] MetastabilityReport metastability_window(const ClusteredRegularGraph& g, const Configuration& c0,
                                                       std::int64_t rounds, double kappa, const RngContext& ctx);

} // namespace twochoices
