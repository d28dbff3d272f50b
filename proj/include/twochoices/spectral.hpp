#pragma once

#include "twochoices/graph.hpp"

#include <array>

namespace twochoices {

inline constexpr double kDefaultSpectralTol = 1e-8;
inline constexpr int kDefaultSpectralMaxIter = 100000;

/// Largest non-principal eigenvalue magnitude of one community's transition
/// matrix P̄ = A_c / a.
struct CommunityLambda {
    double lambda = 0.0;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    /// The community subgraph is disconnected, so the estimate says nothing
    /// about expansion (|lambda| reaches 1).
    bool disconnected = false;
};

struct SpectralReport {
    std::array<CommunityLambda, 2> community;
    /// max over both communities
    double lambda = 0.0;
};

/// Power iteration on M² where M = P̄ - J/n, started from a fixed-seed random
/// vector kept orthogonal to the all-ones vector. Converged once successive
/// Rayleigh quotients of M² differ by less than `tol` and the eigen-residual
/// ‖M²x - θx‖ is at most `tol`. The tie between λ₂ and |λ_n| does not matter
/// since only the magnitude √θ is returned.
[[nodiscard]] CommunityLambda community_lambda(const ClusteredRegularGraph& g, int community,
                                               double tol = kDefaultSpectralTol,
                                               int max_iter = kDefaultSpectralMaxIter);

[[nodiscard]] SpectralReport spectral_report(const ClusteredRegularGraph& g, double tol = kDefaultSpectralTol,
                                             int max_iter = kDefaultSpectralMaxIter);

struct HypothesisConstants {
    double c1 = 0.0; ///< (b/d)·√n
    double c2 = 0.0; ///< λ·n^{1/4}
    double h = 0.0;  ///< 4(2√2·c1 + c2²)
};

[[nodiscard]] HypothesisConstants hypothesis_constants(int n, int d, int b, double lambda);
[[nodiscard]] HypothesisConstants hypothesis_constants(const ClusteredRegularGraph& g, double lambda);

/// Upper limits on c1 and c2 used to flag the hypotheses b/d = O(n^{-1/2})
/// and λ = O(n^{-1/4}) as satisfied at a given size.
struct HypothesisLimits {
    double max_c1 = 1.0;
    double max_c2 = 1.5;
};

struct HypothesisReport {
    bool connected = false;
    std::array<bool, 2> community_connected{};
    std::array<bool, 2> community_nonbipartite{};
    double b_over_d = 0.0;
    double n_pow_minus_half = 0.0;
    double n_pow_minus_quarter = 0.0;
    SpectralReport spectrum;
    HypothesisConstants constants;
    bool cut_sparse = false; ///< c1 <= max_c1
    bool expander = false;   ///< c2 <= max_c2, both communities connected and non-bipartite
    [[nodiscard]] bool satisfied() const noexcept { return connected && cut_sparse && expander; }
};

/// Advisory only; never blocks a simulation.
[[nodiscard]] HypothesisReport check_hypotheses(const ClusteredRegularGraph& g, HypothesisLimits limits = {},
                                                double tol = kDefaultSpectralTol,
                                                int max_iter = kDefaultSpectralMaxIter);

} // namespace twochoices
