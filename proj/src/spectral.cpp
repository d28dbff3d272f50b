#include "twochoices/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace twochoices {

namespace {

constexpr std::uint64_t kStartSeed = 0x5eed5eedULL;

void remove_mean(std::vector<double>& x)
{
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    for (double& v : x)
        v -= mean;
}

double norm(const std::vector<double>& x) { return std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0)); }

// out = (P̄ - J/n) x restricted to the community [lo, lo + n).
void apply_deflated(const ClusteredRegularGraph& g, NodeId lo, const std::vector<double>& x,
                    std::vector<double>& out)
{
    const auto n = static_cast<NodeId>(x.size());
    const double inv_a = 1.0 / g.a();
    for (NodeId i = 0; i < n; ++i) {
        double acc = 0.0;
        for (NodeId v : g.neighbors(lo + i)) {
            if (v >= lo && v < lo + n)
                acc += x[v - lo];
        }
        out[i] = acc * inv_a;
    }
    remove_mean(out);
}

} // namespace

CommunityLambda community_lambda(const ClusteredRegularGraph& g, int community, double tol, int max_iter)
{
    if (community != 1 && community != 2)
        throw std::invalid_argument("community must be 1 or 2");
    if (tol <= 0.0 || max_iter < 1)
        throw std::invalid_argument("community_lambda needs tol > 0 and max_iter >= 1");

    CommunityLambda result;
    result.disconnected = !community_connected(g, community);
    const auto n = static_cast<std::size_t>(g.n());
    if (n < 2 || g.a() == 0) {
        // Only the trivial eigenvalue exists (n = 1) or P̄ is undefined (a = 0).
        result.lambda = n < 2 ? 0.0 : 1.0;
        result.converged = n < 2;
        return result;
    }
    const NodeId lo = community == 1 ? 0 : static_cast<NodeId>(n);

    std::mt19937_64 rng(kStartSeed + static_cast<std::uint64_t>(community));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<double> x(n), y(n), z(n);
    for (double& v : x)
        v = unit(rng);
    remove_mean(x);
    double nx = norm(x);
    for (double& v : x)
        v /= nx;

    double theta_prev = -1.0;
    for (int it = 1; it <= max_iter; ++it) {
        apply_deflated(g, lo, x, y);
        apply_deflated(g, lo, y, z);
        const double theta = std::inner_product(x.begin(), x.end(), z.begin(), 0.0);
        double res2 = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            res2 += (z[i] - theta * x[i]) * (z[i] - theta * x[i]);
        result.iterations = it;
        result.residual = std::sqrt(res2);
        result.lambda = std::sqrt(std::max(theta, 0.0));

        const double nz = norm(z);
        if (nz == 0.0) {
            // x lies in the kernel of M², and so does every start vector's image.
            result.lambda = 0.0;
            result.residual = 0.0;
            result.converged = true;
            return result;
        }
        if (std::abs(theta - theta_prev) < tol && result.residual <= tol) {
            result.converged = true;
            return result;
        }
        theta_prev = theta;
        for (std::size_t i = 0; i < n; ++i)
            x[i] = z[i] / nz;
        remove_mean(x);
        nx = norm(x);
        for (double& v : x)
            v /= nx;
    }
    return result;
}

SpectralReport spectral_report(const ClusteredRegularGraph& g, double tol, int max_iter)
{
    SpectralReport report;
    report.community[0] = community_lambda(g, 1, tol, max_iter);
    report.community[1] = community_lambda(g, 2, tol, max_iter);
    report.lambda = std::max(report.community[0].lambda, report.community[1].lambda);
    return report;
}

HypothesisConstants hypothesis_constants(int n, int d, int b, double lambda)
{
    if (n < 1 || d < 1 || b < 0)
        throw std::invalid_argument("hypothesis_constants needs n >= 1, d >= 1, b >= 0");
    if (!(lambda >= 0.0 && lambda < 1.0))
        throw std::invalid_argument("lambda must lie in [0, 1)");
    HypothesisConstants k;
    k.c1 = static_cast<double>(b) / d * std::sqrt(static_cast<double>(n));
    k.c2 = lambda * std::pow(static_cast<double>(n), 0.25);
    k.h = 4.0 * (2.0 * std::sqrt(2.0) * k.c1 + k.c2 * k.c2);
    return k;
}

HypothesisConstants hypothesis_constants(const ClusteredRegularGraph& g, double lambda)
{
    return hypothesis_constants(g.n(), g.d(), g.b(), lambda);
}

HypothesisReport check_hypotheses(const ClusteredRegularGraph& g, HypothesisLimits limits, double tol,
                                  int max_iter)
{
    HypothesisReport r;
    r.connected = is_connected(g);
    for (int c = 0; c < 2; ++c) {
        r.community_connected[c] = community_connected(g, c + 1);
        r.community_nonbipartite[c] = !community_bipartite(g, c + 1);
    }
    const double n = g.n();
    r.b_over_d = g.d() > 0 ? static_cast<double>(g.b()) / g.d() : 0.0;
    r.n_pow_minus_half = 1.0 / std::sqrt(n);
    r.n_pow_minus_quarter = std::pow(n, -0.25);
    r.spectrum = spectral_report(g, tol, max_iter);

    const bool communities_ok = r.community_connected[0] && r.community_connected[1] &&
                                r.community_nonbipartite[0] && r.community_nonbipartite[1];
    // Measured equalities: the tightest constants for which the hypotheses hold.
    r.constants.c1 = r.b_over_d * std::sqrt(n);
    r.constants.c2 = r.spectrum.lambda * std::pow(n, 0.25);
    r.constants.h = 4.0 * (2.0 * std::sqrt(2.0) * r.constants.c1 + r.constants.c2 * r.constants.c2);
    r.cut_sparse = r.constants.c1 <= limits.max_c1;
    r.expander = communities_ok && r.spectrum.lambda < 1.0 && r.constants.c2 <= limits.max_c2;
    return r;
}

} // namespace twochoices
