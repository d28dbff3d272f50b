#include "twochoices/analysis.hpp"

#include "twochoices/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace twochoices {

namespace {

std::pair<NodeId, NodeId> range_of(const ClusteredRegularGraph& g, int community)
{
    if (community != 1 && community != 2)
        throw std::invalid_argument("community must be 1 or 2");
    const auto n = static_cast<NodeId>(g.n());
    return community == 1 ? std::pair{NodeId{0}, n} : std::pair{n, 2 * n};
}

// Probability that u holds `color` after one round.
double hold_probability(const ClusteredRegularGraph& g, const Configuration& c, NodeId u, Color color)
{
    const auto nbrs = g.neighbors(u);
    if (nbrs.empty())
        return c[u] == color ? 1.0 : 0.0;
    const auto same = std::count_if(nbrs.begin(), nbrs.end(), [&](NodeId v) { return c[v] == color; });
    const double deg = static_cast<double>(nbrs.size());
    if (c[u] == color) {
        const double other = static_cast<double>(nbrs.size() - same) / deg;
        return 1.0 - other * other;
    }
    const double f = static_cast<double>(same) / deg;
    return f * f;
}

} // namespace

double exact_expected_count(const ClusteredRegularGraph& g, const Configuration& c, int community, Color color)
{
    if (c.size() != g.node_count())
        throw std::invalid_argument("configuration size does not match graph");
    const auto [lo, hi] = range_of(g, community);
    double sum = 0.0;
    for (NodeId u = lo; u < hi; ++u)
        sum += hold_probability(g, c, u, color);
    return sum;
}

std::vector<double> next_color_probabilities(const ClusteredRegularGraph& g, const Configuration& c, int community,
                                             Color color)
{
    if (c.size() != g.node_count())
        throw std::invalid_argument("configuration size does not match graph");
    const auto [lo, hi] = range_of(g, community);
    std::vector<double> p;
    p.reserve(hi - lo);
    for (NodeId u = lo; u < hi; ++u)
        p.push_back(hold_probability(g, c, u, color));
    return p;
}

double exact_expected_minority(const ClusteredRegularGraph& g, const Configuration& c, int community)
{
    return exact_expected_count(g, c, community, designated_minority(community));
}

double lemma2_bound(int n, long long minority_here, long long same_color_other, double c1, double c2)
{
    if (minority_here < 1)
        throw std::invalid_argument("lemma2_bound is undefined for an empty minority (|B1| = 0)");
    if (n < 1 || minority_here > n || same_color_other < 0 || same_color_other > n)
        throw std::invalid_argument("lemma2_bound counts must lie in [0, n]");
    const double nn = n;
    const double b1 = static_cast<double>(minority_here);
    const double b2 = static_cast<double>(same_color_other);
    const double s1 = nn - 2.0 * b1;
    const double root_n = std::sqrt(nn);
    const double expansion = c2 * c2 / root_n;
    const double inner = (b2 / b1) * (0.5 - s1 / (2.0 * nn) + expansion + c1 * c1 * b2 / (nn * b1));
    return b1 * (1.0 - s1 / (2.0 * nn) + expansion + (2.0 * c1 / root_n) * std::sqrt(inner));
}

MinorityFlipProfile minority_flip_profile(const ClusteredRegularGraph& g, const Configuration& c, int community)
{
    const auto [lo, hi] = range_of(g, community);
    const auto bias = biases(g, c);
    const int s = community == 1 ? bias.s1 : bias.s2;
    if (s == 0)
        throw std::invalid_argument("community " + std::to_string(community) + " is tied; no minority color");
    MinorityFlipProfile profile;
    profile.community = community;
    profile.minority = s > 0 ? Color::Blue : Color::Red;
    profile.p.reserve(hi - lo);
    for (NodeId u = lo; u < hi; ++u) {
        const double p = hold_probability(g, c, u, profile.minority);
        profile.p.push_back(p);
        profile.sum_p += p;
        profile.sum_p_sq += p * p;
    }
    return profile;
}

std::vector<double> poisson_binomial_distribution(std::span<const double> p, std::optional<std::size_t> max_value)
{
    for (double q : p)
        if (!(q >= 0.0 && q <= 1.0))
            throw std::invalid_argument("probability " + std::to_string(q) + " outside [0, 1]");
    const std::size_t top = std::min(p.size(), max_value.value_or(p.size()));
    std::vector<double> pmf(top + 1, 0.0);
    pmf[0] = 1.0;
    std::size_t reach = 0; // highest index that can be nonzero so far
    for (double q : p) {
        reach = std::min(reach + 1, top);
        for (std::size_t k = reach; k >= 1; --k)
            pmf[k] = pmf[k] * (1.0 - q) + pmf[k - 1] * q;
        pmf[0] *= 1.0 - q;
    }
    return pmf;
}

double poisson_pmf(double lambda, std::size_t k)
{
    if (lambda < 0.0)
        throw std::invalid_argument("Poisson rate must be non-negative");
    if (lambda == 0.0)
        return k == 0 ? 1.0 : 0.0;
    const double kk = static_cast<double>(k);
    return std::exp(kk * std::log(lambda) - lambda - std::lgamma(kk + 1.0));
}

double poisson_tail(double lambda, double t)
{
    if (!(lambda >= 0.0))
        throw std::invalid_argument("Poisson rate must be non-negative");
    if (t < 0.0)
        return 1.0;
    if (lambda == 0.0)
        return 0.0;
    const auto cut = static_cast<std::size_t>(std::floor(t)); // X > t  <=>  X >= cut + 1
    if (static_cast<double>(cut) + 1.0 > lambda) {
        // Upper tail: terms decrease from the first one, sum smallest first.
        std::vector<double> terms;
        double term = poisson_pmf(lambda, cut + 1);
        for (std::size_t k = cut + 1; term > 0.0; ++k) {
            terms.push_back(term);
            if (term < std::numeric_limits<double>::epsilon() * 1e-3 * terms.front())
                break;
            term *= lambda / static_cast<double>(k + 1);
        }
        return std::accumulate(terms.rbegin(), terms.rend(), 0.0);
    }
    // Lower sum has the smaller terms at its ends; add from k = 0 up is fine
    // since the result is at least 1/2-ish here and cancellation is bounded.
    double lower = 0.0;
    for (std::size_t k = 0; k <= cut; ++k)
        lower += poisson_pmf(lambda, k);
    return std::max(0.0, 1.0 - lower);
}

double normal_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

PoissonApproximation poisson_approximation(std::span<const double> p, std::size_t exact_limit)
{
    PoissonApproximation out;
    for (double q : p) {
        out.sum_p += q;
        out.sum_p_sq += q * q;
    }
    std::optional<std::size_t> cap;
    if (p.size() > exact_limit) {
        // Beyond mean + 40 sd + 64 both laws carry far less than 1e-300.
        const auto far = static_cast<std::size_t>(std::ceil(out.sum_p + 40.0 * std::sqrt(out.sum_p) + 64.0));
        if (far < p.size())
            cap = far;
    }
    const auto pmf = poisson_binomial_distribution(p, cap);
    out.support = pmf.size();
    out.truncated = cap.has_value();

    double covered_binomial = 0.0;
    double covered_poisson = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
        const double q = poisson_pmf(out.sum_p, k);
        out.l1_distance += std::abs(pmf[k] - q);
        covered_binomial += pmf[k];
        covered_poisson += q;
    }
    const double poisson_rest = std::max(0.0, 1.0 - covered_poisson);
    out.l1_distance += out.truncated ? poisson_rest + std::max(0.0, 1.0 - covered_binomial) : poisson_rest;
    return out;
}

EventEstimate wilson_interval(std::uint64_t successes, std::uint64_t trials)
{
    if (trials == 0)
        throw std::invalid_argument("an event estimate needs at least one trial");
    if (successes > trials)
        throw std::invalid_argument("more successes than trials");
    constexpr double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half = z / denom * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
    EventEstimate e;
    e.trials = trials;
    e.successes = successes;
    e.estimate = phat;
    e.low = std::clamp(std::min(center - half, phat), 0.0, 1.0);
    e.high = std::clamp(std::max(center + half, phat), 0.0, 1.0);
    return e;
}

EventEstimate estimate_event_probability(const EventTrial& experiment, std::uint64_t trials, std::uint64_t seed,
                                         int workers)
{
    if (trials == 0)
        throw std::invalid_argument("an event estimate needs at least one trial");
    std::vector<std::uint8_t> hit(trials, 0);
    parallel_for_index(trials, workers,
                       [&](std::size_t i) { hit[i] = experiment(RngContext{seed, i, 0}) ? 1 : 0; });
    const auto successes = static_cast<std::uint64_t>(std::count(hit.begin(), hit.end(), 1));
    return wilson_interval(successes, trials);
}

int metastability_threshold(int n, double kappa)
{
    return static_cast<int>(std::ceil(outlier_scale(n, kappa)));
}

MetastabilityReport metastability_window(const ClusteredRegularGraph& g, const Configuration& c0,
                                         std::int64_t rounds, double kappa, const RngContext& ctx)
{
    if (rounds < 0)
        throw std::invalid_argument("rounds must be non-negative");
    const int n = g.n();
    MetastabilityReport report;
    report.threshold = metastability_threshold(n, kappa);
    report.rounds = rounds;

    Configuration current = c0;
    Configuration next(c0.size(), Color::Red);
    BiasPair bias = biases(g, current);
    const std::array<int, 2> sign0{(bias.s1 > 0) - (bias.s1 < 0), (bias.s2 > 0) - (bias.s2 < 0)};

    auto observe = [&](std::int64_t round) {
        const std::array<int, 2> s{bias.s1, bias.s2};
        for (int i = 0; i < 2; ++i) {
            const int m = minority_count(n, s[i]);
            report.max_minority[i] = std::max(report.max_minority[i], m);
            if (m > report.threshold && !report.first_violation)
                report.first_violation = round;
            const int sign = (s[i] > 0) - (s[i] < 0);
            if (sign != sign0[i] && !report.first_sign_flip)
                report.first_sign_flip = round;
        }
    };

    observe(ctx.round);
    for (std::int64_t r = 0; r < rounds; ++r) {
        bias = step_into(g, current, next, Rule::TwoChoices, ctx.at_round(ctx.round + r));
        std::swap(current, next);
        observe(ctx.round + r + 1);
    }
    return report;
}

} // namespace twochoices
