#include "twochoices/dynamics.hpp"

#include "twochoices/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace twochoices {

Configuration Configuration::flipped() const
{
    Configuration out(*this);
    for (Color& c : out.colors_)
        c = opposite(c);
    return out;
}

bool Configuration::monochromatic() const noexcept
{
    for (Color c : colors_)
        if (c != colors_.front())
            return false;
    return true;
}

namespace {

void require_size(const ClusteredRegularGraph& g, const Configuration& c)
{
    if (c.size() != g.node_count())
        throw std::invalid_argument("configuration has " + std::to_string(c.size()) + " colors, graph has " +
                                    std::to_string(g.node_count()) + " nodes");
}

BiasPair biases_from_red(int n, std::array<int, 2> red) { return {2 * red[0] - n, 2 * red[1] - n}; }

// Updates nodes [begin, end) and returns the red counts per community among them.
template <Rule R>
std::array<int, 2> update_range(const ClusteredRegularGraph& g, const Color* in, Color* out,
                                const RngContext& ctx, NodeId begin, NodeId end)
{
    std::array<int, 2> red{0, 0};
    const auto n = static_cast<NodeId>(g.n());
    BlockBatch words;
    for (NodeId base = begin; base < end; base += kBatchNodes) {
        generate_batch(ctx, base, words);
        const NodeId stop = std::min<NodeId>(end, base + static_cast<NodeId>(kBatchNodes));
        for (NodeId u = base; u < stop; ++u) {
            const std::size_t i = u - base;
            const auto nbrs = g.neighbors(u);
            const auto deg = static_cast<std::uint32_t>(nbrs.size());
            Color next = in[u];
            if (deg > 0) {
                const std::uint64_t first = std::uint64_t{words[1][i]} << 32 | words[0][i];
                const Color c0 = in[nbrs[bounded(first, deg)]];
                if constexpr (R == Rule::Voter) {
                    next = c0;
                } else {
                    const std::uint64_t second = std::uint64_t{words[3][i]} << 32 | words[2][i];
                    const Color c1 = in[nbrs[bounded(second, deg)]];
                    if (c0 == c1)
                        next = c0;
                }
            }
            out[u] = next;
            red[u < n ? 0 : 1] += next == Color::Red;
        }
    }
    return red;
}

} // namespace

BiasPair biases(const ClusteredRegularGraph& g, const Configuration& c)
{
    require_size(g, c);
    std::array<int, 2> red{0, 0};
    const auto n = static_cast<std::size_t>(g.n());
    for (std::size_t u = 0; u < c.size(); ++u)
        red[u < n ? 0 : 1] += c[u] == Color::Red;
    return biases_from_red(g.n(), red);
}

std::string_view to_string(Outcome o) noexcept
{
    switch (o) {
    case Outcome::Monochromatic: return "monochromatic";
    case Outcome::AlmostClustered: return "almost_clustered";
    case Outcome::Mixed: return "mixed";
    }
    return "unknown";
}

std::string_view to_string(Rule r) noexcept { return r == Rule::TwoChoices ? "two_choices" : "voter"; }

double outlier_scale(int n, double kappa) noexcept
{
    if (n < 3)
        return 0.0;
    const double ln = std::log(static_cast<double>(n));
    return kappa * ln / std::log(ln);
}

Outcome classify(BiasPair bias, int n, double kappa)
{
    if (!(kappa > 0.0))
        throw std::invalid_argument("kappa must be positive");
    if (std::abs(bias.s1) == n && std::abs(bias.s2) == n && (bias.s1 > 0) == (bias.s2 > 0))
        return Outcome::Monochromatic;
    const auto budget = static_cast<long long>(std::floor(outlier_scale(n, kappa)));
    const bool opposite_signs = static_cast<long long>(bias.s1) * bias.s2 < 0;
    if (opposite_signs && n - std::abs(bias.s1) <= budget && n - std::abs(bias.s2) <= budget)
        return Outcome::AlmostClustered;
    return Outcome::Mixed;
}

Configuration random_init(const ClusteredRegularGraph& g, const RngContext& ctx)
{
    const auto init = ctx.at_round(RngContext::kInitRound);
    Configuration c(g.node_count(), Color::Red);
    for (NodeId u = 0; u < g.node_count(); ++u)
        c.set(u, (init.draw(u, 0) >> 63) != 0 ? Color::Blue : Color::Red);
    return c;
}

Configuration random_init(const ClusteredRegularGraph& g, std::uint64_t seed)
{
    return random_init(g, RngContext{seed, 0, 0});
}

Configuration seeded_init(const ClusteredRegularGraph& g, int s1, int s2)
{
    const int n = g.n();
    for (int s : {s1, s2}) {
        if (std::abs(s) > n)
            throw std::invalid_argument("bias " + std::to_string(s) + " outside [-n, n] for n=" + std::to_string(n));
        if ((n - std::abs(s)) % 2 != 0)
            throw std::invalid_argument("parity violation: bias " + std::to_string(s) +
                                        " must have the parity of n=" + std::to_string(n));
    }
    Configuration c(g.node_count(), Color::Blue);
    const int red1 = (n + s1) / 2;
    const int red2 = (n + s2) / 2;
    for (int i = 0; i < red1; ++i)
        c.set(static_cast<std::size_t>(i), Color::Red);
    for (int i = 0; i < red2; ++i)
        c.set(static_cast<std::size_t>(n + i), Color::Red);
    return c;
}

BiasPair step_into(const ClusteredRegularGraph& g, const Configuration& in, Configuration& out, Rule rule,
                   const RngContext& ctx, int workers)
{
    require_size(g, in);
    if (&in == &out)
        throw std::invalid_argument("step_into needs distinct input and output configurations");
    if (out.size() != in.size())
        out = Configuration(in.size(), Color::Red);

    const std::size_t count = g.node_count();
    const std::size_t chunks = static_cast<std::size_t>(std::max(workers, 1));
    std::vector<std::array<int, 2>> partial(chunks, {0, 0});
    const Color* src = in.colors().data();
    Color* dst = out.colors().data();
    parallel_chunks(count, workers, [&](std::size_t begin, std::size_t end, std::size_t chunk) {
        const auto b = static_cast<NodeId>(begin);
        const auto e = static_cast<NodeId>(end);
        partial[chunk] = rule == Rule::Voter ? update_range<Rule::Voter>(g, src, dst, ctx, b, e)
                                             : update_range<Rule::TwoChoices>(g, src, dst, ctx, b, e);
    });
    std::array<int, 2> red{0, 0};
    for (const auto& p : partial) {
        red[0] += p[0];
        red[1] += p[1];
    }
    return biases_from_red(g.n(), red);
}

Configuration step_two_choices(const ClusteredRegularGraph& g, const Configuration& c, const RngContext& ctx,
                               int workers)
{
    Configuration out(c.size(), Color::Red);
    step_into(g, c, out, Rule::TwoChoices, ctx, workers);
    return out;
}

Configuration step_voter(const ClusteredRegularGraph& g, const Configuration& c, const RngContext& ctx, int workers)
{
    Configuration out(c.size(), Color::Red);
    step_into(g, c, out, Rule::Voter, ctx, workers);
    return out;
}

Trajectory run(const ClusteredRegularGraph& g, const Configuration& c0, Rule rule, const StopCriteria& stop,
               const RngContext& ctx, RunOptions options)
{
    if (stop.max_rounds < 0)
        throw std::invalid_argument("max_rounds must be non-negative");
    const int n = g.n();
    Trajectory t;
    Configuration current = c0;
    Configuration next(c0.size(), Color::Red);
    BiasPair bias = biases(g, current);

    auto record = [&](std::int64_t round) {
        t.records.push_back({round, bias.s1, bias.s2, minority_count(n, bias.s1), minority_count(n, bias.s2)});
        if (options.keep_snapshots)
            t.snapshots.push_back(current);
    };
    auto should_stop = [&] {
        if (stop.stop_on_monochromatic && std::abs(bias.s1) == n && std::abs(bias.s2) == n &&
            (bias.s1 > 0) == (bias.s2 > 0))
            return true;
        return stop.stop_on_almost_clustered &&
               classify(bias, n, *stop.stop_on_almost_clustered) == Outcome::AlmostClustered;
    };

    record(ctx.round);
    for (int r = 0; r < stop.max_rounds && !should_stop(); ++r) {
        bias = step_into(g, current, next, rule, ctx.at_round(ctx.round + r), options.workers);
        std::swap(current, next);
        ++t.rounds_executed;
        record(ctx.round + r + 1);
    }
    t.terminal = classify(bias, n, stop.kappa);
    t.final_configuration = std::move(current);
    return t;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& t)
{
    out << "round,s1,s2,minority1,minority2\n";
    for (std::size_t i = 0; i < t.records.size(); ++i) {
        const auto& r = t.records[i];
        out << r.round << ',' << r.s1 << ',' << r.s2 << ',' << r.minority1 << ',' << r.minority2;
        if (i + 1 == t.records.size())
            out << ",terminal=" << to_string(t.terminal);
        out << '\n';
    }
}

} // namespace twochoices
