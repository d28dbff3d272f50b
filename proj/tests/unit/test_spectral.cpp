#include "twochoices/spectral.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

using namespace twochoices;

namespace {

// Dense eigendecomposition of one community's transition matrix; drops one
// copy of the principal eigenvalue 1 and returns the largest remaining |μ|.
double dense_lambda(const ClusteredRegularGraph& g, int community)
{
    const int n = g.n();
    const auto lo = static_cast<NodeId>(community == 1 ? 0 : n);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (NodeId u = lo; u < lo + static_cast<NodeId>(n); ++u)
        for (NodeId v : g.neighbors(u))
            if (g.community(v) == community)
                p(u - lo, v - lo) += 1.0 / g.a();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(p);
    Eigen::VectorXd mu = solver.eigenvalues(); // ascending, so the last is 1
    double best = 0.0;
    for (int i = 0; i + 1 < mu.size(); ++i)
        best = std::max(best, std::abs(mu(i)));
    return best;
}

} // namespace

TEST_CASE("complete community")
{
    for (int n : {3, 5, 8, 13}) {
        const auto g = generate_clustered_regular(n, n - 1, 1, 2).graph;
        const auto c = community_lambda(g, 1);
        CHECK(c.converged);
        CHECK(std::abs(c.lambda - 1.0 / (n - 1)) <= 1e-6);
    }
    const auto k5 = generate_clustered_regular(5, 4, 0, 1).graph;
    CHECK(std::abs(community_lambda(k5, 2).lambda - 0.25) <= 1e-6);
}

TEST_CASE("odd cycles")
{
    for (int n : {5, 7, 9, 15, 31}) {
        const auto g = generate_clustered_regular(n, 2, 1, 0, GenerationMethod::Circulant).graph;
        const double expected = std::abs(std::cos(std::numbers::pi * (n - 1) / n));
        for (int community : {1, 2}) {
            const auto c = community_lambda(g, community);
            CHECK(c.converged);
            CHECK(std::abs(c.lambda - expected) <= 1e-6);
            CHECK(c.residual <= kDefaultSpectralTol);
        }
    }
    const auto c5 = generate_clustered_regular(5, 2, 0, 3).graph; // 2-regular on 5 nodes is C5
    CHECK(std::abs(community_lambda(c5, 1).lambda - 0.8090169944) <= 1e-6);
}

TEST_CASE("power iteration matches the dense oracle")
{
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const int n = 8 + static_cast<int>(seed * 7 % 57); // 8..64
        int a = 3 + static_cast<int>(seed % 6);
        if (n * a % 2 != 0)
            ++a;
        const auto gen = generate_clustered_regular(n, a, 1 + static_cast<int>(seed % 3), seed);
        for (int community : {1, 2}) {
            if (!gen.communities_connected[community - 1])
                continue;
            const auto c = community_lambda(gen.graph, community);
            CHECK(c.converged);
            CHECK(std::abs(c.lambda - dense_lambda(gen.graph, community)) <= 1e-6);
            ++checked;
        }
    }
    CHECK(checked >= 50);
}

TEST_CASE("disconnected and bipartite communities are flagged")
{
    // two disjoint triangles: a=2 circulant on 6 nodes is C6, so build by hand
    AdjacencyLists adj(12);
    auto join = [&](NodeId u, NodeId v) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    };
    for (NodeId base : {0u, 3u, 6u, 9u}) {
        join(base, base + 1);
        join(base + 1, base + 2);
        join(base, base + 2);
    }
    for (NodeId u = 0; u < 6; ++u)
        join(u, u + 6);
    const ClusteredRegularGraph g(6, 3, 1, adj);
    REQUIRE(validate(g).ok);
    const auto c = community_lambda(g, 1);
    CHECK(c.disconnected);
    CHECK(c.lambda == doctest::Approx(1.0));

    const auto even = generate_clustered_regular(6, 2, 1, 0, GenerationMethod::Circulant).graph;
    const auto h = check_hypotheses(even);
    CHECK(h.community_nonbipartite == std::array<bool, 2>{false, false});
    CHECK_FALSE(h.expander);
}

TEST_CASE("hypothesis constants")
{
    SUBCASE("working size")
    {
        // reference values evaluated at 30 digits with mpmath
        const auto k = hypothesis_constants(1000, 130, 2, 0.18);
        CHECK(std::abs(k.c1 - 0.486504255410520) < 1e-12);
        CHECK(std::abs(k.c2 - 1.012214385342628) < 1e-12);
        CHECK(std::abs(k.h - 9.602479176808471) < 1e-12);
    }
    SUBCASE("small instance")
    {
        const auto k = hypothesis_constants(100, 20, 2, 0.1);
        CHECK(std::abs(k.c1 - 1.0) < 1e-12);
        CHECK(std::abs(k.c2 - 0.316227766016838) < 1e-12);
        CHECK(std::abs(k.h - 11.713708498984760) < 1e-12);
    }
    SUBCASE("no cut, perfect expansion")
    {
        const auto k = hypothesis_constants(100, 20, 0, 0.0);
        CHECK(k.c1 == 0.0);
        CHECK(k.c2 == 0.0);
        CHECK(k.h == 0.0);
    }
    SUBCASE("doubling lambda adds 12 c2^2 to h")
    {
        for (double lambda : {0.01, 0.1, 0.2, 0.45}) {
            const auto once = hypothesis_constants(500, 60, 3, lambda);
            const auto twice = hypothesis_constants(500, 60, 3, 2 * lambda);
            CHECK(twice.c2 == doctest::Approx(2 * once.c2));
            CHECK(twice.h - once.h == doctest::Approx(12 * once.c2 * once.c2));
        }
    }
    SUBCASE("lambda outside [0, 1) is rejected")
    {
        CHECK_THROWS_AS((void)hypothesis_constants(100, 20, 2, 1.0), std::invalid_argument);
        CHECK_THROWS_AS((void)hypothesis_constants(100, 20, 2, -0.1), std::invalid_argument);
    }
}

TEST_CASE("hypotheses on the working graph")
{
    const auto g = generate_clustered_regular(1000, 128, 2, 3).graph;
    const auto h = check_hypotheses(g);
    CHECK(h.connected);
    CHECK(h.satisfied());
    CHECK(h.constants.c1 < 1.0);
    CHECK(h.constants.c2 == doctest::Approx(1.0).epsilon(0.2));
    // random a-regular graphs sit near the Ramanujan value 2√(a-1)/a
    CHECK(std::abs(h.spectrum.lambda - 2.0 * std::sqrt(127.0) / 128.0) < 0.03);
    CHECK(h.spectrum.lambda == std::max(h.spectrum.community[0].lambda, h.spectrum.community[1].lambda));

    const auto split = generate_clustered_regular(50, 6, 0, 1).graph;
    CHECK_FALSE(check_hypotheses(split).connected);
}
