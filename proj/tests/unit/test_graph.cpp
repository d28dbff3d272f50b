#include "twochoices/graph.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

using namespace twochoices;

namespace {

// Independent check of the defining properties with ordered sets.
bool satisfies_definition(const ClusteredRegularGraph& g)
{
    const auto n = static_cast<NodeId>(g.n());
    std::set<std::pair<NodeId, NodeId>> arcs;
    for (NodeId u = 0; u < g.node_count(); ++u) {
        const auto nbrs = g.neighbors(u);
        if (nbrs.size() != static_cast<std::size_t>(g.d()))
            return false;
        int cross = 0;
        for (NodeId v : nbrs) {
            if (v == u || v >= g.node_count() || !arcs.insert({u, v}).second)
                return false;
            cross += (u < n) != (v < n);
        }
        if (cross != g.b())
            return false;
    }
    for (const auto& [u, v] : arcs)
        if (!arcs.count({v, u}))
            return false;
    return true;
}

AdjacencyLists lists_of(const ClusteredRegularGraph& g)
{
    AdjacencyLists out(g.node_count());
    for (NodeId u = 0; u < g.node_count(); ++u)
        out[u].assign(g.neighbors(u).begin(), g.neighbors(u).end());
    return out;
}

std::string serialize(const ClusteredRegularGraph& g)
{
    std::ostringstream s;
    write_graph(s, g);
    return s.str();
}

} // namespace

TEST_CASE("community generator")
{
    SUBCASE("4 nodes, degree 2 is a 4-cycle")
    {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto adj = generate_regular_community(4, 2, seed);
            for (NodeId u = 0; u < 4; ++u) {
                REQUIRE(adj[u].size() == 2);
                // in a 4-cycle each node misses exactly its antipode
                CHECK(std::find(adj[u].begin(), adj[u].end(), u) == adj[u].end());
            }
            const NodeId far = [&] {
                for (NodeId v = 1; v < 4; ++v)
                    if (std::find(adj[0].begin(), adj[0].end(), v) == adj[0].end())
                        return v;
                return NodeId{0};
            }();
            CHECK(adj[far] == adj[0]);
        }
    }
    SUBCASE("odd n*a is rejected")
    {
        CHECK_THROWS_AS((void)generate_regular_community(3, 1, 1), std::invalid_argument);
    }
    SUBCASE("a out of range is rejected")
    {
        CHECK_THROWS_AS((void)generate_regular_community(5, 5, 1), std::invalid_argument);
        CHECK_THROWS_AS((void)generate_regular_community(5, -2, 1), std::invalid_argument);
    }
    SUBCASE("complete graph")
    {
        const auto adj = generate_regular_community(6, 5, 3);
        for (NodeId u = 0; u < 6; ++u)
            CHECK(adj[u].size() == 5);
    }
    SUBCASE("circulant matches its definition")
    {
        const auto adj = generate_regular_community(10, 4, 0, GenerationMethod::Circulant);
        CHECK(adj[0] == std::vector<NodeId>{1, 2, 8, 9});
        const auto odd = generate_regular_community(10, 3, 0, GenerationMethod::Circulant);
        CHECK(odd[2] == std::vector<NodeId>{1, 3, 7});
    }
}

TEST_CASE("cut generator")
{
    CHECK(generate_regular_cut(5, 0, 1) == AdjacencyLists(5));
    const auto full = generate_regular_cut(5, 5, 1);
    for (const auto& row : full)
        CHECK(row == std::vector<NodeId>{0, 1, 2, 3, 4});
    const auto cut = generate_regular_cut(50, 3, 2);
    std::vector<int> right_degree(50, 0);
    for (const auto& row : cut) {
        CHECK(row.size() == 3);
        CHECK(std::set<NodeId>(row.begin(), row.end()).size() == 3);
        for (NodeId v : row)
            ++right_degree[v];
    }
    CHECK(std::all_of(right_degree.begin(), right_degree.end(), [](int k) { return k == 3; }));
    CHECK_THROWS_AS((void)generate_regular_cut(5, 6, 1), std::invalid_argument);
}

TEST_CASE("clustered generator")
{
    SUBCASE("small connected instance")
    {
        const auto gen = generate_clustered_regular(4, 2, 1, 7);
        CHECK(gen.graph.node_count() == 8);
        CHECK(gen.graph.d() == 3);
        CHECK(validate(gen.graph).ok);
        CHECK(satisfies_definition(gen.graph));
    }
    SUBCASE("no cut means two components")
    {
        const auto gen = generate_clustered_regular(4, 2, 0, 7);
        CHECK(validate(gen.graph).ok);
        CHECK_FALSE(gen.connected);
        CHECK_FALSE(is_connected(gen.graph));
        CHECK(gen.communities_connected == std::array<bool, 2>{true, true});
        // 4-cycles are bipartite
        CHECK(gen.communities_nonbipartite == std::array<bool, 2>{false, false});
    }
    SUBCASE("working size")
    {
        const auto gen = generate_clustered_regular(1000, 128, 2, 3);
        CHECK(gen.graph.d() == 130);
        CHECK(validate(gen.graph).ok);
        CHECK(gen.connected);
        CHECK(satisfies_definition(gen.graph));
    }
    SUBCASE("property: every seed validates, cross degrees sum to n*b")
    {
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            const int n = 20 + static_cast<int>(seed % 7) * 6;
            const int a = 2 + static_cast<int>(seed % 5) * 2;
            const int b = static_cast<int>(seed % 4);
            const auto g = generate_clustered_regular(n, a, b, seed).graph;
            CHECK(validate(g).ok);
            CHECK(satisfies_definition(g));
            long cross1 = 0, cross2 = 0;
            for (NodeId u = 0; u < g.node_count(); ++u)
                for (NodeId v : g.neighbors(u))
                    if (g.community(u) != g.community(v))
                        (g.community(u) == 1 ? cross1 : cross2) += 1;
            CHECK(cross1 == static_cast<long>(n) * b);
            CHECK(cross2 == static_cast<long>(n) * b);
        }
    }
    SUBCASE("determinism")
    {
        CHECK(serialize(generate_clustered_regular(60, 8, 3, 11).graph) ==
              serialize(generate_clustered_regular(60, 8, 3, 11).graph));
        CHECK(serialize(generate_clustered_regular(60, 8, 3, 11).graph) !=
              serialize(generate_clustered_regular(60, 8, 3, 12).graph));
    }
    SUBCASE("circulant communities")
    {
        const auto g = generate_clustered_regular(30, 4, 1, 5, GenerationMethod::Circulant).graph;
        CHECK(validate(g).ok);
        for (NodeId v : {1u, 2u, 28u, 29u})
            CHECK(std::find(g.neighbors(0).begin(), g.neighbors(0).end(), v) != g.neighbors(0).end());
    }
}

TEST_CASE("validate flags each kind of violation")
{
    const auto g = generate_clustered_regular(6, 2, 1, 4).graph;
    REQUIRE(validate(g).ok);
    auto adj = lists_of(g);

    SUBCASE("one-sided deletion")
    {
        adj[0].pop_back();
        const auto report = validate(ClusteredRegularGraph(6, 3, 1, adj));
        CHECK_FALSE(report.ok);
        CHECK(report.has(ViolationKind::Asymmetry));
        CHECK(report.has(ViolationKind::Degree));
    }
    SUBCASE("duplicated edge")
    {
        adj[0][1] = adj[0][0];
        const auto report = validate(ClusteredRegularGraph(6, 3, 1, adj));
        CHECK(report.has(ViolationKind::Duplicate));
    }
    SUBCASE("self loop")
    {
        adj[2][0] = 2;
        CHECK(validate(ClusteredRegularGraph(6, 3, 1, adj)).has(ViolationKind::SelfLoop));
    }
    SUBCASE("wrong cross degree")
    {
        // swap an intra neighbor of node 0 for a second cross neighbor
        AdjacencyLists bad = adj;
        for (NodeId& v : bad[0])
            if (v < 6) {
                v = 6 + ((adj[0].back() - 6 + 1) % 6);
                break;
            }
        CHECK(validate(ClusteredRegularGraph(6, 3, 1, bad)).has(ViolationKind::CrossDegree));
    }
    SUBCASE("report is ok iff violation list is empty")
    {
        adj[1].clear();
        const auto report = validate(ClusteredRegularGraph(6, 3, 1, adj));
        CHECK(report.ok == report.violations.empty());
        CHECK_FALSE(report.ok);
    }
}

TEST_CASE("serialization")
{
    const auto g = generate_clustered_regular(40, 6, 2, 9).graph;
    SUBCASE("stream roundtrip is the identity")
    {
        std::istringstream in(serialize(g));
        CHECK(read_graph(in) == g);
    }
    SUBCASE("file roundtrip")
    {
        const auto path = std::filesystem::temp_directory_path() / "twochoices_roundtrip.crg";
        save_graph(g, path);
        CHECK(load_graph(path) == g);
        std::filesystem::remove(path);
    }
    SUBCASE("format")
    {
        const auto text = serialize(generate_clustered_regular(2, 1, 1, 0).graph);
        CHECK(text.rfind("crg v1\nn=2 d=2 b=1\n", 0) == 0);
    }
    SUBCASE("node out of range")
    {
        std::istringstream in("crg v1\nn=4 d=3 b=1\n0 9\n");
        CHECK_THROWS_AS((void)read_graph(in), GraphFormatError);
    }
    SUBCASE("missing header")
    {
        std::istringstream in("crg v1\n0 1\n");
        CHECK_THROWS_AS((void)read_graph(in), GraphFormatError);
        std::istringstream empty("");
        CHECK_THROWS_AS((void)read_graph(empty), GraphFormatError);
    }
    SUBCASE("wrong magic")
    {
        std::istringstream in("graph\nn=2 d=2 b=1\n");
        CHECK_THROWS_AS((void)read_graph(in), GraphFormatError);
    }
    SUBCASE("incomplete edge list")
    {
        std::istringstream in("crg v1\nn=2 d=2 b=1\n0 1\n0 2\n");
        CHECK_THROWS_AS((void)read_graph(in), GraphFormatError);
    }
    SUBCASE("missing file")
    {
        CHECK_THROWS((void)load_graph("/nonexistent/graph.crg"));
    }
}

TEST_CASE("reader rejects a wrong cross degree")
{
    // 0-1 and 2-3 are intra edges, so no node has its cut edge
    std::istringstream in("crg v1\nn=2 d=1 b=1\n0 1\n2 3\n");
    CHECK_THROWS_AS((void)read_graph(in), GraphFormatError);
}
