#include "twochoices/graph.hpp"

#include "twochoices/rng.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <random>
#include <sstream>
#include <unordered_set>

namespace twochoices {

ClusteredRegularGraph::ClusteredRegularGraph(int n, int d, int b, const AdjacencyLists& adjacency)
    : n_(n), d_(d), b_(b)
{
    if (n < 0 || d < 0 || b < 0)
        throw std::invalid_argument("graph parameters must be non-negative");
    if (adjacency.size() != 2 * static_cast<std::size_t>(n))
        throw std::invalid_argument("adjacency must list exactly 2n nodes");
    offsets_.reserve(adjacency.size() + 1);
    for (const auto& list : adjacency) {
        for (NodeId v : list) {
            if (v >= adjacency.size())
                throw std::invalid_argument("neighbor id " + std::to_string(v) + " out of range");
        }
        targets_.insert(targets_.end(), list.begin(), list.end());
        offsets_.push_back(targets_.size());
    }
}

const char* to_string(ViolationKind kind) noexcept
{
    switch (kind) {
    case ViolationKind::Degree: return "degree";
    case ViolationKind::CrossDegree: return "cross-degree";
    case ViolationKind::SelfLoop: return "self-loop";
    case ViolationKind::Duplicate: return "duplicate";
    case ViolationKind::Asymmetry: return "asymmetry";
    }
    return "unknown";
}

bool ValidationReport::has(ViolationKind kind) const noexcept
{
    return std::any_of(violations.begin(), violations.end(),
                       [kind](const Violation& v) { return v.kind == kind; });
}

ValidationReport validate(const ClusteredRegularGraph& g)
{
    ValidationReport report;
    const auto count = static_cast<NodeId>(g.node_count());
    std::vector<std::vector<NodeId>> sorted(count);
    for (NodeId u = 0; u < count; ++u) {
        auto nbrs = g.neighbors(u);
        sorted[u].assign(nbrs.begin(), nbrs.end());
        std::sort(sorted[u].begin(), sorted[u].end());
    }

    auto flag = [&report](NodeId u, ViolationKind kind) { report.violations.push_back({u, kind}); };

    for (NodeId u = 0; u < count; ++u) {
        const auto& nbrs = sorted[u];
        if (nbrs.size() != static_cast<std::size_t>(g.d()))
            flag(u, ViolationKind::Degree);
        const auto cross = std::count_if(nbrs.begin(), nbrs.end(),
                                         [&](NodeId v) { return g.community(v) != g.community(u); });
        if (cross != g.b())
            flag(u, ViolationKind::CrossDegree);
        if (std::binary_search(nbrs.begin(), nbrs.end(), u))
            flag(u, ViolationKind::SelfLoop);
        if (std::adjacent_find(nbrs.begin(), nbrs.end()) != nbrs.end())
            flag(u, ViolationKind::Duplicate);
        // Multiplicity must match in both directions.
        bool symmetric = true;
        for (auto it = nbrs.begin(); it != nbrs.end() && symmetric;) {
            const NodeId v = *it;
            const auto run_end = std::upper_bound(it, nbrs.end(), v);
            const auto forward = run_end - it;
            const auto& back = sorted[v];
            const auto [lo, hi] = std::equal_range(back.begin(), back.end(), u);
            if (hi - lo != forward)
                symmetric = false;
            it = run_end;
        }
        if (!symmetric)
            flag(u, ViolationKind::Asymmetry);
    }
    report.ok = report.violations.empty();
    return report;
}

namespace {

// Membership test for undirected edges: a bit matrix for moderate n,
// a hash set beyond that.
class EdgeSet {
public:
    explicit EdgeSet(std::size_t nodes) : nodes_(nodes)
    {
        if (nodes <= kDenseLimit)
            bits_.assign((nodes * nodes + 63) / 64, 0);
    }

    [[nodiscard]] bool contains(NodeId u, NodeId v) const
    {
        if (!bits_.empty()) {
            const std::size_t i = u * nodes_ + v;
            return (bits_[i / 64] >> (i % 64)) & 1u;
        }
        return hashed_.count(key(u, v)) != 0;
    }

    void insert(NodeId u, NodeId v)
    {
        if (!bits_.empty()) {
            const std::size_t i = u * nodes_ + v;
            const std::size_t j = v * nodes_ + u;
            bits_[i / 64] |= std::uint64_t{1} << (i % 64);
            bits_[j / 64] |= std::uint64_t{1} << (j % 64);
        } else {
            hashed_.insert(key(u, v));
        }
    }

private:
    static constexpr std::size_t kDenseLimit = 8192;

    static std::uint64_t key(NodeId u, NodeId v)
    {
        if (u > v)
            std::swap(u, v);
        return std::uint64_t{u} << 32 | v;
    }

    std::size_t nodes_;
    std::vector<std::uint64_t> bits_;
    std::unordered_set<std::uint64_t> hashed_;
};

// Random stub picks before falling back to an exhaustive scan.
constexpr int kRandomTries = 64;

void remove_at(std::vector<NodeId>& pool, std::size_t i)
{
    pool[i] = pool.back();
    pool.pop_back();
}

// One pairing attempt within a single vertex set. Returns false if stuck.
bool try_pair_community(int n, int a, std::mt19937_64& rng, AdjacencyLists& out)
{
    out.assign(n, {});
    std::vector<NodeId> pool;
    pool.reserve(static_cast<std::size_t>(n) * a);
    for (int u = 0; u < n; ++u)
        pool.insert(pool.end(), a, static_cast<NodeId>(u));
    EdgeSet edges(n);

    auto admissible = [&](std::size_t i, std::size_t j) {
        return pool[i] != pool[j] && !edges.contains(pool[i], pool[j]);
    };
    auto join = [&](std::size_t i, std::size_t j) {
        const NodeId u = pool[i], v = pool[j];
        edges.insert(u, v);
        out[u].push_back(v);
        out[v].push_back(u);
        remove_at(pool, std::max(i, j));
        remove_at(pool, std::min(i, j));
    };

    while (!pool.empty()) {
        bool joined = false;
        for (int t = 0; t < kRandomTries && !joined; ++t) {
            const auto m = static_cast<std::uint32_t>(pool.size());
            const std::size_t i = bounded(rng(), m);
            const std::size_t j = bounded(rng(), m);
            if (i != j && admissible(i, j)) {
                join(i, j);
                joined = true;
            }
        }
        if (joined)
            continue;
        std::uint64_t count = 0;
        for (std::size_t i = 0; i < pool.size(); ++i)
            for (std::size_t j = i + 1; j < pool.size(); ++j)
                count += admissible(i, j);
        if (count == 0)
            return false;
        std::uint64_t pick = bounded64(rng(), count);
        for (std::size_t i = 0; i < pool.size() && !joined; ++i) {
            for (std::size_t j = i + 1; j < pool.size(); ++j) {
                if (admissible(i, j) && pick-- == 0) {
                    join(i, j);
                    joined = true;
                    break;
                }
            }
        }
    }
    return true;
}

bool try_pair_cut(int n, int b, std::mt19937_64& rng, AdjacencyLists& out)
{
    out.assign(n, {});
    std::vector<NodeId> left, right;
    left.reserve(static_cast<std::size_t>(n) * b);
    right.reserve(static_cast<std::size_t>(n) * b);
    for (int u = 0; u < n; ++u) {
        left.insert(left.end(), b, static_cast<NodeId>(u));
        right.insert(right.end(), b, static_cast<NodeId>(u));
    }
    // Right ids are offset by n inside the edge set.
    EdgeSet edges(2 * static_cast<std::size_t>(n));
    const auto offset = static_cast<NodeId>(n);

    auto admissible = [&](std::size_t i, std::size_t j) { return !edges.contains(left[i], right[j] + offset); };
    auto join = [&](std::size_t i, std::size_t j) {
        edges.insert(left[i], right[j] + offset);
        out[left[i]].push_back(right[j]);
        remove_at(left, i);
        remove_at(right, j);
    };

    while (!left.empty()) {
        bool joined = false;
        for (int t = 0; t < kRandomTries && !joined; ++t) {
            const auto m = static_cast<std::uint32_t>(left.size());
            const std::size_t i = bounded(rng(), m);
            const std::size_t j = bounded(rng(), m);
            if (admissible(i, j)) {
                join(i, j);
                joined = true;
            }
        }
        if (joined)
            continue;
        std::uint64_t count = 0;
        for (std::size_t i = 0; i < left.size(); ++i)
            for (std::size_t j = 0; j < right.size(); ++j)
                count += admissible(i, j);
        if (count == 0)
            return false;
        std::uint64_t pick = bounded64(rng(), count);
        for (std::size_t i = 0; i < left.size() && !joined; ++i) {
            for (std::size_t j = 0; j < right.size(); ++j) {
                if (admissible(i, j) && pick-- == 0) {
                    join(i, j);
                    joined = true;
                    break;
                }
            }
        }
    }
    return true;
}

void sort_lists(AdjacencyLists& lists)
{
    for (auto& l : lists)
        std::sort(l.begin(), l.end());
}

AdjacencyLists circulant(int n, int a)
{
    if (a % 2 == 1 && n % 2 == 1)
        throw std::invalid_argument("circulant graph with odd degree needs an even node count");
    AdjacencyLists out(n);
    for (int i = 0; i < n; ++i) {
        for (int k = 1; k <= a / 2; ++k) {
            out[i].push_back(static_cast<NodeId>((i + k) % n));
            out[i].push_back(static_cast<NodeId>((i - k + n) % n));
        }
        if (a % 2 == 1)
            out[i].push_back(static_cast<NodeId>((i + n / 2) % n));
    }
    sort_lists(out);
    return out;
}

// BFS over the subgraph induced by [lo, hi), or the whole graph.
// Returns {connected, bipartite}.
std::pair<bool, bool> explore(const ClusteredRegularGraph& g, NodeId lo, NodeId hi)
{
    if (hi <= lo)
        return {true, true};
    std::vector<int> side(hi - lo, -1);
    bool bipartite = true;
    std::size_t seen = 0;
    for (NodeId start = lo; start < hi; ++start) {
        if (side[start - lo] != -1)
            continue;
        if (seen > 0)
            return {false, bipartite};
        std::queue<NodeId> q;
        side[start - lo] = 0;
        q.push(start);
        ++seen;
        while (!q.empty()) {
            const NodeId u = q.front();
            q.pop();
            for (NodeId v : g.neighbors(u)) {
                if (v < lo || v >= hi)
                    continue;
                if (side[v - lo] == -1) {
                    side[v - lo] = 1 - side[u - lo];
                    q.push(v);
                    ++seen;
                } else if (side[v - lo] == side[u - lo]) {
                    bipartite = false;
                }
            }
        }
    }
    return {true, bipartite};
}

std::pair<NodeId, NodeId> community_range(const ClusteredRegularGraph& g, int community)
{
    if (community != 1 && community != 2)
        throw std::invalid_argument("community must be 1 or 2");
    const auto n = static_cast<NodeId>(g.n());
    return community == 1 ? std::pair{NodeId{0}, n} : std::pair{n, 2 * n};
}

} // namespace

AdjacencyLists generate_regular_community(int n, int a, std::uint64_t seed, GenerationMethod method,
                                          int restart_cap)
{
    if (n < 2)
        throw std::invalid_argument("community needs at least 2 nodes");
    if (a < 0 || a > n - 1)
        throw std::invalid_argument("intra degree a=" + std::to_string(a) + " outside [0, n-1]");
    if ((static_cast<long long>(n) * a) % 2 != 0)
        throw std::invalid_argument("parity violation: n*a = " + std::to_string(static_cast<long long>(n) * a) +
                                    " is odd, no a-regular graph exists");
    if (method == GenerationMethod::Circulant)
        return circulant(n, a);

    std::mt19937_64 rng(seed);
    AdjacencyLists out;
    for (int attempt = 0; attempt <= restart_cap; ++attempt) {
        if (try_pair_community(n, a, rng, out)) {
            sort_lists(out);
            return out;
        }
    }
    throw GenerationError("regular community (n=" + std::to_string(n) + ", a=" + std::to_string(a) +
                          ", seed=" + std::to_string(seed) + ") still stuck after " +
                          std::to_string(restart_cap) + " restarts");
}

AdjacencyLists generate_regular_cut(int n, int b, std::uint64_t seed, int restart_cap)
{
    if (n < 1)
        throw std::invalid_argument("cut needs at least 1 node per side");
    if (b < 0 || b > n)
        throw std::invalid_argument("cross degree b=" + std::to_string(b) + " outside [0, n]");
    std::mt19937_64 rng(seed);
    AdjacencyLists out;
    for (int attempt = 0; attempt <= restart_cap; ++attempt) {
        if (try_pair_cut(n, b, rng, out)) {
            sort_lists(out);
            return out;
        }
    }
    throw GenerationError("regular cut (n=" + std::to_string(n) + ", b=" + std::to_string(b) + ", seed=" +
                          std::to_string(seed) + ") still stuck after " + std::to_string(restart_cap) +
                          " restarts");
}

ClusteredRegularGraph assemble_clustered(const AdjacencyLists& first, const AdjacencyLists& second,
                                         const AdjacencyLists& cut)
{
    const std::size_t n = first.size();
    if (second.size() != n || cut.size() != n)
        throw std::invalid_argument("communities and cut must cover the same n");
    const auto offset = static_cast<NodeId>(n);
    AdjacencyLists lists(2 * n);
    for (std::size_t u = 0; u < n; ++u) {
        lists[u] = first[u];
        for (NodeId v : cut[u])
            lists[u].push_back(v + offset);
    }
    for (std::size_t u = 0; u < n; ++u)
        for (NodeId v : cut[u])
            lists[v + offset].push_back(static_cast<NodeId>(u));
    for (std::size_t v = 0; v < n; ++v)
        for (NodeId w : second[v])
            lists[v + offset].push_back(w + offset);
    const int a = n > 0 ? static_cast<int>(first[0].size()) : 0;
    const int b = n > 0 ? static_cast<int>(cut[0].size()) : 0;
    return ClusteredRegularGraph(static_cast<int>(n), a + b, b, lists);
}

GeneratedGraph generate_clustered_regular(int n, int a, int b, std::uint64_t seed, GenerationMethod method,
                                          int restart_cap)
{
    const auto first = generate_regular_community(n, a, derive_seed(seed, 1), method, restart_cap);
    const auto second = generate_regular_community(n, a, derive_seed(seed, 2), method, restart_cap);
    const auto cut = generate_regular_cut(n, b, derive_seed(seed, 3), restart_cap);

    GeneratedGraph result{assemble_clustered(first, second, cut)};
    result.connected = is_connected(result.graph);
    for (int c = 0; c < 2; ++c) {
        const auto [lo, hi] = community_range(result.graph, c + 1);
        const auto [conn, bip] = explore(result.graph, lo, hi);
        result.communities_connected[c] = conn;
        result.communities_nonbipartite[c] = !bip;
    }
    return result;
}

bool is_connected(const ClusteredRegularGraph& g)
{
    return explore(g, 0, static_cast<NodeId>(g.node_count())).first;
}

bool community_connected(const ClusteredRegularGraph& g, int community)
{
    const auto [lo, hi] = community_range(g, community);
    return explore(g, lo, hi).first;
}

bool community_bipartite(const ClusteredRegularGraph& g, int community)
{
    const auto [lo, hi] = community_range(g, community);
    return explore(g, lo, hi).second;
}

void write_graph(std::ostream& out, const ClusteredRegularGraph& g)
{
    out << "crg v1\n" << "n=" << g.n() << " d=" << g.d() << " b=" << g.b() << '\n';
    for (NodeId u = 0; u < g.node_count(); ++u)
        for (NodeId v : g.neighbors(u))
            if (u < v)
                out << u << ' ' << v << '\n';
}

namespace {

int parse_field(const std::string& token, const char* name)
{
    const std::string prefix = std::string(name) + "=";
    if (token.rfind(prefix, 0) != 0)
        throw GraphFormatError("malformed header: expected '" + prefix + "<int>', got '" + token + "'");
    try {
        std::size_t used = 0;
        const int value = std::stoi(token.substr(prefix.size()), &used);
        if (used != token.size() - prefix.size() || value < 0)
            throw GraphFormatError("malformed header field '" + token + "'");
        return value;
    } catch (const std::logic_error&) {
        throw GraphFormatError("malformed header field '" + token + "'");
    }
}

void strip_cr(std::string& line)
{
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
}

} // namespace

ClusteredRegularGraph read_graph(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw GraphFormatError("empty graph file");
    strip_cr(line);
    if (line != "crg v1")
        throw GraphFormatError("missing 'crg v1' header line, got '" + line + "'");
    if (!std::getline(in, line))
        throw GraphFormatError("missing parameter line 'n=<n> d=<d> b=<b>'");
    strip_cr(line);
    std::istringstream header(line);
    std::string tn, td, tb, extra;
    if (!(header >> tn >> td >> tb) || (header >> extra))
        throw GraphFormatError("malformed header: expected 'n=<n> d=<d> b=<b>', got '" + line + "'");
    const int n = parse_field(tn, "n");
    const int d = parse_field(td, "d");
    const int b = parse_field(tb, "b");

    const auto count = 2 * static_cast<std::size_t>(n);
    AdjacencyLists lists(count);
    std::size_t lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (line.empty())
            continue;
        std::istringstream edge(line);
        long long u = 0, v = 0;
        if (!(edge >> u >> v) || (edge >> extra))
            throw GraphFormatError("line " + std::to_string(lineno) + ": malformed edge '" + line + "'");
        if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= count || static_cast<std::size_t>(v) >= count)
            throw GraphFormatError("line " + std::to_string(lineno) + ": node id out of range [0, " +
                                   std::to_string(count) + ") in '" + line + "'");
        if (u >= v)
            throw GraphFormatError("line " + std::to_string(lineno) + ": edge must satisfy u < v, got '" + line +
                                   "'");
        lists[u].push_back(static_cast<NodeId>(v));
        lists[v].push_back(static_cast<NodeId>(u));
    }
    sort_lists(lists);
    for (std::size_t u = 0; u < count; ++u) {
        if (std::adjacent_find(lists[u].begin(), lists[u].end()) != lists[u].end())
            throw GraphFormatError("edge list repeats an edge at node " + std::to_string(u));
        if (lists[u].size() != static_cast<std::size_t>(d))
            throw GraphFormatError("edge list gives node " + std::to_string(u) + " degree " +
                                   std::to_string(lists[u].size()) + ", header says d=" + std::to_string(d));
        const bool left = u < static_cast<std::size_t>(n);
        const auto cross = std::count_if(lists[u].begin(), lists[u].end(),
                                         [&](NodeId v) { return (v < static_cast<NodeId>(n)) != left; });
        if (cross != b)
            throw GraphFormatError("edge list gives node " + std::to_string(u) + " cross degree " +
                                   std::to_string(cross) + ", header says b=" + std::to_string(b));
    }
    return ClusteredRegularGraph(n, d, b, lists);
}

void save_graph(const ClusteredRegularGraph& g, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    write_graph(out, g);
    if (!out)
        throw std::runtime_error("write to '" + path.string() + "' failed");
}

ClusteredRegularGraph load_graph(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open graph file '" + path.string() + "'");
    return read_graph(in);
}

} // namespace twochoices
