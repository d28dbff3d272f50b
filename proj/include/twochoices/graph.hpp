#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace twochoices {

using NodeId = std::uint32_t;
using AdjacencyLists = std::vector<std::vector<NodeId>>;

class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GraphFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two communities V1 = [0, n) and V2 = [n, 2n). Each community is a-regular,
/// the cut between them is b-regular, so every node has degree d = a + b.
///
/// The structure is immutable once built. The constructor does not check the
/// defining properties; call validate() for that. Neighbor lists are stored
/// in CSR form and kept in the order given.
class ClusteredRegularGraph {
public:
    ClusteredRegularGraph() = default;
    ClusteredRegularGraph(int n, int d, int b, const AdjacencyLists& adjacency);

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] int d() const noexcept { return d_; }
    [[nodiscard]] int b() const noexcept { return b_; }
    [[nodiscard]] int a() const noexcept { return d_ - b_; }
    [[nodiscard]] std::size_t node_count() const noexcept { return 2 * static_cast<std::size_t>(n_); }

    /// 1 for V1, 2 for V2.
    [[nodiscard]] int community(NodeId u) const noexcept { return u < static_cast<NodeId>(n_) ? 1 : 2; }

    [[nodiscard]] std::span<const NodeId> neighbors(NodeId u) const noexcept
    {
        return {targets_.data() + offsets_[u], offsets_[u + 1] - offsets_[u]};
    }

    [[nodiscard]] std::size_t degree(NodeId u) const noexcept { return offsets_[u + 1] - offsets_[u]; }

    friend bool operator==(const ClusteredRegularGraph&, const ClusteredRegularGraph&) = default;

private:
    int n_ = 0;
    int d_ = 0;
    int b_ = 0;
    std::vector<std::size_t> offsets_{0};
    std::vector<NodeId> targets_;
};

enum class ViolationKind { Degree, CrossDegree, SelfLoop, Duplicate, Asymmetry };

[[nodiscard]] const char* to_string(ViolationKind kind) noexcept;

struct Violation {
    NodeId node;
    ViolationKind kind;
    friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
    bool ok = true;
    std::vector<Violation> violations;

    [[nodiscard]] bool has(ViolationKind kind) const noexcept;
};

[[nodiscard]] ValidationReport validate(const ClusteredRegularGraph& g);

enum class GenerationMethod { Pairing, Circulant };

inline constexpr int kDefaultRestartCap = 1000;

/// Simple a-regular graph on n nodes.
///
/// Pairing: stubs are paired uniformly at random, rejecting any single pair
/// that would form a loop or a multi-edge (Steger-Wormald); if no admissible
/// pair remains the whole pairing restarts, at most `restart_cap` times.
/// Circulant: node i joins i±1, ..., i±a/2 (mod n), plus the antipode i+n/2
/// when a is odd. Neighbor lists come out sorted.
[[nodiscard]] AdjacencyLists generate_regular_community(int n, int a, std::uint64_t seed,
                                                        GenerationMethod method = GenerationMethod::Pairing,
                                                        int restart_cap = kDefaultRestartCap);

/// Simple b-regular bipartite graph between two sides of n nodes, returned as
/// cut[i] = sorted list of right-side indices joined to left node i. Built by
/// pairing the b stubs of each side with local rejection of repeated edges,
/// which yields a union of b disjoint perfect matchings.
[[nodiscard]] AdjacencyLists generate_regular_cut(int n, int b, std::uint64_t seed,
                                                  int restart_cap = kDefaultRestartCap);

struct GeneratedGraph {
    ClusteredRegularGraph graph;
    bool connected = false;
    std::array<bool, 2> communities_connected{};
    std::array<bool, 2> communities_nonbipartite{};
};

/// Joins two a-regular communities (local ids 0..n-1) through a cut given as
/// cut[i] = right-side local ids of left node i. No property is checked.
[[nodiscard]] ClusteredRegularGraph assemble_clustered(const AdjacencyLists& first, const AdjacencyLists& second,
                                                       const AdjacencyLists& cut);

/// Two independent communities plus one cut, each from a seed derived from
/// `seed`. Every neighbor list is sorted ascending.
[[nodiscard]] GeneratedGraph generate_clustered_regular(int n, int a, int b, std::uint64_t seed,
                                                        GenerationMethod method = GenerationMethod::Pairing,
                                                        int restart_cap = kDefaultRestartCap);

// Structural queries.
[[nodiscard]] bool is_connected(const ClusteredRegularGraph& g);
[[nodiscard]] bool community_connected(const ClusteredRegularGraph& g, int community);
[[nodiscard]] bool community_bipartite(const ClusteredRegularGraph& g, int community);

// Text format: "crg v1", "n=<n> d=<d> b=<b>", then "u v" per edge with u < v.
void write_graph(std::ostream& out, const ClusteredRegularGraph& g);
[[nodiscard]] ClusteredRegularGraph read_graph(std::istream& in);
void save_graph(const ClusteredRegularGraph& g, const std::filesystem::path& path);
[[nodiscard]] ClusteredRegularGraph load_graph(const std::filesystem::path& path);

} // namespace twochoices
