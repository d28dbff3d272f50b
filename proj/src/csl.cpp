#include "twochoices/csl.hpp"

#include "twochoices/parallel.hpp"

#include <bit>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

namespace twochoices {

LabelMatrix::LabelMatrix(std::size_t nodes, std::size_t ell) : nodes_(nodes), ell_(ell), data_(nodes * ell, Color::Red)
{
}

Configuration LabelMatrix::column(std::size_t k) const
{
    Configuration c(nodes_, Color::Red);
    for (std::size_t u = 0; u < nodes_; ++u)
        c.set(u, at(u, k));
    return c;
}

void LabelMatrix::set_column(std::size_t k, const Configuration& c)
{
    if (c.size() != nodes_ || k >= ell_)
        throw std::invalid_argument("column does not fit the label matrix");
    for (std::size_t u = 0; u < nodes_; ++u)
        set(u, k, c[u]);
}

LabelMatrix LabelMatrix::select_columns(std::span<const std::size_t> keep) const
{
    LabelMatrix out(nodes_, keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j) {
        if (keep[j] >= ell_)
            throw std::out_of_range("column " + std::to_string(keep[j]) + " out of range");
        for (std::size_t u = 0; u < nodes_; ++u)
            out.set(u, j, at(u, keep[j]));
    }
    return out;
}

int default_csl_ell(int n)
{
    return 4 * static_cast<int>(std::ceil(std::log2(2.0 * n)));
}

int default_csl_rounds(int n)
{
    return 6 * static_cast<int>(std::ceil(std::log(2.0 * n)));
}

LabelMatrix csl_run(const ClusteredRegularGraph& g, int ell, int rounds, std::uint64_t seed, int workers)
{
    if (ell < 1)
        throw std::invalid_argument("ell must be at least 1");
    if (rounds < 0)
        throw std::invalid_argument("rounds must be non-negative");
    LabelMatrix labels(g.node_count(), static_cast<std::size_t>(ell));
    parallel_for_index(static_cast<std::size_t>(ell), workers, [&](std::size_t k) {
        const RngContext ctx{seed, k, 0};
        Configuration current = random_init(g, ctx);
        Configuration next(current.size(), Color::Red);
        for (int r = 0; r < rounds; ++r) {
            step_into(g, current, next, Rule::TwoChoices, ctx.at_round(r));
            std::swap(current, next);
        }
        // Distinct columns touch disjoint cells.
        labels.set_column(k, current);
    });
    return labels;
}

bool csl_predicate(std::span<const Color> u, std::span<const Color> v, std::size_t max_hamming)
{
    if (u.size() != v.size())
        throw std::invalid_argument("label vectors have lengths " + std::to_string(u.size()) + " and " +
                                    std::to_string(v.size()));
    std::size_t diff = 0;
    for (std::size_t k = 0; k < u.size(); ++k)
        if (u[k] != v[k] && ++diff > max_hamming)
            return false;
    return true;
}

namespace {

// Rows packed 64 columns per word so a pair costs ⌈ℓ/64⌉ xor-popcounts.
class PackedRows {
public:
    explicit PackedRows(const LabelMatrix& labels) : words_((labels.ell() + 63) / 64), bits_(labels.nodes() * words_, 0)
    {
        for (std::size_t u = 0; u < labels.nodes(); ++u)
            for (std::size_t k = 0; k < labels.ell(); ++k)
                if (labels.at(u, k) == Color::Blue)
                    bits_[u * words_ + k / 64] |= std::uint64_t{1} << (k % 64);
    }

    [[nodiscard]] bool similar(std::size_t u, std::size_t v, std::size_t max_hamming) const noexcept
    {
        std::size_t diff = 0;
        for (std::size_t w = 0; w < words_; ++w) {
            diff += static_cast<std::size_t>(std::popcount(bits_[u * words_ + w] ^ bits_[v * words_ + w]));
            if (diff > max_hamming)
                return false;
        }
        return true;
    }

private:
    std::size_t words_;
    std::vector<std::uint64_t> bits_;
};

} // namespace

CslScore csl_score(const ClusteredRegularGraph& g, const LabelMatrix& labels, std::uint64_t pair_budget,
                   std::uint64_t seed, std::size_t max_hamming)
{
    if (labels.nodes() != g.node_count())
        throw std::invalid_argument("label matrix has " + std::to_string(labels.nodes()) + " rows, graph has " +
                                    std::to_string(g.node_count()) + " nodes");
    const PackedRows rows(labels);
    const std::size_t n = static_cast<std::size_t>(g.n());
    const std::size_t total = g.node_count();
    std::uint64_t intra = 0, intra_ok = 0, inter = 0, inter_ok = 0;

    auto score = [&](std::size_t u, std::size_t v) {
        const bool same_community = (u < n) == (v < n);
        const bool similar = rows.similar(u, v, max_hamming);
        if (same_community) {
            ++intra;
            intra_ok += similar;
        } else {
            ++inter;
            inter_ok += !similar;
        }
    };

    if (total <= static_cast<std::size_t>(kAllPairsLimit)) {
        for (std::size_t u = 0; u < total; ++u)
            for (std::size_t v = u + 1; v < total; ++v)
                score(u, v);
    } else {
        std::mt19937_64 rng(seed);
        for (std::uint64_t i = 0; i < pair_budget; ++i) {
            const std::size_t u = bounded64(rng(), total);
            std::size_t v = bounded64(rng(), total - 1);
            v += v >= u; // uniform over v ≠ u
            score(u, v);
        }
    }

    CslScore s;
    s.intra_pairs = intra;
    s.inter_pairs = inter;
    s.pairs_evaluated = intra + inter;
    s.outlier_pairs = (intra - intra_ok) + (inter - inter_ok);
    if (intra > 0)
        s.intra_equal_rate = static_cast<double>(intra_ok) / static_cast<double>(intra);
    if (inter > 0)
        s.inter_diff_rate = static_cast<double>(inter_ok) / static_cast<double>(inter);
    return s;
}

std::vector<Outcome> column_outcomes(const ClusteredRegularGraph& g, const LabelMatrix& labels, double kappa)
{
    std::vector<Outcome> out;
    out.reserve(labels.ell());
    for (std::size_t k = 0; k < labels.ell(); ++k)
        out.push_back(classify(biases(g, labels.column(k)), g.n(), kappa));
    return out;
}

void write_labels_csv(std::ostream& out, const LabelMatrix& labels)
{
    out << "node";
    for (std::size_t k = 0; k < labels.ell(); ++k)
        out << ",c" << k;
    out << '\n';
    for (std::size_t u = 0; u < labels.nodes(); ++u) {
        out << u;
        for (Color c : labels.row(u))
            out << ',' << (c == Color::Blue ? 1 : 0);
        out << '\n';
    }
}

} // namespace twochoices
