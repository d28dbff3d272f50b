#pragma once

#include "twochoices/dynamics.hpp"
#include "twochoices/graph.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace twochoices {

/// ℓ colors per node, one per independent run; stored node-major.
class LabelMatrix {
public:
    LabelMatrix() = default;
    LabelMatrix(std::size_t nodes, std::size_t ell);

    [[nodiscard]] std::size_t nodes() const noexcept { return nodes_; }
    [[nodiscard]] std::size_t ell() const noexcept { return ell_; }

    [[nodiscard]] Color at(std::size_t u, std::size_t k) const noexcept { return data_[u * ell_ + k]; }
    void set(std::size_t u, std::size_t k, Color c) noexcept { data_[u * ell_ + k] = c; }

    [[nodiscard]] std::span<const Color> row(std::size_t u) const noexcept { return {data_.data() + u * ell_, ell_}; }
    [[nodiscard]] Configuration column(std::size_t k) const;
    void set_column(std::size_t k, const Configuration& c);

    /// Copy keeping only the listed columns, in the listed order.
    [[nodiscard]] LabelMatrix select_columns(std::span<const std::size_t> keep) const;

    friend bool operator==(const LabelMatrix&, const LabelMatrix&) = default;

private:
    std::size_t nodes_ = 0;
    std::size_t ell_ = 0;
    std::vector<Color> data_;
};

/// 4·⌈log₂ 2n⌉ and 6·⌈ln 2n⌉.
[[nodiscard]] int default_csl_ell(int n);
[[nodiscard]] int default_csl_rounds(int n);

/// Column k is the standalone 2-Choices run with RngContext{seed, run = k}:
/// random_init at that context, then `rounds` steps; the final configuration
/// fills the column. Columns run concurrently on up to `workers` threads.
[[nodiscard]] LabelMatrix csl_run(const ClusteredRegularGraph& g, int ell, int rounds, std::uint64_t seed,
                                  int workers = 1);

/// True iff the vectors differ in at most max_hamming positions; the default
/// is strict equality. Throws on a length mismatch.
[[nodiscard]] bool csl_predicate(std::span<const Color> u, std::span<const Color> v, std::size_t max_hamming = 0);

struct CslScore {
    double intra_equal_rate = 1.0; ///< 1 when no same-community pair was evaluated
    double inter_diff_rate = 1.0;  ///< 1 when no cross-community pair was evaluated
    std::uint64_t outlier_pairs = 0;
    std::uint64_t pairs_evaluated = 0;
    std::uint64_t intra_pairs = 0;
    std::uint64_t inter_pairs = 0;

    [[nodiscard]] double accuracy() const noexcept
    {
        return intra_equal_rate < inter_diff_rate ? intra_equal_rate : inter_diff_rate;
    }
};

inline constexpr int kAllPairsLimit = 4000;

/// Scores the predicate as a same-community test. All unordered pairs are
/// evaluated when 2n ≤ 4000, otherwise pair_budget pairs drawn uniformly
/// (with replacement) using `seed`.
[[nodiscard]] CslScore csl_score(const ClusteredRegularGraph& g, const LabelMatrix& labels,
                                 std::uint64_t pair_budget, std::uint64_t seed, std::size_t max_hamming = 0);

/// classify() of every column.
[[nodiscard]] std::vector<Outcome> column_outcomes(const ClusteredRegularGraph& g, const LabelMatrix& labels,
                                                   double kappa = kDefaultKappa);

/// Header "node,c0,...,c{ℓ-1}", one row per node, red 0 and blue 1.
void write_labels_csv(std::ostream& out, const LabelMatrix& labels);

} // namespace twochoices
