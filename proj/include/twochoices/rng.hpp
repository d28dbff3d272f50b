#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace twochoices {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Every output
// block is a pure function of (counter, key), so any node's draws in any
// round can be produced independently of every other draw.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter generate(Counter ctr, Key key) noexcept
    {
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            ctr = Counter{static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                          static_cast<std::uint32_t>(p1),
                          static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                          static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// SplitMix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept
{
    return mix64(mix64(seed) ^ mix64(stream ^ 0x5851F42D4C957F2Dull));
}

__extension__ typedef unsigned __int128 uint128;

/// Uniform index in [0, bound) from 64 random bits (multiply-high).
/// Bias is at most bound / 2^64.
inline std::uint32_t bounded(std::uint64_t bits, std::uint32_t bound) noexcept
{
    return static_cast<std::uint32_t>((static_cast<uint128>(bits) * bound) >> 64);
}

inline std::uint64_t bounded64(std::uint64_t bits, std::uint64_t bound) noexcept
{
    return static_cast<std::uint64_t>((static_cast<uint128>(bits) * bound) >> 64);
}

/// Randomness coordinates of one simulation run.
///
/// The draw for (seed, run, round, node, k) is a pure function of that tuple:
/// the key is the master seed, the counter packs (node, round + 1, run). Round
/// -1 is reserved for the random initialization. Draw k ∈ {0, 1} takes the
/// k-th 64-bit half of the node's Philox block.
struct RngContext {
    std::uint64_t seed = 0;
    std::uint64_t run = 0;
    std::int64_t round = 0;

    static constexpr std::int64_t kInitRound = -1;

    [[nodiscard]] RngContext at_round(std::int64_t r) const noexcept { return {seed, run, r}; }

    [[nodiscard]] Philox4x32::Counter block(std::uint32_t node) const noexcept
    {
        return Philox4x32::generate(
            {node, static_cast<std::uint32_t>(round + 1), static_cast<std::uint32_t>(run),
             static_cast<std::uint32_t>(run >> 32)},
            {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
    }

    [[nodiscard]] std::uint64_t draw(std::uint32_t node, int k) const noexcept
    {
        const auto b = block(node);
        return k == 0 ? (std::uint64_t{b[1]} << 32 | b[0]) : (std::uint64_t{b[3]} << 32 | b[2]);
    }
};

/// Philox blocks of kBatchNodes consecutive node ids at one round:
/// words[w][i] is word w of node (first + i). Uses AVX2 when the CPU has it;
/// the output is bit-identical to RngContext::block either way.
inline constexpr std::size_t kBatchNodes = 32;
using BlockBatch = std::array<std::array<std::uint32_t, kBatchNodes>, 4>;

void generate_batch(const RngContext& ctx, std::uint32_t first, BlockBatch& words) noexcept;

} // namespace twochoices
