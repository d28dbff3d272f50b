#include "twochoices/rng.hpp"

#include <doctest.h>

#include <cstdint>
#include <cstdlib>
#include <set>
#include <vector>

using namespace twochoices;

TEST_CASE("philox known answers")
{
    // Random123 kat_vectors, reproduced independently with TensorFlow's
    // stateless Philox4x32-10.
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::generate(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
          C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::generate(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
          C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
    CHECK(Philox4x32::generate(C{5, 3, 7, 0}, K{0x5eed, 0x1234}) == C{0xb9153667, 0xdd564f3c, 0x0c0615dd, 0xdcdf9279});
    static_assert(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0})[0] == 0x6627e8d5);
}

TEST_CASE("context maps coordinates onto the philox counter")
{
    const RngContext ctx{0x0000123400005eedull, 0x0000000700000003ull, 4};
    const auto expected = Philox4x32::generate({9, 5, 3, 7}, {0x5eed, 0x1234});
    CHECK(ctx.block(9) == expected);
    CHECK(ctx.draw(9, 0) == (std::uint64_t{expected[1]} << 32 | expected[0]));
    CHECK(ctx.draw(9, 1) == (std::uint64_t{expected[3]} << 32 | expected[2]));
    // init round -1 lands on counter word 0
    CHECK(ctx.at_round(RngContext::kInitRound).block(9) == Philox4x32::generate({9, 0, 3, 7}, {0x5eed, 0x1234}));
}

TEST_CASE("distinct coordinates give distinct blocks")
{
    std::set<Philox4x32::Counter> seen;
    for (std::uint64_t seed : {1ull, 2ull})
        for (std::uint64_t run : {0ull, 1ull, 1ull << 32})
            for (std::int64_t round : {-1, 0, 1})
                for (std::uint32_t node : {0u, 1u, 1000u})
                    seen.insert(RngContext{seed, run, round}.block(node));
    CHECK(seen.size() == 2 * 3 * 3 * 3);
}

TEST_CASE("batched blocks equal scalar blocks")
{
    for (const RngContext ctx : {RngContext{0, 0, 0}, RngContext{0xdeadbeefcafef00dull, 17, 99999},
                                 RngContext{42, 1ull << 40, -1}}) {
        for (std::uint32_t first : {0u, 5u, 1000u, 0xffffff00u}) {
            BlockBatch words;
            generate_batch(ctx, first, words);
            for (std::uint32_t i = 0; i < kBatchNodes; ++i) {
                const auto b = ctx.block(first + i);
                for (int w = 0; w < 4; ++w)
                    CHECK(words[w][i] == b[w]);
            }
        }
    }
}

TEST_CASE("bounded stays in range and is roughly uniform")
{
    CHECK(bounded(0, 7) == 0);
    CHECK(bounded(~std::uint64_t{0}, 7) == 6);
    CHECK(bounded64(~std::uint64_t{0}, 1ull << 40) == (1ull << 40) - 1);
    std::vector<int> hist(6, 0);
    const RngContext ctx{3, 0, 0};
    const int draws = 60000;
    for (int i = 0; i < draws; ++i)
        ++hist[bounded(ctx.draw(static_cast<std::uint32_t>(i), 0), 6)];
    // each cell ~ Binomial(60000, 1/6): sd ≈ 91
    for (int h : hist)
        CHECK(std::abs(h - draws / 6) < 500);
}

TEST_CASE("derived seeds separate streams")
{
    CHECK(derive_seed(1, 1) != derive_seed(1, 2));
    CHECK(derive_seed(1, 1) != derive_seed(2, 1));
    CHECK(derive_seed(7, 3) == derive_seed(7, 3));
    CHECK(mix64(0) != 0);
}
