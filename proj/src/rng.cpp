#include "twochoices/rng.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define TWOCHOICES_HAVE_X86 1
#endif

namespace twochoices {

namespace {

void generate_batch_scalar(const RngContext& ctx, std::uint32_t first, BlockBatch& words) noexcept
{
    for (std::uint32_t i = 0; i < kBatchNodes; ++i) {
        const auto b = ctx.block(first + i);
        for (int w = 0; w < 4; ++w)
            words[w][i] = b[w];
    }
}

#ifdef TWOCHOICES_HAVE_X86

// Four independent groups of eight lanes keep the multiply pipes busy.
__attribute__((target("avx2"))) void generate_batch_avx2(const RngContext& ctx, std::uint32_t first,
                                                         BlockBatch& words) noexcept
{
    constexpr int kGroups = kBatchNodes / 8;
    const auto c1 = static_cast<int>(static_cast<std::uint32_t>(ctx.round + 1));
    const auto c2 = static_cast<int>(static_cast<std::uint32_t>(ctx.run));
    const auto c3 = static_cast<int>(static_cast<std::uint32_t>(ctx.run >> 32));
    auto k0 = static_cast<std::uint32_t>(ctx.seed);
    auto k1 = static_cast<std::uint32_t>(ctx.seed >> 32);

    __m256i x0[kGroups], x1[kGroups], x2[kGroups], x3[kGroups];
    const __m256i lane = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);
    for (int g = 0; g < kGroups; ++g) {
        x0[g] = _mm256_add_epi32(_mm256_set1_epi32(static_cast<int>(first + 8u * g)), lane);
        x1[g] = _mm256_set1_epi32(c1);
        x2[g] = _mm256_set1_epi32(c2);
        x3[g] = _mm256_set1_epi32(c3);
    }
    const __m256i m0 = _mm256_set1_epi32(static_cast<int>(0xD2511F53u));
    const __m256i m1 = _mm256_set1_epi32(static_cast<int>(0xCD9E8D57u));
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        const __m256i key0 = _mm256_set1_epi32(static_cast<int>(k0));
        const __m256i key1 = _mm256_set1_epi32(static_cast<int>(k1));
        for (int g = 0; g < kGroups; ++g) {
            // 32x32->64 products of even and odd lanes, then split into hi/lo words.
            const __m256i pe0 = _mm256_mul_epu32(x0[g], m0);
            const __m256i po0 = _mm256_mul_epu32(_mm256_srli_epi64(x0[g], 32), m0);
            const __m256i pe1 = _mm256_mul_epu32(x2[g], m1);
            const __m256i po1 = _mm256_mul_epu32(_mm256_srli_epi64(x2[g], 32), m1);
            const __m256i hi0 = _mm256_blend_epi32(_mm256_srli_epi64(pe0, 32), po0, 0xAA);
            const __m256i lo0 = _mm256_blend_epi32(pe0, _mm256_slli_epi64(po0, 32), 0xAA);
            const __m256i hi1 = _mm256_blend_epi32(_mm256_srli_epi64(pe1, 32), po1, 0xAA);
            const __m256i lo1 = _mm256_blend_epi32(pe1, _mm256_slli_epi64(po1, 32), 0xAA);
            x0[g] = _mm256_xor_si256(_mm256_xor_si256(hi1, x1[g]), key0);
            x1[g] = lo1;
            x2[g] = _mm256_xor_si256(_mm256_xor_si256(hi0, x3[g]), key1);
            x3[g] = lo0;
        }
    }
    for (int g = 0; g < kGroups; ++g) {
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(words[0].data() + 8 * g), x0[g]);
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(words[1].data() + 8 * g), x1[g]);
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(words[2].data() + 8 * g), x2[g]);
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(words[3].data() + 8 * g), x3[g]);
    }
}

bool cpu_has_avx2() noexcept
{
    static const bool has = __builtin_cpu_supports("avx2");
    return has;
}

#endif

} // namespace

void generate_batch(const RngContext& ctx, std::uint32_t first, BlockBatch& words) noexcept
{
#ifdef TWOCHOICES_HAVE_X86
    if (cpu_has_avx2()) {
        generate_batch_avx2(ctx, first, words);
        return;
    }
#endif
    generate_batch_scalar(ctx, first, words);
}

} // namespace twochoices
