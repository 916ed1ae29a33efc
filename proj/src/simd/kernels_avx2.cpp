#include "axiom/simd/kernels.hpp"

#include <immintrin.h>

namespace axiom::simd {

namespace {

void gauss5_avx2(const TokenSoA& t, const double* m, const double* iv, double c0, double* out) {
    const __m256d m0 = _mm256_set1_pd(m[0]), m1 = _mm256_set1_pd(m[1]), m2 = _mm256_set1_pd(m[2]),
                  m3 = _mm256_set1_pd(m[3]), m4 = _mm256_set1_pd(m[4]);
    const __m256d v0 = _mm256_set1_pd(-0.5 * iv[0]), v1 = _mm256_set1_pd(-0.5 * iv[1]),
                  v2 = _mm256_set1_pd(-0.5 * iv[2]), v3 = _mm256_set1_pd(-0.5 * iv[3]),
                  v4 = _mm256_set1_pd(-0.5 * iv[4]);
    const __m256d cc = _mm256_set1_pd(c0);

    std::size_t i = 0;
    for (; i + 4 <= t.n; i += 4) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(t.px + i), m0);
        const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(t.py + i), m1);
        const __m256d d2 = _mm256_sub_pd(_mm256_loadu_pd(t.cr + i), m2);
        const __m256d d3 = _mm256_sub_pd(_mm256_loadu_pd(t.cg + i), m3);
        const __m256d d4 = _mm256_sub_pd(_mm256_loadu_pd(t.cb + i), m4);
        __m256d acc = _mm256_fmadd_pd(_mm256_mul_pd(d0, d0), v0, cc);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(d1, d1), v1, acc);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(d2, d2), v2, acc);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(d3, d3), v3, acc);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(d4, d4), v4, acc);
        _mm256_storeu_pd(out + i, acc);
    }
    for (; i < t.n; ++i) {
        const double d0 = t.px[i] - m[0];
        const double d1 = t.py[i] - m[1];
        const double d2 = t.cr[i] - m[2];
        const double d3 = t.cg[i] - m[3];
        const double d4 = t.cb[i] - m[4];
        out[i] = c0 - 0.5 * (d0 * d0 * iv[0] + d1 * d1 * iv[1] + d2 * d2 * iv[2] +
                             d3 * d3 * iv[3] + d4 * d4 * iv[4]);
    }
}

}  // namespace

Gauss5Fn gauss5_scores_avx2 = &gauss5_avx2;

}  // namespace axiom::simd
