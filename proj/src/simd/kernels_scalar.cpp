#include "axiom/simd/kernels.hpp"

namespace axiom::simd {

namespace {

void gauss5_scalar(const TokenSoA& t, const double* m, const double* iv, double c0, double* out) {
    const double m0 = m[0], m1 = m[1], m2 = m[2], m3 = m[3], m4 = m[4];
    const double v0 = iv[0], v1 = iv[1], v2 = iv[2], v3 = iv[3], v4 = iv[4];
    for (std::size_t i = 0; i < t.n; ++i) {
        const double d0 = t.px[i] - m0;
        const double d1 = t.py[i] - m1;
        const double d2 = t.cr[i] - m2;
        const double d3 = t.cg[i] - m3;
        const double d4 = t.cb[i] - m4;
        const double q = d0 * d0 * v0 + d1 * d1 * v1 + d2 * d2 * v2 + d3 * d3 * v3 + d4 * d4 * v4;
        out[i] = c0 - 0.5 * q;
    }
}

}  // namespace

Gauss5Fn gauss5_scores_scalar = &gauss5_scalar;

}  // namespace axiom::simd
