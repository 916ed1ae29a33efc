#pragma once

#include <cstddef>

namespace axiom::simd {

// Pixel tokens in structure-of-arrays layout: normalized x/y position and
// RGB color scaled to [0,1].
struct TokenSoA {
    const double* px = nullptr;
    const double* py = nullptr;
    const double* cr = nullptr;
    const double* cg = nullptr;
    const double* cb = nullptr;
    std::size_t n = 0;
};

// Diagonal-Gaussian log-density sweep over all tokens for one slot:
//   out[i] = c0 - 0.5 * sum_d invvar[d] * (tok[i][d] - mean[d])^2
// c0 carries the normalization and digamma correction terms.
using Gauss5Fn = void (*)(const TokenSoA&, const double* mean5, const double* invvar5,
                          double c0, double* out);

extern Gauss5Fn gauss5_scores_scalar;
#if defined(AXIOM_HAVE_AVX2_TU)
extern Gauss5Fn gauss5_scores_avx2;
#endif

// Dispatched entry points. Variant selection happens once, at first use,
// from CPUID; AXIOM_FORCE_SCALAR=1 in the environment pins the reference
// kernel (used by the equivalence tests).
void gauss5_scores(const TokenSoA& tok, const double* mean5, const double* invvar5,
                   double c0, double* out);

const char* active_kernel_name();

}  // namespace axiom::simd
