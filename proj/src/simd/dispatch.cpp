#include "axiom/simd/kernels.hpp"

#include <cstdlib>

namespace axiom::simd {

namespace {

struct Dispatch {
    Gauss5Fn gauss5;
    const char* name;
};

Dispatch select() {
    const char* force = std::getenv("AXIOM_FORCE_SCALAR");
    const bool scalar_only = force != nullptr && force[0] == '1';
#if defined(AXIOM_HAVE_AVX2_TU)
    if (!scalar_only && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return {gauss5_scores_avx2, "avx2"};
#endif
    (void)scalar_only;
    return {gauss5_scores_scalar, "scalar"};
}

const Dispatch& table() {
    static const Dispatch d = select();
    return d;
}

}  // namespace

void gauss5_scores(const TokenSoA& tok, const double* mean5, const double* invvar5, double c0,
                   double* out) {
    table().gauss5(tok, mean5, invvar5, c0, out);
}

const char* active_kernel_name() { return table().name; }

}  // namespace axiom::simd
