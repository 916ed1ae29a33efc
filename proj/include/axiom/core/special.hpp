#pragma once

#include <cmath>
#include <cstddef>

namespace axiom::core {

// psi(x) for x > 0. Recurrence up to x >= 6, then asymptotic series;
// absolute error below 1e-12 over the range used here.
inline double digamma(double x) {
    double r = 0.0;
    while (x < 6.0) {
        r -= 1.0 / x;
        x += 1.0;
    }
    const double f = 1.0 / (x * x);
    return r + std::log(x) - 0.5 / x -
           f * (1.0 / 12 - f * (1.0 / 120 - f * (1.0 / 252 - f * (1.0 / 240 - f * (1.0 / 132)))));
}

inline double lgamma_pos(double x) {
#ifdef __GLIBC__
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

// KL( Dir(b) || Dir(a) ) for same-length concentration vectors.
inline double dirichlet_kl(const double* b, const double* a, std::size_t n) {
    double bsum = 0.0, asum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        bsum += b[i];
        asum += a[i];
    }
    double kl = lgamma_pos(bsum) - lgamma_pos(asum);
    const double psi_bsum = digamma(bsum);
    for (std::size_t i = 0; i < n; ++i) {
        kl -= lgamma_pos(b[i]) - lgamma_pos(a[i]);
        kl += (b[i] - a[i]) * (digamma(b[i]) - psi_bsum);
    }
    return kl;
}

// KL increment for one cell pair of a Dirichlet perturbed as b_i = a_i + d_i,
// excluding the total-count terms (those are handled once by the caller).
inline double dirichlet_kl_cell(double a, double d, double psi_bsum) {
    const double b = a + d;
    return -(lgamma_pos(b) - lgamma_pos(a)) + d * (digamma(b) - psi_bsum);
}

}  // namespace axiom::core
