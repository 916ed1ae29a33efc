#pragma once

#include <array>

namespace axiom::model {

// Continuous slot latent layout: position, color, velocity, unused counter,
// extent. Positions and extents live in normalized [-1,1] image coordinates;
// velocities are pixels per frame (the scale the moving-latent dynamics and
// the transition library operate at).
inline constexpr int kXDim = 10;
enum XIdx : int { PX = 0, PY = 1, CR = 2, CG = 3, CB = 4, VX = 5, VY = 6, UU = 7, EX = 8, EY = 9 };

using Vec10 = std::array<double, 10>;

// Gaussian posterior in mean + diagonal precision form; the precision-weighted
// mean h = prec * mean is derived on demand.
struct SlotState {
    Vec10 mean{};
    Vec10 prec{};
};

struct SlotGates {
    double p_present = 1.0;
    // Start undecided: one observed-speed update settles it either way.
    double p_moving = 0.5;
    double mu_u = 0.0;
    bool o = false;
    double gate() const { return p_present * p_moving; }
};

}  // namespace axiom::model
