#pragma once

#include <vector>

#include "axiom/model/config.hpp"
#include "axiom/model/slot.hpp"

namespace axiom::model::gates {

// o = 1 iff the slot's responsibility mass exceeds eps_active.
inline bool assignment_indicator(double mass, double eps_active) { return mass > eps_active; }

// Markov prediction through the presence chain, then the damped correction
// toward the observed indicator. With o held at 0 the belief decays
// geometrically and, since phi_np_p = 0, never recovers without evidence.
inline double update_presence(double p, bool o, double zeta, double phi_np_p, double phi_p_np) {
    const double p_pred = p * (1.0 - phi_p_np) + (1.0 - p) * phi_np_p;
    return (1.0 - zeta) * (o ? 1.0 : 0.0) + zeta * p_pred;
}

// Shrink by lambda and nudge upward by beta * speed while observed; frozen
// while the slot is unassigned.
inline double update_moving(double m, bool o, double speed, double lambda, double beta) {
    if (!o) return m;
    const double v = lambda * m + beta * speed;
    return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
}

// Deterministic unused-counter regime: reset on assignment, else increment.
inline double update_unused(double mu_u, bool o, double nu_u) {
    return o ? 0.0 : mu_u + nu_u;
}

struct NearestResult {
    bool found = false;
    int partner = -1;
    double dx = 0.0;
    double dy = 0.0;
};

// Closest other candidate slot within r_min of slot k; candidates must be
// in use and present. Ties break toward the lowest slot index. Positions are
// (x, y) pairs in normalized coordinates.
NearestResult nearest_interacting(const std::vector<double>& xs, const std::vector<double>& ys,
                                  const std::vector<char>& candidate, int k, double r_min);

}  // namespace axiom::model::gates
