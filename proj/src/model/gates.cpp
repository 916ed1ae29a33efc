#include "axiom/model/gates.hpp"

#include <cmath>

namespace axiom::model::gates {

NearestResult nearest_interacting(const std::vector<double>& xs, const std::vector<double>& ys,
                                  const std::vector<char>& candidate, int k, double r_min) {
    NearestResult out;
    double best = r_min;
    for (int j = 0; j < static_cast<int>(xs.size()); ++j) {
        if (j == k || !candidate[static_cast<std::size_t>(j)]) continue;
        const double dx = xs[static_cast<std::size_t>(j)] - xs[static_cast<std::size_t>(k)];
        const double dy = ys[static_cast<std::size_t>(j)] - ys[static_cast<std::size_t>(k)];
        const double d = std::sqrt(dx * dx + dy * dy);
        if (d <= best && (!out.found || d < best)) {
            out.found = true;
            out.partner = j;
            out.dx = dx;
            out.dy = dy;
            best = d;
        }
    }
    return out;
}

}  // namespace axiom::model::gates
