#pragma once

#include <Eigen/Dense>
#include <vector>

#include "axiom/core/checkpoint.hpp"
#include "axiom/model/config.hpp"
#include "axiom/model/dirichlet.hpp"
#include "axiom/model/slot.hpp"

namespace axiom::model {

// Transition Mixture Model: a shared, append-only library of fixed linear
// modes x_t = D x_{t-1} + b with isotropic noise. Modes are identified once
// by expansion (D = I, b = observed displacement) and never refit; only the
// mixing pseudocounts learn.
class Tmm {
public:
    struct LinearMode {
        Eigen::Matrix<double, 10, 10> D;
        Vec10 b;
        bool identity_D = true;
    };

    // The library operates in pixel-scale dynamics units internally (position,
    // velocity and extent dims multiplied by the frame scale): the isotropic
    // noise then means ~1.4 px of slack, which separates motion patterns that
    // differ by whole pixels while bit-exact repeats of integer game dynamics
    // stay inside the expansion threshold. The public interface speaks
    // normalized latent units throughout.
    explicit Tmm(const Config& cfg) : cfg_(cfg), mixing_(cfg.alpha0_tmm) {
        scale_.fill(1.0);
        scale_[PX] = scale_[VX] = scale_[EX] = cfg.vel_scale_x;
        scale_[PY] = scale_[VY] = scale_[EY] = cfg.vel_scale_y;
    }

    int modes_in_use() const { return static_cast<int>(modes_.size()); }
    bool at_capacity() const { return modes_in_use() >= cfg_.max_modes; }
    const LinearMode& mode(int l) const { return modes_[static_cast<std::size_t>(l)]; }

    // Expected log-density of a transition under mode l with the shared
    // normalization constant dropped (it cancels in responsibilities and
    // would put the expansion threshold out of reach): -||residual||^2 / (2*noise).
    double mode_score(const Vec10& xp, const Vec10& xc, int l) const;

    // Normalized responsibilities over modes in use, mixing term included.
    void e_step(const Vec10& xp, const Vec10& xc, std::vector<double>& xi) const;

    // Appends D = I, b = xc - xp. Returns the new index, or -1 at capacity.
    int add_mode(const Vec10& xp, const Vec10& xc);

    void apply(int l, Vec10& x) const;  // x <- D x + b

    // Moment-matched diagonal Gaussian of the switch-weighted mixture.
    void predict(const Vec10& mean, const Vec10& var, const std::vector<double>& q,
                 Vec10& mean_out, Vec10& var_out) const;

    struct Transition {
        Vec10 xp, xc;
        double weight;  // slot gate
    };
    struct Result {
        std::vector<std::vector<double>> xi;  // per transition
        int created = 0;
        bool capped = false;
    };
    // Expansion over the frame's gated transitions plus the mixing update.
    void process(const std::vector<Transition>& batch, bool learn, Result& out);

    const StickMixing& mixing() const { return mixing_; }

    void save(core::SectionWriter& w) const;
    void load(core::SectionReader& r);

private:
    Vec10 to_dyn(const Vec10& x) const {
        Vec10 y;
        for (int d = 0; d < kXDim; ++d)
            y[static_cast<std::size_t>(d)] = x[static_cast<std::size_t>(d)] * scale_[static_cast<std::size_t>(d)];
        return y;
    }
    Vec10 from_dyn(const Vec10& x) const {
        Vec10 y;
        for (int d = 0; d < kXDim; ++d)
            y[static_cast<std::size_t>(d)] = x[static_cast<std::size_t>(d)] / scale_[static_cast<std::size_t>(d)];
        return y;
    }

    Config cfg_;
    Vec10 scale_{};
    std::vector<LinearMode> modes_;
    StickMixing mixing_;
};

}  // namespace axiom::model
