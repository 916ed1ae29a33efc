#pragma once

#include <cstdint>
#include <vector>

#include "axiom/core/checkpoint.hpp"
#include "axiom/model/config.hpp"
#include "axiom/model/slot.hpp"
#include "axiom/simd/kernels.hpp"

namespace axiom::model {

// Frame pixels as tokens: normalized [-1,1] position plus [0,1] RGB,
// row-major order.
struct Tokens {
    std::vector<double> px, py, cr, cg, cb;
    std::size_t n() const { return px.size(); }
    simd::TokenSoA soa() const { return {px.data(), py.data(), cr.data(), cg.data(), cb.data(), n()}; }
};

void tokenize(const uint8_t* rgb, int height, int width, Tokens& out);

// Slot Mixture Model: explains every pixel token as one of up to K slot
// Gaussians whose mean is the slot's (position, color) and whose diagonal
// covariance stacks the slot extent over per-channel color variances with
// Gamma posteriors. Slots are grown online by expansion; slots that stay
// unassigned long enough may be recycled for new objects.
class Smm {
public:
    Smm(const Config& cfg, int height, int width);

    int capacity() const { return cfg_.max_slots; }
    int slots_in_use() const { return used_count_; }
    bool in_use(int k) const { return used_[static_cast<std::size_t>(k)] != 0; }
    std::vector<int> used_order() const;

    const SlotState& state(int k) const { return state_[static_cast<std::size_t>(k)]; }
    SlotState& state(int k) { return state_[static_cast<std::size_t>(k)]; }

    // Per-frame predictive (the E-step prior); fresh slots get the broad
    // internal prior instead.
    void set_prediction(int k, const Vec10& mean, const Vec10& prec);

    struct FrameStats {
        std::vector<double> mass;  // responsibility mass per slot index
        std::vector<int> created;  // slots created this frame (fresh or recycled)
        bool capped = false;
        double neg_expected_loglik = 0.0;  // sum over pixels of -max_k loglik
    };

    // Expansion loop + filtering E-step + streaming M-step for one frame.
    // learn=false keeps all parameters fixed (no expansion, no M-step) but
    // still filters slot posteriors.
    void process_frame(const Tokens& t, bool learn, FrameStats& out);

    // Responsibilities incl. the mixing term for in-use slots in used_order();
    // row-major n x slots_in_use. Test/inspection path.
    void e_assignments(const Tokens& t, std::vector<double>& r) const;

    double mixing_count(int k) const { return alpha_[static_cast<std::size_t>(k)]; }
    double color_shape(int k, int ch) const { return gamma_[static_cast<std::size_t>(k)][ch]; }
    double color_rate(int k, int ch) const { return rate_[static_cast<std::size_t>(k)][ch]; }
    int dead_streak(int k) const { return dead_[static_cast<std::size_t>(k)]; }

    void save(core::SectionWriter& w) const;
    void load(core::SectionReader& r);

private:
    friend struct SmmExpandHandle;

    struct RowStats {
        double mass = 0.0;
        double s1[5] = {0, 0, 0, 0, 0};
        double s2[5] = {0, 0, 0, 0, 0};
    };

    void score_params(int k, double mean5[5], double invvar5[5], double* c_lik) const;
    void compute_rows(const Tokens& t);
    void reduce(const Tokens& t);
    int allocate_slot(const Tokens& t, std::size_t item);
    void hard_assign(const Tokens& t, std::size_t item, int k_new);
    void update_states(const Tokens& t);
    void m_step(bool learn);
    double extent_obs(const RowStats& s, int axis, double mu) const;

    Config cfg_;
    int h_, w_;
    double ex_init_, ey_init_;

    std::vector<SlotState> state_;  // current posterior
    std::vector<SlotState> pred_;   // this frame's prior
    std::vector<SlotState> cur_;    // running estimate used for scoring
    std::vector<uint8_t> used_;
    std::vector<int> dead_;
    std::vector<double> alpha_;                  // mixing pseudocounts
    std::vector<std::array<double, 3>> gamma_;   // color-precision Gamma shape
    std::vector<std::array<double, 3>> rate_;    // color-precision Gamma rate
    int used_count_ = 0;

    // frame-scoped scratch
    std::vector<int> order_;            // in-use slot indices, ascending
    std::vector<double> rows_;          // [order.size()][n] log-lik scores
    std::vector<double> elogpi_;        // aligned with order_
    std::vector<RowStats> stats_;       // aligned with order_
    std::vector<double> alpha_snap_;    // frame-start parameter snapshots
    std::vector<std::array<double, 3>> gamma_snap_, rate_snap_;
    double worst_best_ = 0.0;
    std::size_t worst_item_ = 0;
    bool stats_fresh_ = false;
    double neg_ell_ = 0.0;
    std::vector<int> created_scratch_;
};

}  // namespace axiom::model
