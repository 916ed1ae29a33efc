#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "axiom/core/checkpoint.hpp"
#include "axiom/core/rng.hpp"
#include "axiom/gameworld/gameworld.hpp"
#include "axiom/model/bmr.hpp"
#include "axiom/model/config.hpp"
#include "axiom/model/imm.hpp"
#include "axiom/model/rmm.hpp"
#include "axiom/model/smm.hpp"
#include "axiom/model/tmm.hpp"
#include "axiom/plan/planner.hpp"

namespace axiom::agent {

// Per-slot discrete beliefs plus the previous-frame snapshot feeding the
// dynamics models (rMM contexts are built from t-1 features).
struct SlotLatents {
    model::SlotGates gates;
    int type = -1;
    int interacting = 0;  // 0 = no partner, 1 + v otherwise
    int age = 0;          // frames since the slot was (re)created
    double dp_x = 0.0, dp_y = 0.0;
    bool has_partner = false;

    bool has_prev = false;
    model::Vec10 prev_mean{};
    int prev_type = -1;
    int prev_interacting = 0;
    bool prev_o = false;
    double prev_gate = 0.0;
    double prev_dp_x = 0.0, prev_dp_y = 0.0;
};

struct StepInfo {
    int action = 0;
    int slots = 0, types = 0, modes = 0, comps = 0;
    double plan_ig = 0.0, plan_utility = 0.0;
    std::optional<model::BmrReport> bmr;
};

// The online loop: perceive -> gate -> identify -> learn dynamics ->
// periodically reduce -> plan -> act.
class Agent {
public:
    Agent(int action_count, const model::Config& cfg, uint64_t seed);

    // Consumes the current frame and the reward that arrived with it,
    // returns the next action.
    int step(const gw::Frame& frame, int reward);

    void set_frozen(bool frozen) { frozen_ = frozen; }
    bool frozen() const { return frozen_; }

    // Identity remap: ignore color in iMM type inference from now on.
    void apply_identity_remap();

    int64_t frame_count() const { return frame_; }
    const StepInfo& last_info() const { return info_; }

    const model::Smm& smm() const { return smm_; }
    const model::Imm& imm() const { return imm_; }
    const model::Tmm& tmm() const { return tmm_; }
    const model::Rmm& rmm() const { return rmm_; }
    const plan::Planner& planner() const { return planner_; }
    const SlotLatents& latents(int k) const { return latents_[static_cast<std::size_t>(k)]; }
    const model::Config& config() const { return cfg_; }
    int action_count() const { return actions_; }

    core::Checkpoint make_checkpoint() const;
    void restore(const core::Checkpoint& ck);

private:
    void predict_slots();
    void update_gates(const model::Smm::FrameStats& fs);
    void run_imm();
    void compute_interactions();
    void learn_dynamics(int reward);

    model::Config cfg_;
    int actions_;
    uint64_t seed_;
    bool frozen_ = false;
    int64_t frame_ = 0;
    int prev_action_ = 0;

    model::Smm smm_;
    model::Imm imm_;
    model::Tmm tmm_;
    model::Rmm rmm_;
    plan::Planner planner_;
    std::vector<SlotLatents> latents_;

    model::Tokens tokens_;
    StepInfo info_;
};

}  // namespace axiom::agent
