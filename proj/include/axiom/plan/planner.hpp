#pragma once

#include <vector>

#include "axiom/core/checkpoint.hpp"
#include "axiom/core/rng.hpp"
#include "axiom/model/config.hpp"
#include "axiom/model/rmm.hpp"
#include "axiom/model/tmm.hpp"

namespace axiom::plan {

// A gated slot's belief snapshot entering imagination.
struct RolloutSlot {
    model::Vec10 x{};
    int type = 0;
};

struct PlanStats {
    double best_score = 0.0;
    double mean_ig = 0.0;       // best policy, mean over horizon
    double mean_utility = 0.0;  // best policy, mean over horizon
    double entropy_a0 = 0.0;    // entropy of the proposal's first step
};

using Policy = std::vector<int>;

// Expected-free-energy policy search: sampled rollouts through the frozen
// model, utility + weighted information gain scoring, and a horizon-wise
// categorical proposal refit. Rollouts never mutate the learned model.
class Planner {
public:
    Planner(const model::Config& cfg, int action_count);

    int plan(const model::Tmm& tmm, const model::Rmm& rmm, const std::vector<RolloutSlot>& slots,
             core::Rng rng, PlanStats* stats = nullptr);

    std::vector<Policy> sample_policies(core::Rng rng) const;

    void rollout(const model::Tmm& tmm, const model::Rmm& rmm, const std::vector<RolloutSlot>& slots,
                 const Policy& policy, core::Rng rng, std::vector<double>& reward_out,
                 std::vector<double>& ig_out) const;

    // Discounted sum of utility plus weighted information gain; policies are
    // ranked by this value descending (it is the negated expected free energy).
    static double efe_score(const std::vector<double>& rewards, const std::vector<double>& infogains,
                            double discount, double ig_weight);

    void update_proposal(const std::vector<Policy>& policies, const std::vector<double>& scores);

    const std::vector<std::vector<double>>& proposal() const { return proposal_; }
    const Policy& best_plan() const { return best_plan_; }
    void set_best_plan(const Policy& p) { best_plan_ = p; }

    void save(core::SectionWriter& w) const;
    void load(core::SectionReader& r);

private:
    model::Config cfg_;
    int actions_;
    std::vector<std::vector<double>> proposal_;  // [horizon][action]
    Policy best_plan_;
};

// Category draw from a sparse categorical; u in [0,1).
int sample_sparse(const model::SparseDist& d, double u);

}  // namespace axiom::plan
