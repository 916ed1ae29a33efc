#pragma once

#include <optional>
#include <string>
#include <vector>

#include "axiom/agent/agent.hpp"
#include "axiom/gameworld/gameworld.hpp"
#include "axiom/model/config.hpp"

namespace axiom::agent {

struct RunOptions {
    gw::GameId game = gw::GameId::Explode;
    int steps = 10000;
    uint64_t seed = 0;
    model::Config cfg;
    std::string out_dir;   // empty: keep everything in memory only
    std::string run_name;  // file stem: <run_name>.csv / .ckpt / ...
    int perturb_step = -1;
    gw::PerturbKind perturb_kind = gw::PerturbKind::Color;
    bool remap_identity = false;
    int dump_frames = 0;  // dump a PPM + record line every N steps (0 = off)
};

struct RunResult {
    double cumulative_reward = 0.0;
    std::vector<int> rewards;       // reward received after each action
    std::vector<double> ma1k;       // 1000-step moving average per step
    std::vector<int> rmm_counts;    // components in use per step
    std::vector<int> imm_counts;    // types in use per step
    std::vector<double> plan_ig;    // planner mean IG per step
    std::vector<double> plan_util;  // planner mean utility per step
    std::vector<std::pair<int64_t, model::BmrReport>> bmr_events;
    std::string metrics_path, checkpoint_path;
};

// Online training run: deterministic in (game, seed, config). Writes metrics
// CSV, BMR event log, final checkpoint, and optional frame dumps when
// out_dir is set.
RunResult run_experiment(const RunOptions& opt);

// Frozen evaluation of a stored checkpoint: E-steps only, no parameter
// updates, no expansion, no BMR. Never modifies the checkpoint.
RunResult eval_experiment(const RunOptions& opt, const std::string& checkpoint_path);

}  // namespace axiom::agent
