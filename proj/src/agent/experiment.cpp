#include "axiom/agent/experiment.hpp"

#include <cinttypes>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "axiom/gameworld/ppm.hpp"

namespace axiom::agent {

namespace fs = std::filesystem;

namespace {

struct Outputs {
    std::ofstream metrics;
    std::ofstream bmr_log;
    std::ofstream record;
    std::string base;
    bool enabled = false;
};

Outputs open_outputs(const RunOptions& opt, RunResult& result) {
    Outputs out;
    if (opt.out_dir.empty()) return out;
    fs::create_directories(opt.out_dir);
    out.base = opt.out_dir + "/" + opt.run_name;
    result.metrics_path = out.base + ".csv";
    out.metrics.open(result.metrics_path, std::ios::trunc);
    if (!out.metrics) throw std::runtime_error("cannot open " + result.metrics_path);
    out.metrics << "step,action,reward,cumulative_reward,ma1k_reward,smm_slots,imm_types,"
                   "tmm_modes,rmm_components,plan_mean_ig,plan_mean_utility\n";
    out.bmr_log.open(out.base + "_bmr.csv", std::ios::trunc);
    out.bmr_log << "frame,components_before,merges_tested,merges_accepted,components_after\n";
    if (opt.dump_frames > 0) out.record.open(out.base + "_record.tsv", std::ios::trunc);
    out.enabled = true;
    return out;
}

RunResult run_loop(const RunOptions& opt, Agent& agent, bool frozen) {
    agent.set_frozen(frozen);
    RunResult result;
    Outputs out = open_outputs(opt, result);

    gw::Env env(opt.game, opt.seed);
    int reward = 0;
    double cumulative = 0.0;
    std::deque<int> window;
    double window_sum = 0.0;

    for (int t = 0; t < opt.steps; ++t) {
        if (t == opt.perturb_step && opt.perturb_step >= 0) {
            env.apply_perturbation(opt.perturb_kind);
            if (opt.remap_identity) agent.apply_identity_remap();
        }
        const int action = agent.step(env.frame(), reward);
        const auto sr = env.step(action);
        reward = sr.reward;

        cumulative += reward;
        window.push_back(reward);
        window_sum += reward;
        if (static_cast<int>(window.size()) > 1000) {
            window_sum -= window.front();
            window.pop_front();
        }
        const double ma = window_sum / static_cast<double>(window.size());

        const StepInfo& info = agent.last_info();
        result.rewards.push_back(reward);
        result.ma1k.push_back(ma);
        result.rmm_counts.push_back(info.comps);
        result.imm_counts.push_back(info.types);
        result.plan_ig.push_back(info.plan_ig);
        result.plan_util.push_back(info.plan_utility);
        if (info.bmr) result.bmr_events.emplace_back(t, *info.bmr);

        if (out.enabled) {
            char buf[256];
            std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.1f,%.6f,%d,%d,%d,%d,%.9g,%.9g\n", t, action,
                          reward, cumulative, ma, info.slots, info.types, info.modes, info.comps,
                          info.plan_ig, info.plan_utility);
            out.metrics << buf;
            if (info.bmr) {
                const auto& b = *info.bmr;
                out.bmr_log << t << "," << b.components_before << "," << b.merges_tested << ","
                            << b.merges_accepted << "," << b.components_after << "\n";
            }
            if (opt.dump_frames > 0 && t % opt.dump_frames == 0) {
                char name[64];
                std::snprintf(name, sizeof(name), "_frame_%06d.ppm", t);
                gw::write_ppm(env.frame(), out.base + name);
            }
            if (out.record.is_open())
                out.record << gw::record_line(t, action, reward, env.frame_hash()) << "\n";
        }
    }
    result.cumulative_reward = cumulative;

    if (out.enabled && !frozen) {
        result.checkpoint_path = out.base + ".ckpt";
        agent.make_checkpoint().save(result.checkpoint_path);
    }
    return result;
}

}  // namespace

RunResult run_experiment(const RunOptions& opt) {
    Agent agent(gw::Env::action_count(opt.game), opt.cfg, opt.seed);
    return run_loop(opt, agent, /*frozen=*/false);
}

RunResult eval_experiment(const RunOptions& opt, const std::string& checkpoint_path) {
    Agent agent(gw::Env::action_count(opt.game), opt.cfg, opt.seed);
    agent.restore(core::Checkpoint::load(checkpoint_path));
    return run_loop(opt, agent, /*frozen=*/true);
}

}  // namespace axiom::agent
