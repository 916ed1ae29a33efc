#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>
#include <vector>

#include "axiom/agent/agent.hpp"
#include "axiom/agent/config_io.hpp"
#include "axiom/agent/experiment.hpp"
#include "axiom/core/checkpoint.hpp"
#include "axiom/gameworld/gameworld.hpp"

namespace {

using axiom::agent::RunOptions;
using axiom::agent::RunResult;

std::vector<uint64_t> parse_seeds(const std::string& spec) {
    std::vector<uint64_t> seeds;
    const auto dots = spec.find("..");
    if (dots != std::string::npos) {
        const uint64_t a = std::stoull(spec.substr(0, dots));
        const uint64_t b = std::stoull(spec.substr(dots + 2));
        for (uint64_t s = a; s <= b; ++s) seeds.push_back(s);
        return seeds;
    }
    std::size_t pos = 0;
    while (pos < spec.size()) {
        auto comma = spec.find(',', pos);
        if (comma == std::string::npos) comma = spec.size();
        seeds.push_back(std::stoull(spec.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return seeds;
}

struct PerturbSpec {
    bool active = false;
    axiom::gw::PerturbKind kind = axiom::gw::PerturbKind::Color;
    int step = -1;
};

PerturbSpec parse_perturb(const std::string& spec) {
    PerturbSpec p;
    if (spec.empty()) return p;
    const auto at = spec.find('@');
    if (at == std::string::npos) throw CLI::ValidationError("--perturb expects kind@step");
    const std::string kind = spec.substr(0, at);
    if (kind == "color")
        p.kind = axiom::gw::PerturbKind::Color;
    else if (kind == "shape")
        p.kind = axiom::gw::PerturbKind::Shape;
    else
        throw CLI::ValidationError("--perturb kind must be color or shape");
    p.step = std::stoi(spec.substr(at + 1));
    p.active = true;
    return p;
}

struct CommonFlags {
    std::string game = "explode";
    int steps = 10000;
    std::string out_dir = "out";
    std::string config_file;
    int policies = -1, samples = -1, horizon = -1;
    bool no_bmr = false, no_ig = false, remap_identity = false;
    double ig_weight = std::nan("");
    double fixed_distance = std::nan("");
    std::string perturb;
    int dump_frames = 0;
};

axiom::model::Config build_config(const CommonFlags& f) {
    axiom::model::Config cfg;
    if (!f.config_file.empty())
        axiom::agent::apply_config_kv(cfg, axiom::agent::parse_kv_file(f.config_file));
    if (f.policies > 0) cfg.policies = f.policies;
    if (f.samples > 0) cfg.samples = f.samples;
    if (f.horizon > 0) cfg.horizon = f.horizon;
    if (f.no_bmr) cfg.no_bmr = true;
    if (!std::isnan(f.ig_weight)) cfg.ig_weight = f.ig_weight;
    if (f.no_ig) cfg.ig_weight = 0.0;
    if (!std::isnan(f.fixed_distance)) {
        cfg.fixed_distance = true;
        cfg.fixed_r = f.fixed_distance;
    }
    return cfg;
}

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--game", f.game, "explode|bounce|cross|fruits|hunt");
    cmd->add_option("--steps", f.steps, "interaction steps per run");
    cmd->add_option("--out-dir", f.out_dir, "output directory");
    cmd->add_option("--config", f.config_file, "key=value config file");
    cmd->add_option("--policies", f.policies, "planner rollouts P");
    cmd->add_option("--samples", f.samples, "samples per rollout S");
    cmd->add_option("--horizon", f.horizon, "planning depth H");
    cmd->add_flag("--no-bmr", f.no_bmr, "disable Bayesian model reduction");
    cmd->add_flag("--no-ig", f.no_ig, "plan with information-gain weight 0");
    cmd->add_option("--ig-weight", f.ig_weight, "information gain weight");
    cmd->add_option("--fixed-distance", f.fixed_distance,
                    "fixed interaction radius; drops the learned displacement feature");
    cmd->add_option("--perturb", f.perturb, "color@STEP or shape@STEP");
    cmd->add_flag("--remap-identity", f.remap_identity,
                  "mask color from identity inference at perturbation time");
    cmd->add_option("--dump-frames", f.dump_frames, "dump PPM frame + record line every N steps");
}

int cmd_run(const CommonFlags& f, const std::string& seeds_spec, int jobs) {
    const auto game = axiom::gw::game_from_name(f.game);
    const auto cfg = build_config(f);
    const auto seeds = parse_seeds(seeds_spec);
    const auto perturb = parse_perturb(f.perturb);

    std::filesystem::create_directories(f.out_dir);
    {
        std::map<std::string, std::string> extras = {
            {"game", f.game},
            {"steps", std::to_string(f.steps)},
            {"seeds", seeds_spec},
            {"remap_identity", f.remap_identity ? "true" : "false"},
            {"perturb", f.perturb.empty() ? "none" : f.perturb},
        };
        std::ofstream echo(f.out_dir + "/config.txt", std::ios::trunc);
        echo << axiom::agent::canonical_config(cfg, extras);
    }

    std::vector<RunResult> results(seeds.size());
    std::vector<std::thread> pool;
    std::size_t next = 0;
    const int n_jobs = std::max(1, jobs);
    auto worker = [&](std::size_t idx) {
        RunOptions opt;
        opt.game = game;
        opt.steps = f.steps;
        opt.seed = seeds[idx];
        opt.cfg = cfg;
        opt.out_dir = f.out_dir;
        opt.run_name = f.game + "_seed" + std::to_string(seeds[idx]);
        if (perturb.active) {
            opt.perturb_step = perturb.step;
            opt.perturb_kind = perturb.kind;
            opt.remap_identity = f.remap_identity;
        }
        opt.dump_frames = f.dump_frames;
        results[idx] = axiom::agent::run_experiment(opt);
    };
    if (n_jobs <= 1) {
        for (std::size_t i = 0; i < seeds.size(); ++i) worker(i);
    } else {
        std::mutex mu;
        auto drain = [&]() {
            while (true) {
                std::size_t idx;
                {
                    std::lock_guard<std::mutex> lk(mu);
                    if (next >= seeds.size()) return;
                    idx = next++;
                }
                worker(idx);
            }
        };
        for (int j = 0; j < n_jobs; ++j) pool.emplace_back(drain);
        for (auto& t : pool) t.join();
    }

    double mean = 0.0;
    for (const auto& r : results) mean += r.cumulative_reward;
    mean /= static_cast<double>(results.size());
    double var = 0.0;
    for (const auto& r : results) var += (r.cumulative_reward - mean) * (r.cumulative_reward - mean);
    const double sd = results.size() > 1 ? std::sqrt(var / static_cast<double>(results.size())) : 0.0;
    std::printf("%s: cumulative reward %.1f +/- %.1f over %zu seeds (%d steps)\n", f.game.c_str(),
                mean, sd, results.size(), f.steps);
    return 0;
}

int cmd_eval(const std::string& checkpoint, const CommonFlags& f, uint64_t seed) {
    const auto game = axiom::gw::game_from_name(f.game);
    RunOptions opt;
    opt.game = game;
    opt.steps = f.steps;
    opt.seed = seed;
    opt.cfg = build_config(f);
    opt.out_dir = f.out_dir;
    opt.run_name = f.game + "_eval_seed" + std::to_string(seed);
    const auto r = axiom::agent::eval_experiment(opt, checkpoint);
    std::printf("%s eval: cumulative reward %.1f over %d steps (seed %llu)\n", f.game.c_str(),
                r.cumulative_reward, f.steps, static_cast<unsigned long long>(seed));
    return 0;
}

int cmd_inspect(const std::string& checkpoint_path, const std::string& csv_path) {
    const auto ck = axiom::core::Checkpoint::load(checkpoint_path);
    auto hr = ck.section("harness");
    const uint64_t seed = hr.get_u64();
    hr.get_i64();  // frame
    hr.get_i64();  // prev action
    const int actions = static_cast<int>(hr.get_i64());

    axiom::model::Config cfg;
    axiom::agent::Agent agent(actions, cfg, seed);
    agent.restore(ck);

    std::printf("checkpoint: %s\n", checkpoint_path.c_str());
    std::printf("frame=%lld actions=%d\n", static_cast<long long>(agent.frame_count()), actions);
    std::printf("components: smm=%d imm=%d tmm=%d rmm=%d\n", agent.smm().slots_in_use(),
                agent.imm().types_in_use(), agent.tmm().modes_in_use(),
                agent.rmm().components_in_use());
    std::printf("%-4s %8s %8s %8s %8s %8s %8s %8s %8s %8s %8s %5s %8s\n", "slot", "px", "py", "cr",
                "cg", "cb", "vx", "vy", "u", "ex", "ey", "type", "gate");
    for (int k = 0; k < cfg.max_slots; ++k) {
        if (!agent.smm().in_use(k)) continue;
        const auto& m = agent.smm().state(k).mean;
        const auto& L = agent.latents(k);
        std::printf("%-4d %8.4f %8.4f %8.4f %8.4f %8.4f %8.3f %8.3f %8.4f %8.4f %8.4f %5d %8.4f\n",
                    k, m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7], m[8], m[9], L.type,
                    L.gates.gate());
    }

    std::ostream* os = &std::cout;
    std::ofstream csv;
    if (!csv_path.empty()) {
        csv.open(csv_path, std::ios::trunc);
        os = &csv;
    }
    const auto& rmm = agent.rmm();
    *os << "component,px,py,vx,vy,u,dpx,dpy,mix_count,expected_reward,p_neg,p_zero,p_pos\n";
    for (int m = 0; m < rmm.components_in_use(); ++m) {
        const auto& c = rmm.comp(m);
        const auto& mu = c.cont.mean();
        const auto& rw = c.disc[static_cast<std::size_t>(axiom::model::Factor::Reward)];
        const double p0 = rw.count(0) / rw.total();
        const double p1 = rw.count(1) / rw.total();
        const double p2 = rw.count(2) / rw.total();
        char buf[320];
        const double dpx = rmm.feature_dim() == 7 ? mu(5) : 0.0;
        const double dpy = rmm.feature_dim() == 7 ? mu(6) : 0.0;
        std::snprintf(buf, sizeof(buf),
                      "%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.3f,%.6f,%.6f,%.6f,%.6f\n", m, mu(0),
                      mu(1), mu(2), mu(3), mu(4), dpx, dpy,
                      rmm.mixing().count(m), p2 - p0, p0, p1, p2);
        *os << buf;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Object-centric active-inference agent on the Gameworld suite"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    std::string seeds_spec = "0";
    int jobs = 1;
    auto* run = app.add_subcommand("run", "train an agent online and write metrics/checkpoint");
    add_common(run, run_flags);
    run->add_option("--seeds", seeds_spec, "seed list: 0..9 or 0,3,7");
    run->add_option("--jobs", jobs, "seeds to run in parallel");

    CommonFlags eval_flags;
    std::string eval_checkpoint;
    uint64_t eval_seed = 0;
    auto* ev = app.add_subcommand("eval", "frozen evaluation of a checkpoint");
    add_common(ev, eval_flags);
    ev->add_option("--checkpoint", eval_checkpoint, "checkpoint path")->required();
    ev->add_option("--seed", eval_seed, "evaluation seed");

    std::string inspect_path, inspect_csv;
    auto* ins = app.add_subcommand("inspect", "summarize a checkpoint");
    ins->add_option("checkpoint", inspect_path, "checkpoint path")->required();
    ins->add_option("--csv", inspect_csv, "write the rMM component table to this CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_flags, seeds_spec, jobs);
        if (ev->parsed()) return cmd_eval(eval_checkpoint, eval_flags, eval_seed);
        if (ins->parsed()) return cmd_inspect(inspect_path, inspect_csv);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
