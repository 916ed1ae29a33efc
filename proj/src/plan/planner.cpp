#include "axiom/plan/planner.hpp"

#include <algorithm>
#include <cmath>

#include "axiom/model/gates.hpp"

namespace axiom::plan {

using model::Factor;
using model::RmmContext;
using model::Vec10;

int sample_sparse(const model::SparseDist& d, double u) {
    if (d.size <= 0) return 0;
    double rem = u * d.sum();
    for (const auto& [idx, p] : d.cells) {
        rem -= p;
        if (rem < 0) return idx;
    }
    if (d.base <= 0.0) return d.cells.empty() ? 0 : d.cells.back().first;
    int skip = static_cast<int>(rem / d.base);
    int idx = 0;
    std::size_t ci = 0;
    while (idx < d.size - 1) {
        if (ci < d.cells.size() && d.cells[ci].first == idx) {
            ++ci;
            ++idx;
            continue;
        }
        if (skip == 0) break;
        --skip;
        ++idx;
    }
    return idx;
}

Planner::Planner(const model::Config& cfg, int action_count) : cfg_(cfg), actions_(action_count) {
    proposal_.assign(static_cast<std::size_t>(cfg_.horizon),
                     std::vector<double>(static_cast<std::size_t>(actions_), 1.0 / actions_));
    best_plan_.assign(static_cast<std::size_t>(cfg_.horizon), 0);
}

std::vector<Policy> Planner::sample_policies(core::Rng rng) const {
    const int P = std::max(1, cfg_.policies);
    const int H = cfg_.horizon;
    std::vector<Policy> out;
    out.reserve(static_cast<std::size_t>(P));

    // Slot 0: previous best plan shifted one step, last action repeated.
    Policy shifted(best_plan_.begin() + 1, best_plan_.end());
    shifted.push_back(best_plan_.back());
    out.push_back(shifted);

    // Constant-action coverage.
    for (int a = 0; a < actions_ && static_cast<int>(out.size()) < P; ++a)
        out.push_back(Policy(static_cast<std::size_t>(H), a));

    const int R = static_cast<int>(cfg_.random_ratio * P);
    const int n_cem = std::max(0, P - R - static_cast<int>(out.size()));
    core::Rng cem_rng = rng.fork(1);
    for (int p = 0; p < n_cem; ++p) {
        Policy pol(static_cast<std::size_t>(H));
        for (int t = 0; t < H; ++t) {
            double u = cem_rng.next_unit();
            int a = actions_ - 1;
            for (int c = 0; c < actions_; ++c) {
                u -= proposal_[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)];
                if (u < 0) {
                    a = c;
                    break;
                }
            }
            pol[static_cast<std::size_t>(t)] = a;
        }
        out.push_back(std::move(pol));
    }

    // Smoothed random walks: repeat the previous action w.p. walk_repeat.
    core::Rng walk_rng = rng.fork(2);
    while (static_cast<int>(out.size()) < P) {
        Policy pol(static_cast<std::size_t>(H));
        pol[0] = static_cast<int>(walk_rng.next_below(static_cast<uint32_t>(actions_)));
        for (int t = 1; t < H; ++t) {
            if (walk_rng.next_unit() < cfg_.walk_repeat)
                pol[static_cast<std::size_t>(t)] = pol[static_cast<std::size_t>(t - 1)];
            else
                pol[static_cast<std::size_t>(t)] =
                    static_cast<int>(walk_rng.next_below(static_cast<uint32_t>(actions_)));
        }
        out.push_back(std::move(pol));
    }
    out.resize(static_cast<std::size_t>(P));
    return out;
}

void Planner::rollout(const model::Tmm& tmm, const model::Rmm& rmm,
                      const std::vector<RolloutSlot>& slots, const Policy& policy, core::Rng rng,
                      std::vector<double>& reward_out, std::vector<double>& ig_out) const {
    const int H = cfg_.horizon;
    const int S = std::max(1, cfg_.samples);
    reward_out.assign(static_cast<std::size_t>(H), 0.0);
    ig_out.assign(static_cast<std::size_t>(H), 0.0);
    if (rmm.components_in_use() == 0 || slots.empty()) return;

    const double radius = cfg_.fixed_distance ? cfg_.fixed_r : cfg_.r_min;
    const std::size_t K = slots.size();
    std::vector<double> rho;
    std::vector<double> xs(K), ys(K);
    std::vector<char> cand(K, 1);
    std::vector<int> sampled_mode(K);

    for (int s = 0; s < S; ++s) {
        core::Rng srng = rng.fork(900 + s);
        std::vector<RolloutSlot> im(slots);
        for (int t = 0; t < H; ++t) {
            const int action = policy[static_cast<std::size_t>(t)];
            for (std::size_t k = 0; k < K; ++k) {
                xs[k] = im[k].x[model::PX];
                ys[k] = im[k].x[model::PY];
            }
            double r_acc = 0.0, ig_acc = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                const auto near =
                    model::gates::nearest_interacting(xs, ys, cand, static_cast<int>(k), radius);
                RmmContext ctx;
                ctx.f[0] = im[k].x[model::PX];
                ctx.f[1] = im[k].x[model::PY];
                ctx.f[2] = im[k].x[model::VX];
                ctx.f[3] = im[k].x[model::VY];
                ctx.f[4] = im[k].x[model::UU];
                if (!cfg_.fixed_distance) {
                    if (near.found) {
                        ctx.f[5] = near.dx;
                        ctx.f[6] = near.dy;
                    } else {
                        ctx.f[5] = srng.next_range(1.198, 1.202);
                        ctx.f[6] = srng.next_range(1.198, 1.202);
                    }
                }
                ctx.type = im[k].type;
                ctx.interacting = near.found ? 1 + im[static_cast<std::size_t>(near.partner)].type : 0;
                ctx.assign = 1;
                ctx.action = action;
                rmm.e_step(ctx, rho);
                const auto q_rw = rmm.predict(rho, Factor::Reward);
                r_acc += q_rw.prob(2) - q_rw.prob(0);
                ig_acc += rmm.info_gain(rho);
                const auto q_sw = rmm.predict(rho, Factor::Switch);
                sampled_mode[k] = sample_sparse(q_sw, srng.next_unit());
            }
            for (std::size_t k = 0; k < K; ++k) {
                const double px0 = im[k].x[model::PX], py0 = im[k].x[model::PY];
                if (sampled_mode[k] < tmm.modes_in_use()) tmm.apply(sampled_mode[k], im[k].x);
                im[k].x[model::VX] = im[k].x[model::PX] - px0;
                im[k].x[model::VY] = im[k].x[model::PY] - py0;
            }
            reward_out[static_cast<std::size_t>(t)] += r_acc;
            ig_out[static_cast<std::size_t>(t)] += ig_acc;
        }
    }
    for (int t = 0; t < H; ++t) {
        reward_out[static_cast<std::size_t>(t)] /= S;
        ig_out[static_cast<std::size_t>(t)] /= S;
    }
}

double Planner::efe_score(const std::vector<double>& rewards, const std::vector<double>& infogains,
                          double discount, double ig_weight) {
    double g = 0.0, d = 1.0;
    for (std::size_t t = 0; t < rewards.size(); ++t) {
        g += d * (rewards[t] + ig_weight * infogains[t]);
        d *= discount;
    }
    return g;
}

void Planner::update_proposal(const std::vector<Policy>& policies, const std::vector<double>& scores) {
    const int P = static_cast<int>(policies.size());
    const int K = std::max(1, static_cast<int>(cfg_.topk_ratio * P));
    std::vector<int> order(static_cast<std::size_t>(P));
    for (int i = 0; i < P; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
    });
    order.resize(static_cast<std::size_t>(std::min(K, P)));

    for (int t = 0; t < cfg_.horizon; ++t) {
        std::vector<double> hist(static_cast<std::size_t>(actions_), 0.0);
        for (int idx : order) ++hist[static_cast<std::size_t>(policies[static_cast<std::size_t>(idx)][static_cast<std::size_t>(t)])];
        // tempered softmax of the histogram: p ~ hist^(1/T)
        double z = 0.0;
        std::vector<double> p(static_cast<std::size_t>(actions_), 0.0);
        for (int a = 0; a < actions_; ++a) {
            p[static_cast<std::size_t>(a)] =
                hist[static_cast<std::size_t>(a)] > 0
                    ? std::pow(hist[static_cast<std::size_t>(a)], 1.0 / cfg_.temperature)
                    : 0.0;
            z += p[static_cast<std::size_t>(a)];
        }
        auto& row = proposal_[static_cast<std::size_t>(t)];
        double rz = 0.0;
        for (int a = 0; a < actions_; ++a) {
            const double fresh = z > 0 ? p[static_cast<std::size_t>(a)] / z : 1.0 / actions_;
            row[static_cast<std::size_t>(a)] =
                cfg_.alpha_smooth * fresh + (1.0 - cfg_.alpha_smooth) * row[static_cast<std::size_t>(a)];
            rz += row[static_cast<std::size_t>(a)];
        }
        for (int a = 0; a < actions_; ++a) row[static_cast<std::size_t>(a)] /= rz;
    }
}

int Planner::plan(const model::Tmm& tmm, const model::Rmm& rmm, const std::vector<RolloutSlot>& slots,
                  core::Rng rng, PlanStats* stats) {
    const auto policies = sample_policies(rng.fork(11));
    std::vector<double> scores(policies.size());
    std::vector<double> r_buf, ig_buf;
    std::vector<double> best_r, best_ig;
    int best = 0;
    for (std::size_t p = 0; p < policies.size(); ++p) {
        rollout(tmm, rmm, slots, policies[p], rng.fork(100 + p), r_buf, ig_buf);
        scores[p] = efe_score(r_buf, ig_buf, cfg_.discount, cfg_.ig_weight);
        if (p == 0 || scores[p] > scores[static_cast<std::size_t>(best)]) {
            best = static_cast<int>(p);
            best_r = r_buf;
            best_ig = ig_buf;
        }
    }
    update_proposal(policies, scores);
    best_plan_ = policies[static_cast<std::size_t>(best)];
    if (stats) {
        stats->best_score = scores[static_cast<std::size_t>(best)];
        double ri = 0.0, gi = 0.0;
        for (int t = 0; t < cfg_.horizon; ++t) {
            ri += best_r[static_cast<std::size_t>(t)];
            gi += best_ig[static_cast<std::size_t>(t)];
        }
        stats->mean_utility = ri / cfg_.horizon;
        stats->mean_ig = gi / cfg_.horizon;
        double ent = 0.0;
        for (int a = 0; a < actions_; ++a) {
            const double pa = proposal_[0][static_cast<std::size_t>(a)];
            if (pa > 0) ent -= pa * std::log(pa);
        }
        stats->entropy_a0 = ent;
    }
    return best_plan_[0];
}

void Planner::save(core::SectionWriter& w) const {
    w.put_u64(static_cast<uint64_t>(cfg_.horizon));
    w.put_u64(static_cast<uint64_t>(actions_));
    for (const auto& row : proposal_) w.put_f64s(row.data(), row.size());
    for (int a : best_plan_) w.put_i64(a);
}

void Planner::load(core::SectionReader& r) {
    const int H = static_cast<int>(r.get_u64());
    const int A = static_cast<int>(r.get_u64());
    if (H != cfg_.horizon || A != actions_) throw std::runtime_error("planner: shape mismatch");
    for (auto& row : proposal_) r.get_f64s(row.data(), row.size());
    for (auto& a : best_plan_) a = static_cast<int>(r.get_i64());
}

}  // namespace axiom::plan
