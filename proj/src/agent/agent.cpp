#include "axiom/agent/agent.hpp"

#include <cmath>

#include "axiom/model/gates.hpp"

namespace axiom::agent {

using model::Factor;
using model::Vec10;
namespace gt = model::gates;

Agent::Agent(int action_count, const model::Config& cfg, uint64_t seed)
    : cfg_(cfg), actions_(action_count), seed_(seed),
      smm_(cfg, gw::kH, gw::kW), imm_(cfg), tmm_(cfg), rmm_(cfg, action_count),
      planner_(cfg, action_count),
      latents_(static_cast<std::size_t>(cfg.max_slots)) {}

void Agent::apply_identity_remap() {
    imm_.set_feature_mask({false, false, false, true, true});
}

void Agent::predict_slots() {
    std::vector<double> rho;
    std::vector<double> q_dense;
    for (int k = 0; k < cfg_.max_slots; ++k) {
        if (!smm_.in_use(k)) continue;
        const SlotLatents& L = latents_[static_cast<std::size_t>(k)];
        const model::SlotState& st = smm_.state(k);
        const bool dyn = L.has_prev && L.prev_gate >= cfg_.gate_threshold &&
                         rmm_.components_in_use() > 0 && tmm_.modes_in_use() > 0 &&
                         L.prev_type >= 0;
        if (dyn) {
            model::RmmContext ctx;
            ctx.f[0] = L.prev_mean[model::PX];
            ctx.f[1] = L.prev_mean[model::PY];
            ctx.f[2] = L.prev_mean[model::VX];
            ctx.f[3] = L.prev_mean[model::VY];
            ctx.f[4] = L.prev_mean[model::UU];
            if (!cfg_.fixed_distance) {
                ctx.f[5] = L.prev_dp_x;
                ctx.f[6] = L.prev_dp_y;
            }
            ctx.type = L.prev_type;
            ctx.interacting = L.prev_interacting;
            ctx.assign = L.prev_o ? 1 : 0;
            ctx.action = prev_action_;
            rmm_.e_step(ctx, rho);
            const auto q_sw = rmm_.predict(rho, Factor::Switch);
            q_dense.assign(static_cast<std::size_t>(tmm_.modes_in_use()), q_sw.base);
            for (const auto& [idx, p] : q_sw.cells)
                if (idx < tmm_.modes_in_use()) q_dense[static_cast<std::size_t>(idx)] = p;
            Vec10 var;
            for (int d = 0; d < model::kXDim; ++d)
                var[static_cast<std::size_t>(d)] = 1.0 / st.prec[static_cast<std::size_t>(d)];
            Vec10 mean_out, var_out;
            tmm_.predict(st.mean, var, q_dense, mean_out, var_out);
            Vec10 prec_out;
            for (int d = 0; d < model::kXDim; ++d)
                prec_out[static_cast<std::size_t>(d)] =
                    1.0 / std::max(var_out[static_cast<std::size_t>(d)], 1e-9);
            smm_.set_prediction(k, mean_out, prec_out);
        } else {
            // No usable dynamics: carry the mean, drain precision by the
            // process noise so fresh evidence can move the slot freely.
            Vec10 prec_out;
            for (int d = 0; d < model::kXDim; ++d)
                prec_out[static_cast<std::size_t>(d)] =
                    1.0 / (1.0 / st.prec[static_cast<std::size_t>(d)] + cfg_.tmm_noise);
            smm_.set_prediction(k, st.mean, prec_out);
        }
    }
}

void Agent::update_gates(const model::Smm::FrameStats& fs) {
    for (int k = 0; k < cfg_.max_slots; ++k) {
        if (!smm_.in_use(k)) continue;
        SlotLatents& L = latents_[static_cast<std::size_t>(k)];
        model::SlotState& st = smm_.state(k);
        const bool o = gt::assignment_indicator(fs.mass[static_cast<std::size_t>(k)], cfg_.eps_active);

        // Velocity is the filtered position delta in normalized units; the
        // moving-gate speed is measured in pixels per frame.
        if (L.has_prev) {
            st.mean[model::VX] = st.mean[model::PX] - L.prev_mean[model::PX];
            st.mean[model::VY] = st.mean[model::PY] - L.prev_mean[model::PY];
        } else {
            st.mean[model::VX] = 0.0;
            st.mean[model::VY] = 0.0;
        }
        const double speed = std::hypot(st.mean[model::VX] * cfg_.vel_scale_x,
                                        st.mean[model::VY] * cfg_.vel_scale_y);

        L.gates.o = o;
        L.gates.p_present =
            gt::update_presence(L.gates.p_present, o, cfg_.zeta, cfg_.phi_np_p, cfg_.phi_p_np);
        L.gates.p_moving = gt::update_moving(L.gates.p_moving, o, speed, cfg_.lambda_move, cfg_.beta_move);
        L.gates.mu_u = gt::update_unused(L.gates.mu_u, o, cfg_.nu_u);
        st.mean[model::UU] = L.gates.mu_u;
        ++L.age;
    }
}

void Agent::run_imm() {
    std::vector<model::Imm::Item> batch;
    std::vector<int> ks;
    for (int k = 0; k < cfg_.max_slots; ++k) {
        if (!smm_.in_use(k)) continue;
        SlotLatents& L = latents_[static_cast<std::size_t>(k)];
        if (L.gates.gate() < cfg_.gate_threshold) continue;
        const model::SlotState& st = smm_.state(k);
        model::Imm::Item it;
        const double cs = cfg_.imm_color_scale;
        const double esx = cfg_.imm_extent_scale * cfg_.vel_scale_x;
        const double esy = cfg_.imm_extent_scale * cfg_.vel_scale_y;
        it.f = {st.mean[model::CR] * cs, st.mean[model::CG] * cs, st.mean[model::CB] * cs,
                st.mean[model::EX] * esx, st.mean[model::EY] * esy};
        it.weight = L.gates.gate();
        batch.push_back(it);
        ks.push_back(k);
    }
    std::vector<int> types;
    imm_.process(batch, !frozen_, &types);
    for (std::size_t i = 0; i < ks.size(); ++i)
        latents_[static_cast<std::size_t>(ks[i])].type = types[i];
}

void Agent::compute_interactions() {
    const double radius = cfg_.fixed_distance ? cfg_.fixed_r : cfg_.r_min;
    std::vector<double> xs, ys;
    std::vector<char> cand;
    std::vector<int> ks;
    for (int k = 0; k < cfg_.max_slots; ++k) {
        if (!smm_.in_use(k)) continue;
        const model::SlotState& st = smm_.state(k);
        xs.push_back(st.mean[model::PX]);
        ys.push_back(st.mean[model::PY]);
        cand.push_back(latents_[static_cast<std::size_t>(k)].gates.p_present > 0.5 ? 1 : 0);
        ks.push_back(k);
    }
    core::Rng rng(seed_, 0x1A7E0000ULL + static_cast<uint64_t>(frame_));
    for (std::size_t i = 0; i < ks.size(); ++i) {
        SlotLatents& L = latents_[static_cast<std::size_t>(ks[i])];
        if (L.gates.gate() < cfg_.gate_threshold) continue;
        const auto near = gt::nearest_interacting(xs, ys, cand, static_cast<int>(i), radius);
        if (near.found) {
            const int jk = ks[static_cast<std::size_t>(near.partner)];
            const int jt = latents_[static_cast<std::size_t>(jk)].type;
            L.has_partner = true;
            L.interacting = jt >= 0 ? 1 + jt : 0;
            L.dp_x = near.dx;
            L.dp_y = near.dy;
        } else {
            L.has_partner = false;
            L.interacting = 0;
            L.dp_x = rng.next_range(1.198, 1.202);
            L.dp_y = rng.next_range(1.198, 1.202);
        }
    }
}

void Agent::learn_dynamics(int reward) {
    std::vector<model::Tmm::Transition> trans;
    std::vector<int> ks;
    for (int k = 0; k < cfg_.max_slots; ++k) {
        if (!smm_.in_use(k)) continue;
        const SlotLatents& L = latents_[static_cast<std::size_t>(k)];
        if (!L.has_prev || L.prev_gate < cfg_.gate_threshold ||
            L.gates.gate() < cfg_.gate_threshold || L.prev_type < 0 ||
            L.age <= cfg_.min_track_age)
            continue;
        model::Tmm::Transition tr;
        tr.xp = L.prev_mean;
        tr.xc = smm_.state(k).mean;
        tr.weight = L.prev_gate;
        trans.push_back(tr);
        ks.push_back(k);
    }
    if (trans.empty()) return;

    model::Tmm::Result tres;
    tmm_.process(trans, !frozen_, tres);

    // Vocabulary growth before the rMM sees the new codes.
    rmm_.grow_factor(Factor::Type, std::max(1, imm_.types_in_use()));
    rmm_.grow_factor(Factor::Interacting, imm_.types_in_use() + 1);
    rmm_.grow_factor(Factor::Switch, std::max(1, tmm_.modes_in_use()));

    std::vector<model::Rmm::Item> items(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const SlotLatents& L = latents_[static_cast<std::size_t>(ks[i])];
        model::RmmContext& ctx = items[i].ctx;
        ctx.f[0] = L.prev_mean[model::PX];
        ctx.f[1] = L.prev_mean[model::PY];
        ctx.f[2] = L.prev_mean[model::VX];
        ctx.f[3] = L.prev_mean[model::VY];
        ctx.f[4] = L.prev_mean[model::UU];
        if (!cfg_.fixed_distance) {
            ctx.f[5] = L.prev_dp_x;
            ctx.f[6] = L.prev_dp_y;
        }
        ctx.type = L.prev_type;
        ctx.interacting = L.prev_interacting;
        ctx.assign = L.prev_o ? 1 : 0;
        ctx.action = prev_action_;
        ctx.switch_soft = &tres.xi[i];
        ctx.reward_bin = model::reward_to_bin(reward);
        items[i].weight = L.prev_gate;
    }
    model::Rmm::Result rres;
    rmm_.process(items, !frozen_, rres);
}

int Agent::step(const gw::Frame& frame, int reward) {
    info_ = StepInfo{};
    model::tokenize(frame.px.data(), gw::kH, gw::kW, tokens_);

    // (1-2) dynamics-based slot priors
    predict_slots();

    // (3) slot mixture: expansion + E + M
    model::Smm::FrameStats fs;
    smm_.process_frame(tokens_, !frozen_, fs);
    for (int k : fs.created) latents_[static_cast<std::size_t>(k)] = SlotLatents{};

    // (4) assignment indicators, velocities, presence/moving/unused gates
    update_gates(fs);

    // (5) identity assignment over gated slots
    run_imm();

    // (6) interactions + dynamics learning with this frame's reward
    compute_interactions();
    learn_dynamics(reward);

    // (7) periodic Bayesian model reduction
    if (!frozen_ && !cfg_.no_bmr && frame_ > 0 && frame_ % cfg_.bmr_interval == 0) {
        core::Rng rng(seed_, 0xB3000000ULL + static_cast<uint64_t>(frame_));
        info_.bmr = model::bmr_reduce(rmm_, rng);
    }

    // (8) snapshot this frame for the next frame's contexts
    for (int k = 0; k < cfg_.max_slots; ++k) {
        if (!smm_.in_use(k)) continue;
        SlotLatents& L = latents_[static_cast<std::size_t>(k)];
        L.prev_mean = smm_.state(k).mean;
        L.prev_type = L.type;
        L.prev_interacting = L.interacting;
        L.prev_o = L.gates.o;
        L.prev_gate = L.gates.gate();
        L.prev_dp_x = L.dp_x;
        L.prev_dp_y = L.dp_y;
        L.has_prev = true;
    }

    // (9) plan
    std::vector<plan::RolloutSlot> rollout_slots;
    for (int k = 0; k < cfg_.max_slots; ++k) {
        if (!smm_.in_use(k)) continue;
        const SlotLatents& L = latents_[static_cast<std::size_t>(k)];
        if (L.gates.gate() < cfg_.gate_threshold || L.type < 0) continue;
        plan::RolloutSlot rs;
        rs.x = smm_.state(k).mean;
        rs.type = L.type;
        rollout_slots.push_back(rs);
    }
    plan::PlanStats pstats;
    core::Rng prng(seed_, 0x97AA0000ULL + static_cast<uint64_t>(frame_));
    const int action = planner_.plan(tmm_, rmm_, rollout_slots, prng, &pstats);

    prev_action_ = action;
    ++frame_;

    info_.action = action;
    info_.slots = smm_.slots_in_use();
    info_.types = imm_.types_in_use();
    info_.modes = tmm_.modes_in_use();
    info_.comps = rmm_.components_in_use();
    info_.plan_ig = pstats.mean_ig;
    info_.plan_utility = pstats.mean_utility;
    return action;
}

core::Checkpoint Agent::make_checkpoint() const {
    core::Checkpoint ck;
    {
        core::SectionWriter w;
        smm_.save(w);
        ck.add_section("smm", std::move(w));
    }
    {
        core::SectionWriter w;
        imm_.save(w);
        ck.add_section("imm", std::move(w));
    }
    {
        core::SectionWriter w;
        tmm_.save(w);
        ck.add_section("tmm", std::move(w));
    }
    {
        core::SectionWriter w;
        rmm_.save(w);
        ck.add_section("rmm", std::move(w));
    }
    {
        core::SectionWriter w;
        w.put_u64(static_cast<uint64_t>(cfg_.max_slots));
        for (int k = 0; k < cfg_.max_slots; ++k) {
            const SlotLatents& L = latents_[static_cast<std::size_t>(k)];
            w.put_f64(L.gates.p_present);
            w.put_f64(L.gates.p_moving);
            w.put_f64(L.gates.mu_u);
            w.put_u8(L.gates.o ? 1 : 0);
            w.put_i64(L.type);
            w.put_i64(L.interacting);
            w.put_i64(L.age);
            w.put_f64(L.dp_x);
            w.put_f64(L.dp_y);
            w.put_u8(L.has_partner ? 1 : 0);
            w.put_u8(L.has_prev ? 1 : 0);
            w.put_f64s(L.prev_mean.data(), 10);
            w.put_i64(L.prev_type);
            w.put_i64(L.prev_interacting);
            w.put_u8(L.prev_o ? 1 : 0);
            w.put_f64(L.prev_gate);
            w.put_f64(L.prev_dp_x);
            w.put_f64(L.prev_dp_y);
        }
        ck.add_section("gates", std::move(w));
    }
    {
        core::SectionWriter w;
        w.put_u64(seed_);
        w.put_i64(frame_);
        w.put_i64(prev_action_);
        w.put_i64(actions_);
        planner_.save(w);
        ck.add_section("harness", std::move(w));
    }
    return ck;
}

void Agent::restore(const core::Checkpoint& ck) {
    {
        auto r = ck.section("smm");
        smm_.load(r);
    }
    {
        auto r = ck.section("imm");
        imm_.load(r);
    }
    {
        auto r = ck.section("tmm");
        tmm_.load(r);
    }
    {
        auto r = ck.section("rmm");
        rmm_.load(r);
    }
    {
        auto r = ck.section("gates");
        const int K = static_cast<int>(r.get_u64());
        if (K != cfg_.max_slots) throw std::runtime_error("gates: capacity mismatch");
        for (int k = 0; k < K; ++k) {
            SlotLatents& L = latents_[static_cast<std::size_t>(k)];
            L.gates.p_present = r.get_f64();
            L.gates.p_moving = r.get_f64();
            L.gates.mu_u = r.get_f64();
            L.gates.o = r.get_u8() != 0;
            L.type = static_cast<int>(r.get_i64());
            L.interacting = static_cast<int>(r.get_i64());
            L.age = static_cast<int>(r.get_i64());
            L.dp_x = r.get_f64();
            L.dp_y = r.get_f64();
            L.has_partner = r.get_u8() != 0;
            L.has_prev = r.get_u8() != 0;
            r.get_f64s(L.prev_mean.data(), 10);
            L.prev_type = static_cast<int>(r.get_i64());
            L.prev_interacting = static_cast<int>(r.get_i64());
            L.prev_o = r.get_u8() != 0;
            L.prev_gate = r.get_f64();
            L.prev_dp_x = r.get_f64();
            L.prev_dp_y = r.get_f64();
        }
    }
    {
        auto r = ck.section("harness");
        seed_ = r.get_u64();
        frame_ = r.get_i64();
        prev_action_ = static_cast<int>(r.get_i64());
        const int a = static_cast<int>(r.get_i64());
        if (a != actions_) throw std::runtime_error("harness: action count mismatch");
        planner_.load(r);
    }
}

}  // namespace axiom::agent
