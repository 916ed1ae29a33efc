#include "axiom/model/rmm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "axiom/core/special.hpp"
#include "axiom/model/expand.hpp"

namespace axiom::model {

namespace {
constexpr double kLnWMin = -18.420680743952367;  // ln(1e-8)
}

Rmm::Rmm(const Config& cfg, int action_count)
    : cfg_(cfg), fdim_(cfg.fixed_distance ? 5 : 7), mixing_(cfg.alpha0_rmm) {
    factor_sizes_[static_cast<int>(Factor::Type)] = 1;
    factor_sizes_[static_cast<int>(Factor::Interacting)] = 2;
    factor_sizes_[static_cast<int>(Factor::Assign)] = 2;
    factor_sizes_[static_cast<int>(Factor::Switch)] = 1;
    factor_sizes_[static_cast<int>(Factor::Action)] = action_count;
    factor_sizes_[static_cast<int>(Factor::Reward)] = kRewardBins;
}

double Rmm::disc_base(Factor f) const {
    switch (f) {
        case Factor::Type: return cfg_.a0_type;
        case Factor::Interacting: return cfg_.a0_interacting;
        case Factor::Assign: return cfg_.a0_assign;
        case Factor::Switch: return cfg_.a0_switch;
        case Factor::Action: return cfg_.a0_action;
        case Factor::Reward: return cfg_.a0_reward;
    }
    return 1.0;
}

void Rmm::grow_factor(Factor f, int new_size) {
    auto& sz = factor_sizes_[static_cast<std::size_t>(f)];
    if (new_size <= sz) return;
    sz = new_size;
    for (auto& c : comps_) {
        c.disc[static_cast<std::size_t>(f)].grow(new_size);
        ++c.version;
    }
}

double Rmm::factor_elog(const Component& c, Factor f, int value) const {
    return c.disc[static_cast<std::size_t>(f)].elog(value);
}

double Rmm::switch_soft_elog(const Component& c, const std::vector<double>& q) const {
    const SparseDirichlet& d = c.disc[static_cast<std::size_t>(Factor::Switch)];
    double covered = 0.0, acc = 0.0;
    for (const auto& cell : d.cells()) {
        if (cell.idx >= static_cast<int>(q.size())) break;
        const double ql = q[static_cast<std::size_t>(cell.idx)];
        acc += ql * d.elog(cell.idx);
        covered += ql;
    }
    return acc + (1.0 - covered) * d.elog_base();
}

double Rmm::score(const RmmContext& ctx, int m) const {
    const Component& c = comps_[static_cast<std::size_t>(m)];
    const Eigen::MatrixXd& P = c.cont.score_precision();
    const Eigen::VectorXd& mu = c.cont.mean();
    double quad = 0.0;
    for (int i = 0; i < fdim_; ++i) {
        const double di = ctx.f[static_cast<std::size_t>(i)] - mu(i);
        double row = 0.0;
        for (int j = 0; j < fdim_; ++j)
            row += P(i, j) * (ctx.f[static_cast<std::size_t>(j)] - mu(j));
        quad += di * row;
    }
    double s = c.cont.score_const() - 0.5 * quad;
    s += factor_elog(c, Factor::Type, ctx.type);
    s += factor_elog(c, Factor::Interacting, ctx.interacting);
    s += factor_elog(c, Factor::Assign, ctx.assign);
    s += factor_elog(c, Factor::Action, ctx.action);
    if (ctx.switch_soft) s += switch_soft_elog(c, *ctx.switch_soft);
    if (ctx.reward_bin >= 0) s += factor_elog(c, Factor::Reward, ctx.reward_bin);
    return s;
}

void Rmm::refresh_mix_elog() const {
    if (!mix_dirty_) return;
    mixing_.elog_all(mix_elog_);
    mix_dirty_ = false;
}

void Rmm::e_step(const RmmContext& ctx, std::vector<double>& rho) const {
    const int M = components_in_use();
    if (M == 0) throw std::runtime_error("rmm: no components in use");
    refresh_mix_elog();
    rho.resize(static_cast<std::size_t>(M));
    double best = -1e300;
    for (int m = 0; m < M; ++m) {
        rho[static_cast<std::size_t>(m)] = mix_elog_[static_cast<std::size_t>(m)] + score(ctx, m);
        best = std::max(best, rho[static_cast<std::size_t>(m)]);
    }
    double z = 0.0;
    for (double& v : rho) {
        v = std::exp(v - best);
        z += v;
    }
    for (double& v : rho) v /= z;
}

SparseDist Rmm::predict(const std::vector<double>& rho, Factor f) const {
    const int size = factor_size(f);
    SparseDist out;
    out.size = size;
    double base = 0.0;
    std::vector<std::pair<int, double>> adj;  // extra probability above base
    for (int m = 0; m < components_in_use(); ++m) {
        const double r = rho[static_cast<std::size_t>(m)];
        if (r <= 1e-12) continue;
        const SparseDirichlet& d = comps_[static_cast<std::size_t>(m)].disc[static_cast<std::size_t>(f)];
        const double tot = d.total();
        base += r * d.base() / tot;
        for (const auto& cell : d.cells()) {
            const double extra = r * cell.extra / tot;
            auto it = std::lower_bound(adj.begin(), adj.end(), cell.idx,
                                       [](const auto& a, int idx) { return a.first < idx; });
            if (it != adj.end() && it->first == cell.idx)
                it->second += extra;
            else
                adj.insert(it, {cell.idx, extra});
        }
    }
    out.base = base;
    out.cells.reserve(adj.size());
    for (const auto& [idx, extra] : adj) out.cells.emplace_back(idx, base + extra);
    // Renormalize away the rho cutoff so the outputs sum to one exactly.
    const double s = out.sum();
    if (s > 0) {
        out.base /= s;
        for (auto& [idx, p] : out.cells) p /= s;
    }
    return out;
}

double Rmm::comp_kl_at(const Component& c, Factor f, double w) const {
    // delta_l = w * abar_l with abar the component's own Dirichlet mean, so
    // the sparsity of delta matches the sparsity of the counts and cells with
    // identical (alpha, delta) collapse into one evaluation.
    const SparseDirichlet& d = c.disc[static_cast<std::size_t>(f)];
    const double T = d.total();
    const double psi_new_total = core::digamma(T + w);
    double kl = core::lgamma_pos(T + w) - core::lgamma_pos(T);
    const double base_delta = w * d.base() / T;
    const int n_rest = d.size() - static_cast<int>(d.cells().size());
    if (n_rest > 0 && base_delta > 0)
        kl += n_rest * core::dirichlet_kl_cell(d.base(), base_delta, psi_new_total);
    for (const auto& cell : d.cells()) {
        const double a = d.base() + cell.extra;
        kl += core::dirichlet_kl_cell(a, w * a / T, psi_new_total);
    }
    return std::max(kl, 0.0);
}

double Rmm::info_gain_exact(const std::vector<double>& rho) const {
    double ig = 0.0;
    for (int m = 0; m < components_in_use(); ++m) {
        const double r = rho[static_cast<std::size_t>(m)];
        if (r <= 1e-12) continue;
        const Component& c = comps_[static_cast<std::size_t>(m)];
        ig += r * (comp_kl_at(c, Factor::Switch, r) + comp_kl_at(c, Factor::Reward, r));
    }
    return ig;
}

const Rmm::KlTableEntry& Rmm::ig_entry(int m) const {
    if (ig_cache_.size() < comps_.size()) ig_cache_.resize(comps_.size());
    KlTableEntry& e = ig_cache_[static_cast<std::size_t>(m)];
    const Component& c = comps_[static_cast<std::size_t>(m)];
    if (e.version != c.version) {
        for (int j = 0; j < kIgKnots; ++j) {
            const double w = std::exp(kLnWMin * (1.0 - static_cast<double>(j) / (kIgKnots - 1)));
            e.sw[static_cast<std::size_t>(j)] = comp_kl_at(c, Factor::Switch, w);
            e.rw[static_cast<std::size_t>(j)] = comp_kl_at(c, Factor::Reward, w);
        }
        e.version = c.version;
    }
    return e;
}

double Rmm::info_gain(const std::vector<double>& rho) const {
    double ig = 0.0;
    for (int m = 0; m < components_in_use(); ++m) {
        const double r = rho[static_cast<std::size_t>(m)];
        if (r <= 1e-8) continue;
        const KlTableEntry& e = ig_entry(m);
        // position in log-w space
        const double pos = (1.0 - std::log(r) / kLnWMin) * (kIgKnots - 1);
        double sw, rw;
        if (pos <= 0) {
            const double w0 = std::exp(kLnWMin);
            sw = e.sw[0] * (r / w0);
            rw = e.rw[0] * (r / w0);
        } else if (pos >= kIgKnots - 1) {
            sw = e.sw[kIgKnots - 1];
            rw = e.rw[kIgKnots - 1];
        } else {
            const int j = static_cast<int>(pos);
            const double t = pos - j;
            sw = e.sw[static_cast<std::size_t>(j)] * (1 - t) + e.sw[static_cast<std::size_t>(j + 1)] * t;
            rw = e.rw[static_cast<std::size_t>(j)] * (1 - t) + e.rw[static_cast<std::size_t>(j + 1)] * t;
        }
        ig += r * (sw + rw);
    }
    return ig;
}

int Rmm::create_component(const RmmContext& ctx) {
    Component c;
    c.cont = Niw::at_datum(ctx.f.data(), fdim_, cfg_.rmm_u0);
    for (int f = 0; f < kNumFactors; ++f)
        c.disc[static_cast<std::size_t>(f)] =
            SparseDirichlet(disc_base(static_cast<Factor>(f)), factor_sizes_[static_cast<std::size_t>(f)]);
    comps_.push_back(std::move(c));
    snap_.push_back(comps_.back());
    mixing_.push_component(1.0);
    mix_snap_.push_back(1.0);
    mix_dirty_ = true;
    return components_in_use() - 1;
}

void Rmm::m_step(const std::vector<Item>& batch) {
    const int M = components_in_use();
    const double rho_t = cfg_.rho;
    const Niw prior = cont_prior();
    for (int m = 0; m < M; ++m) {
        double N = 0.0;
        for (std::size_t i = 0; i < batch.size(); ++i)
            N += batch[i].weight * resp_[i * static_cast<std::size_t>(M) + static_cast<std::size_t>(m)];
        if (N <= 1e-12 && rho_t <= 0.0) continue;  // untouched under additive updates

        Eigen::VectorXd S1 = Eigen::VectorXd::Zero(fdim_);
        Eigen::MatrixXd S2 = Eigen::MatrixXd::Zero(fdim_, fdim_);
        std::array<std::vector<std::pair<int, double>>, kNumFactors> counts;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const double w = batch[i].weight * resp_[i * static_cast<std::size_t>(M) + static_cast<std::size_t>(m)];
            if (w <= 1e-15) continue;
            const RmmContext& ctx = batch[i].ctx;
            Eigen::Map<const Eigen::VectorXd> fv(ctx.f.data(), fdim_);
            S1 += w * fv;
            S2 += w * fv * fv.transpose();
            auto bump = [&](Factor fac, int val, double add) {
                auto& vec = counts[static_cast<std::size_t>(fac)];
                for (auto& [idx, cnt] : vec)
                    if (idx == val) {
                        cnt += add;
                        return;
                    }
                vec.emplace_back(val, add);
            };
            bump(Factor::Type, ctx.type, w);
            bump(Factor::Interacting, ctx.interacting, w);
            bump(Factor::Assign, ctx.assign, w);
            bump(Factor::Action, ctx.action, w);
            if (ctx.switch_soft)
                for (int l = 0; l < static_cast<int>(ctx.switch_soft->size()); ++l) {
                    const double ql = (*ctx.switch_soft)[static_cast<std::size_t>(l)];
                    if (ql > 1e-12) bump(Factor::Switch, l, w * ql);
                }
            if (ctx.reward_bin >= 0) bump(Factor::Reward, ctx.reward_bin, w);
        }

        Component& c = comps_[static_cast<std::size_t>(m)];
        const Component& base = snap_[static_cast<std::size_t>(m)];
        if (rho_t <= 0.0) {
            c.cont = base.cont;
            c.cont.add_stats(N, S1, S2);
            for (int f = 0; f < kNumFactors; ++f) {
                c.disc[static_cast<std::size_t>(f)] = base.disc[static_cast<std::size_t>(f)];
                c.disc[static_cast<std::size_t>(f)].grow(factor_sizes_[static_cast<std::size_t>(f)]);
                for (const auto& [idx, cnt] : counts[static_cast<std::size_t>(f)])
                    c.disc[static_cast<std::size_t>(f)].add(idx, cnt);
            }
            mixing_.set(m, mix_snap_[static_cast<std::size_t>(m)] + N);
        } else {
            Niw target = prior;
            target.add_stats(N, S1, S2);
            c.cont = base.cont;
            c.cont.blend_toward(target, rho_t);
            for (int f = 0; f < kNumFactors; ++f) {
                // Blend sparse counts cell-wise toward prior + batch counts.
                SparseDirichlet blended(disc_base(static_cast<Factor>(f)),
                                        factor_sizes_[static_cast<std::size_t>(f)]);
                const SparseDirichlet& prev = base.disc[static_cast<std::size_t>(f)];
                for (const auto& cell : prev.cells()) blended.add(cell.idx, (1 - rho_t) * cell.extra);
                for (const auto& [idx, cnt] : counts[static_cast<std::size_t>(f)])
                    blended.add(idx, rho_t * cnt);
                c.disc[static_cast<std::size_t>(f)] = blended;
            }
            mixing_.set(m, (1 - rho_t) * mix_snap_[static_cast<std::size_t>(m)] + rho_t * (1.0 + N));
        }
        ++c.version;
    }
    mix_dirty_ = true;
}

struct RmmExpandHandle {
    Rmm& r;
    const std::vector<Rmm::Item>& batch;

    struct Worst {
        int item;
        double best;
        bool any;
    };

    void refresh() {
        const std::size_t n = batch.size();
        const std::size_t M = static_cast<std::size_t>(r.components_in_use());
        r.scores_.assign(n * std::max<std::size_t>(M, 1), 0.0);
        r.resp_.assign(n * std::max<std::size_t>(M, 1), 0.0);
        r.refresh_mix_elog();
        for (std::size_t i = 0; i < n; ++i) {
            double best = -1e300;
            for (std::size_t m = 0; m < M; ++m) {
                const double s = r.score(batch[i].ctx, static_cast<int>(m));
                r.scores_[i * M + m] = s;
                r.resp_[i * M + m] = s + r.mix_elog_[m];
                best = std::max(best, r.resp_[i * M + m]);
            }
            double z = 0.0;
            for (std::size_t m = 0; m < M; ++m) {
                r.resp_[i * M + m] = std::exp(r.resp_[i * M + m] - best);
                z += r.resp_[i * M + m];
            }
            if (z > 0)
                for (std::size_t m = 0; m < M; ++m) r.resp_[i * M + m] /= z;
        }
        r.fresh_ = true;
    }

    Worst refresh_and_worst() {
        refresh();
        if (batch.empty()) return {0, 0.0, false};
        const std::size_t M = static_cast<std::size_t>(r.components_in_use());
        int worst_i = 0;
        double worst = 1e300;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            double best = -1e300;
            for (std::size_t m = 0; m < M; ++m) best = std::max(best, r.scores_[i * M + m]);
            if (M == 0) best = -1e300;
            if (best < worst) {
                worst = best;
                worst_i = static_cast<int>(i);
            }
        }
        return {worst_i, worst, true};
    }
    int components() const { return r.components_in_use(); }
    bool at_capacity() const { return r.at_capacity(); }
    void create_and_update(int item) {
        r.create_component(batch[static_cast<std::size_t>(item)].ctx);
        refresh();
        const std::size_t M = static_cast<std::size_t>(r.components_in_use());
        const std::size_t i = static_cast<std::size_t>(item);
        for (std::size_t m = 0; m < M; ++m) r.resp_[i * M + m] = 0.0;
        r.resp_[i * M + (M - 1)] = 1.0;
        r.m_step(batch);
        r.fresh_ = false;
    }
};

void Rmm::process(const std::vector<Item>& batch, bool learn, Result& out) {
    snap_ = comps_;
    mix_snap_ = mixing_.counts();
    fresh_ = false;
    out.created = 0;
    out.capped = false;
    if (learn) {
        RmmExpandHandle h{*this, batch};
        const auto res = expand_batch(h, cfg_.tau_rmm, cfg_.expand_steps);
        out.created = res.created;
        out.capped = res.capped;
    }
    if (!fresh_) {
        RmmExpandHandle h{*this, batch};
        h.refresh();
    }
    if (learn) m_step(batch);
    const std::size_t M = static_cast<std::size_t>(components_in_use());
    out.rho.resize(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i)
        out.rho[i].assign(resp_.begin() + static_cast<long>(i * M),
                          resp_.begin() + static_cast<long>((i + 1) * M));
    fresh_ = false;
}

Rmm::Component Rmm::merged_component(int m1, int m2) const {
    const Component& a = comps_[static_cast<std::size_t>(m1)];
    const Component& b = comps_[static_cast<std::size_t>(m2)];
    Component out;
    out.cont = Niw::merge(a.cont, b.cont, cont_prior());
    for (int f = 0; f < kNumFactors; ++f)
        out.disc[static_cast<std::size_t>(f)] =
            SparseDirichlet::merge(a.disc[static_cast<std::size_t>(f)], b.disc[static_cast<std::size_t>(f)]);
    out.version = 0;
    return out;
}

void Rmm::rebuild_after_bmr(std::vector<Component>& work, const std::vector<char>& alive,
                            const std::vector<double>& counts) {
    std::vector<Component> kept;
    StickMixing mix(cfg_.alpha0_rmm);
    for (std::size_t m = 0; m < work.size(); ++m) {
        if (!alive[m]) continue;
        work[m].version = comps_[m].version + 1;
        kept.push_back(std::move(work[m]));
        mix.push_component(counts[m]);
    }
    comps_ = std::move(kept);
    mixing_ = std::move(mix);
    ig_cache_.clear();
    mix_dirty_ = true;
}

void Rmm::apply_merge(int keep_idx, int drop_idx, Component merged) {
    merged.version = comps_[static_cast<std::size_t>(keep_idx)].version + 1;
    comps_[static_cast<std::size_t>(keep_idx)] = std::move(merged);
    // Pool the mixing pseudocounts; the vacated stick returns to the prior.
    auto& counts = mixing_.counts();
    counts[static_cast<std::size_t>(keep_idx)] +=
        counts[static_cast<std::size_t>(drop_idx)] - 1.0;
    mixing_.erase(drop_idx);
    comps_.erase(comps_.begin() + drop_idx);
    ig_cache_.clear();
    mix_dirty_ = true;
}

void Rmm::save(core::SectionWriter& w) const {
    w.put_u64(static_cast<uint64_t>(fdim_));
    for (int f = 0; f < kNumFactors; ++f)
        w.put_u64(static_cast<uint64_t>(factor_sizes_[static_cast<std::size_t>(f)]));
    w.put_u64(comps_.size());
    for (std::size_t m = 0; m < comps_.size(); ++m) {
        const Component& c = comps_[m];
        w.put_f64(c.cont.kappa());
        w.put_f64(c.cont.dof());
        w.put_f64s(c.cont.mean().data(), static_cast<std::size_t>(fdim_));
        w.put_f64s(c.cont.scale().data(), static_cast<std::size_t>(fdim_ * fdim_));
        for (int f = 0; f < kNumFactors; ++f) {
            const SparseDirichlet& d = c.disc[static_cast<std::size_t>(f)];
            w.put_u64(d.cells().size());
            for (const auto& cell : d.cells()) {
                w.put_i64(cell.idx);
                w.put_f64(cell.extra);
            }
        }
        w.put_f64(mixing_.count(static_cast<int>(m)));
    }
}

void Rmm::load(core::SectionReader& r) {
    const int fdim = static_cast<int>(r.get_u64());
    if (fdim != fdim_) throw std::runtime_error("rmm: feature-dim mismatch in checkpoint");
    for (int f = 0; f < kNumFactors; ++f)
        factor_sizes_[static_cast<std::size_t>(f)] = static_cast<int>(r.get_u64());
    const std::size_t M = r.get_u64();
    comps_.clear();
    mixing_ = StickMixing(cfg_.alpha0_rmm);
    for (std::size_t m = 0; m < M; ++m) {
        Component c;
        const double kappa = r.get_f64();
        const double dof = r.get_f64();
        Eigen::VectorXd mu(fdim_);
        Eigen::MatrixXd U(fdim_, fdim_);
        r.get_f64s(mu.data(), static_cast<std::size_t>(fdim_));
        r.get_f64s(U.data(), static_cast<std::size_t>(fdim_ * fdim_));
        c.cont.set_params(mu, kappa, U, dof);
        for (int f = 0; f < kNumFactors; ++f) {
            SparseDirichlet d(disc_base(static_cast<Factor>(f)), factor_sizes_[static_cast<std::size_t>(f)]);
            const std::size_t ncells = r.get_u64();
            for (std::size_t i = 0; i < ncells; ++i) {
                const int idx = static_cast<int>(r.get_i64());
                d.add(idx, r.get_f64());
            }
            c.disc[static_cast<std::size_t>(f)] = std::move(d);
        }
        comps_.push_back(std::move(c));
        mixing_.push_component(r.get_f64());
    }
    ig_cache_.clear();
    mix_dirty_ = true;
}

}  // namespace axiom::model
