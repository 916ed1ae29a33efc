#include "axiom/model/imm.hpp"

#include <cmath>
#include <stdexcept>

#include "axiom/model/expand.hpp"

namespace axiom::model {

Imm::Imm(const Config& cfg) : cfg_(cfg), mixing_(cfg.alpha0_imm) {
    mask_.fill(true);
    mask_dims_ = {0, 1, 2, 3, 4};
}

void Imm::set_feature_mask(const std::array<bool, kFeat>& mask) {
    int on = 0;
    for (bool b : mask) on += b ? 1 : 0;
    if (on == 0) throw std::invalid_argument("imm: feature mask cannot be all-false");
    mask_ = mask;
    mask_dims_.clear();
    for (int i = 0; i < kFeat; ++i)
        if (mask_[static_cast<std::size_t>(i)]) mask_dims_.push_back(i);
}

double Imm::expected_loglik(int v, const double f[kFeat]) const {
    const Niw& c = comps_[static_cast<std::size_t>(v)];
    if (static_cast<int>(mask_dims_.size()) == kFeat) return c.expected_loglik(f);
    return c.expected_loglik_masked(f, mask_dims_);
}

void Imm::e_step(const double f[kFeat], std::vector<double>& gamma) const {
    const int V = types_in_use();
    if (V == 0) throw std::runtime_error("imm: no components in use; expansion must run first");
    gamma.resize(static_cast<std::size_t>(V));
    std::vector<double> elog;
    mixing_.elog_all(elog);
    double best = -1e300;
    for (int v = 0; v < V; ++v) {
        gamma[static_cast<std::size_t>(v)] = elog[static_cast<std::size_t>(v)] + expected_loglik(v, f);
        best = std::max(best, gamma[static_cast<std::size_t>(v)]);
    }
    double z = 0.0;
    for (double& g : gamma) {
        g = std::exp(g - best);
        z += g;
    }
    for (double& g : gamma) g /= z;
}

int Imm::argmax_type(const double f[kFeat]) const {
    std::vector<double> gamma;
    e_step(f, gamma);
    int best = 0;
    for (int v = 1; v < static_cast<int>(gamma.size()); ++v)
        if (gamma[static_cast<std::size_t>(v)] > gamma[static_cast<std::size_t>(best)]) best = v;
    return best;
}

void Imm::refresh_batch(const std::vector<Item>& batch) {
    const std::size_t n = batch.size();
    const std::size_t V = comps_.size();
    scores_.assign(n * std::max<std::size_t>(V, 1), 0.0);
    resp_.assign(n * std::max<std::size_t>(V, 1), 0.0);
    std::vector<double> elog;
    mixing_.elog_all(elog);
    for (std::size_t i = 0; i < n; ++i) {
        double best = -1e300;
        for (std::size_t v = 0; v < V; ++v) {
            const double s = expected_loglik(static_cast<int>(v), batch[i].f.data());
            scores_[i * V + v] = s;
            resp_[i * V + v] = s + elog[v];
            best = std::max(best, resp_[i * V + v]);
        }
        double z = 0.0;
        for (std::size_t v = 0; v < V; ++v) {
            resp_[i * V + v] = std::exp(resp_[i * V + v] - best);
            z += resp_[i * V + v];
        }
        if (z > 0)
            for (std::size_t v = 0; v < V; ++v) resp_[i * V + v] /= z;
    }
    fresh_ = true;
}

void Imm::m_step(const std::vector<Item>& batch) {
    const std::size_t V = comps_.size();
    const double rho = cfg_.rho;
    const Niw prior(kFeat, cfg_.imm_kappa0, cfg_.imm_u0, cfg_.imm_n0);
    for (std::size_t v = 0; v < V; ++v) {
        double N = 0.0;
        Eigen::VectorXd S1 = Eigen::VectorXd::Zero(kFeat);
        Eigen::MatrixXd S2 = Eigen::MatrixXd::Zero(kFeat, kFeat);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const double w = batch[i].weight * resp_[i * V + v];
            if (w <= 0.0) continue;
            Eigen::Map<const Eigen::VectorXd> fv(batch[i].f.data(), kFeat);
            N += w;
            S1 += w * fv;
            S2 += w * fv * fv.transpose();
        }
        if (rho <= 0.0) {
            comps_[v] = comp_snap_[v];
            comps_[v].add_stats(N, S1, S2);
            mixing_.set(static_cast<int>(v), mix_snap_[v] + N);
        } else {
            Niw target = prior;
            target.add_stats(N, S1, S2);
            comps_[v] = comp_snap_[v];
            comps_[v].blend_toward(target, rho);
            mixing_.set(static_cast<int>(v), (1 - rho) * mix_snap_[v] + rho * (1.0 + N));
        }
    }
}

struct ImmExpandHandle {
    Imm& m;
    const std::vector<Imm::Item>& batch;

    struct Worst {
        int item;
        double best;
        bool any;
    };

    Worst refresh_and_worst() {
        m.refresh_batch(batch);
        if (batch.empty()) return {0, 0.0, false};
        const std::size_t V = m.comps_.size();
        int worst_i = 0;
        double worst = 1e300;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            double best = -1e300;
            for (std::size_t v = 0; v < V; ++v) best = std::max(best, m.scores_[i * V + v]);
            if (V == 0) best = -1e300;
            if (best < worst) {
                worst = best;
                worst_i = static_cast<int>(i);
            }
        }
        return {worst_i, worst, true};
    }
    int components() const { return m.types_in_use(); }
    bool at_capacity() const { return m.types_in_use() >= m.cfg_.max_types; }
    void create_and_update(int item) {
        m.comps_.push_back(Niw::at_datum(batch[static_cast<std::size_t>(item)].f.data(), Imm::kFeat,
                                         m.cfg_.imm_u0));
        m.comp_snap_.push_back(m.comps_.back());
        m.mixing_.push_component(1.0);
        m.mix_snap_.push_back(1.0);
        m.refresh_batch(batch);
        // Hard-assign the triggering item to the new component.
        const std::size_t V = m.comps_.size();
        const std::size_t i = static_cast<std::size_t>(item);
        for (std::size_t v = 0; v < V; ++v) m.resp_[i * V + v] = 0.0;
        m.resp_[i * V + (V - 1)] = 1.0;
        m.m_step(batch);
        m.fresh_ = false;
    }
};

void Imm::process(const std::vector<Item>& batch, bool learn, std::vector<int>* types_out) {
    comp_snap_ = comps_;
    mix_snap_ = mixing_.counts();
    fresh_ = false;
    if (learn) {
        ImmExpandHandle h{*this, batch};
        expand_batch(h, cfg_.tau_imm, cfg_.expand_steps);
    }
    if (!fresh_) refresh_batch(batch);
    if (learn) m_step(batch);
    if (types_out) {
        types_out->assign(batch.size(), -1);
        const std::size_t V = comps_.size();
        for (std::size_t i = 0; i < batch.size(); ++i) {
            int best = 0;
            for (std::size_t v = 1; v < V; ++v)
                if (resp_[i * V + v] > resp_[i * V + static_cast<std::size_t>(best)])
                    best = static_cast<int>(v);
            (*types_out)[i] = V == 0 ? -1 : best;
        }
    }
    fresh_ = false;
}

void Imm::save(core::SectionWriter& w) const {
    w.put_u64(comps_.size());
    for (std::size_t v = 0; v < comps_.size(); ++v) {
        const Niw& c = comps_[v];
        w.put_f64(c.kappa());
        w.put_f64(c.dof());
        w.put_f64s(c.mean().data(), kFeat);
        w.put_f64s(c.scale().data(), kFeat * kFeat);
        w.put_f64(mixing_.count(static_cast<int>(v)));
    }
    for (bool b : mask_) w.put_u8(b ? 1 : 0);
}

void Imm::load(core::SectionReader& r) {
    const std::size_t V = r.get_u64();
    comps_.clear();
    mixing_ = StickMixing(cfg_.alpha0_imm);
    for (std::size_t v = 0; v < V; ++v) {
        const double kappa = r.get_f64();
        const double dof = r.get_f64();
        Eigen::VectorXd m(kFeat);
        Eigen::MatrixXd U(kFeat, kFeat);
        r.get_f64s(m.data(), kFeat);
        r.get_f64s(U.data(), kFeat * kFeat);
        Niw c;
        c.set_params(m, kappa, U, dof);
        comps_.push_back(c);
        mixing_.push_component(r.get_f64());
    }
    std::array<bool, kFeat> mask;
    for (int i = 0; i < kFeat; ++i) mask[static_cast<std::size_t>(i)] = r.get_u8() != 0;
    set_feature_mask(mask);
}

}  // namespace axiom::model
