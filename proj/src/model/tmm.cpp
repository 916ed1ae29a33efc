#include "axiom/model/tmm.hpp"

#include <cmath>
#include <stdexcept>

#include "axiom/model/expand.hpp"

namespace axiom::model {

double Tmm::mode_score(const Vec10& xp, const Vec10& xc, int l) const {
    const LinearMode& m = modes_[static_cast<std::size_t>(l)];
    const Vec10 xpd = to_dyn(xp), xcd = to_dyn(xc);
    double sq = 0.0;
    if (m.identity_D) {
        for (int d = 0; d < kXDim; ++d) {
            const double r = xcd[static_cast<std::size_t>(d)] - xpd[static_cast<std::size_t>(d)] -
                             m.b[static_cast<std::size_t>(d)];
            sq += r * r;
        }
    } else {
        Eigen::Map<const Eigen::Matrix<double, 10, 1>> xpv(xpd.data());
        Eigen::Matrix<double, 10, 1> mu = m.D * xpv;
        for (int d = 0; d < kXDim; ++d) {
            const double r = xcd[static_cast<std::size_t>(d)] - mu(d) - m.b[static_cast<std::size_t>(d)];
            sq += r * r;
        }
    }
    return -sq / (2.0 * cfg_.tmm_noise);
}

void Tmm::e_step(const Vec10& xp, const Vec10& xc, std::vector<double>& xi) const {
    const int L = modes_in_use();
    if (L == 0) throw std::runtime_error("tmm: no modes in use");
    xi.resize(static_cast<std::size_t>(L));
    std::vector<double> elog;
    mixing_.elog_all(elog);
    double best = -1e300;
    for (int l = 0; l < L; ++l) {
        xi[static_cast<std::size_t>(l)] = elog[static_cast<std::size_t>(l)] + mode_score(xp, xc, l);
        best = std::max(best, xi[static_cast<std::size_t>(l)]);
    }
    double z = 0.0;
    for (double& v : xi) {
        v = std::exp(v - best);
        z += v;
    }
    for (double& v : xi) v /= z;
}

int Tmm::add_mode(const Vec10& xp, const Vec10& xc) {
    if (at_capacity()) return -1;
    LinearMode m;
    m.D.setIdentity();
    const Vec10 xpd = to_dyn(xp), xcd = to_dyn(xc);
    for (int d = 0; d < kXDim; ++d)
        m.b[static_cast<std::size_t>(d)] =
            xcd[static_cast<std::size_t>(d)] - xpd[static_cast<std::size_t>(d)];
    m.identity_D = true;
    modes_.push_back(m);
    mixing_.push_component(1.0);
    return modes_in_use() - 1;
}

void Tmm::apply(int l, Vec10& x) const {
    const LinearMode& m = modes_[static_cast<std::size_t>(l)];
    Vec10 xd = to_dyn(x);
    if (m.identity_D) {
        for (int d = 0; d < kXDim; ++d) xd[static_cast<std::size_t>(d)] += m.b[static_cast<std::size_t>(d)];
        x = from_dyn(xd);
        return;
    }
    Eigen::Map<const Eigen::Matrix<double, 10, 1>> xv(xd.data());
    Eigen::Matrix<double, 10, 1> y = m.D * xv;
    for (int d = 0; d < kXDim; ++d)
        xd[static_cast<std::size_t>(d)] = y(d) + m.b[static_cast<std::size_t>(d)];
    x = from_dyn(xd);
}

void Tmm::predict(const Vec10& mean, const Vec10& var, const std::vector<double>& q,
                  Vec10& mean_out, Vec10& var_out) const {
    Vec10 mean_d = to_dyn(mean);
    Vec10 var_d;
    for (int d = 0; d < kXDim; ++d)
        var_d[static_cast<std::size_t>(d)] = var[static_cast<std::size_t>(d)] *
                                             scale_[static_cast<std::size_t>(d)] *
                                             scale_[static_cast<std::size_t>(d)];
    Vec10 mo, vo;
    mo.fill(0.0);
    vo.fill(0.0);
    // E[x'] = sum_l q_l mu_l ; V[x'] = sum_l q_l (S_l + mu_l^2) - E[x']^2
    for (int l = 0; l < modes_in_use(); ++l) {
        const double ql = q[static_cast<std::size_t>(l)];
        if (ql <= 0.0) continue;
        const LinearMode& m = modes_[static_cast<std::size_t>(l)];
        Vec10 mu = mean_d;
        if (m.identity_D) {
            for (int d = 0; d < kXDim; ++d) mu[static_cast<std::size_t>(d)] += m.b[static_cast<std::size_t>(d)];
        } else {
            Eigen::Map<const Eigen::Matrix<double, 10, 1>> xv(mean_d.data());
            Eigen::Matrix<double, 10, 1> y = m.D * xv;
            for (int d = 0; d < kXDim; ++d)
                mu[static_cast<std::size_t>(d)] = y(d) + m.b[static_cast<std::size_t>(d)];
        }
        for (int d = 0; d < kXDim; ++d) {
            double sd;
            if (m.identity_D) {
                sd = var_d[static_cast<std::size_t>(d)];
            } else {
                sd = 0.0;
                for (int j = 0; j < kXDim; ++j) sd += m.D(d, j) * m.D(d, j) * var_d[static_cast<std::size_t>(j)];
            }
            sd += cfg_.tmm_noise;
            mo[static_cast<std::size_t>(d)] += ql * mu[static_cast<std::size_t>(d)];
            vo[static_cast<std::size_t>(d)] += ql * (sd + mu[static_cast<std::size_t>(d)] * mu[static_cast<std::size_t>(d)]);
        }
    }
    for (int d = 0; d < kXDim; ++d) {
        vo[static_cast<std::size_t>(d)] -=
            mo[static_cast<std::size_t>(d)] * mo[static_cast<std::size_t>(d)];
        vo[static_cast<std::size_t>(d)] /= scale_[static_cast<std::size_t>(d)] * scale_[static_cast<std::size_t>(d)];
    }
    mean_out = from_dyn(mo);
    var_out = vo;
}

namespace {

struct TmmExpandHandle {
    Tmm& t;
    const std::vector<Tmm::Transition>& batch;
    std::vector<double> best_score;

    struct Worst {
        int item;
        double best;
        bool any;
    };

    Worst refresh_and_worst() {
        if (batch.empty()) return {0, 0.0, false};
        int worst_i = 0;
        double worst = 1e300;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            double best = -1e300;
            for (int l = 0; l < t.modes_in_use(); ++l)
                best = std::max(best, t.mode_score(batch[i].xp, batch[i].xc, l));
            if (best < worst) {
                worst = best;
                worst_i = static_cast<int>(i);
            }
        }
        return {worst_i, worst, true};
    }
    int components() const { return t.modes_in_use(); }
    bool at_capacity() const { return t.at_capacity(); }
    void create_and_update(int item) {
        t.add_mode(batch[static_cast<std::size_t>(item)].xp, batch[static_cast<std::size_t>(item)].xc);
    }
};

}  // namespace

void Tmm::process(const std::vector<Transition>& batch, bool learn, Result& out) {
    out.created = 0;
    out.capped = false;
    const std::vector<double> mix_snap = mixing_.counts();
    if (learn) {
        TmmExpandHandle h{*this, batch, {}};
        const auto res = expand_batch(h, cfg_.tau_tmm, cfg_.expand_steps);
        out.created = res.created;
        out.capped = res.capped;
    }
    out.xi.resize(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) e_step(batch[i].xp, batch[i].xc, out.xi[i]);
    if (learn) {
        const double rho = cfg_.rho;
        std::vector<double>& counts = mixing_.counts();
        for (int l = 0; l < modes_in_use(); ++l) {
            double N = 0.0;
            for (std::size_t i = 0; i < batch.size(); ++i)
                N += batch[i].weight * out.xi[i][static_cast<std::size_t>(l)];
            const double snap =
                static_cast<std::size_t>(l) < mix_snap.size() ? mix_snap[static_cast<std::size_t>(l)] : 1.0;
            counts[static_cast<std::size_t>(l)] = rho <= 0.0 ? snap + N : (1 - rho) * snap + rho * (1.0 + N);
        }
    }
}

void Tmm::save(core::SectionWriter& w) const {
    w.put_u64(modes_.size());
    for (std::size_t l = 0; l < modes_.size(); ++l) {
        w.put_f64s(modes_[l].D.data(), 100);
        w.put_f64s(modes_[l].b.data(), 10);
        w.put_f64(mixing_.count(static_cast<int>(l)));
    }
}

void Tmm::load(core::SectionReader& r) {
    const std::size_t L = r.get_u64();
    modes_.clear();
    mixing_ = StickMixing(cfg_.alpha0_tmm);
    for (std::size_t l = 0; l < L; ++l) {
        LinearMode m;
        r.get_f64s(m.D.data(), 100);
        r.get_f64s(m.b.data(), 10);
        m.identity_D = m.D.isIdentity(0.0);
        modes_.push_back(m);
        mixing_.push_component(r.get_f64());
    }
}

}  // namespace axiom::model
