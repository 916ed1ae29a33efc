#include "axiom/model/smm.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "axiom/core/special.hpp"
#include "axiom/model/expand.hpp"

namespace axiom::model {

void tokenize(const uint8_t* rgb, int height, int width, Tokens& out) {
    const std::size_t n = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    out.px.resize(n);
    out.py.resize(n);
    out.cr.resize(n);
    out.cg.resize(n);
    out.cb.resize(n);
    const double sx = 2.0 / (width - 1), sy = 2.0 / (height - 1);
    std::size_t i = 0;
    for (int r = 0; r < height; ++r) {
        const double y = -1.0 + sy * r;
        for (int c = 0; c < width; ++c, ++i) {
            out.px[i] = -1.0 + sx * c;
            out.py[i] = y;
            out.cr[i] = rgb[i * 3 + 0] / 255.0;
            out.cg[i] = rgb[i * 3 + 1] / 255.0;
            out.cb[i] = rgb[i * 3 + 2] / 255.0;
        }
    }
}

Smm::Smm(const Config& cfg, int height, int width)
    : cfg_(cfg), h_(height), w_(width),
      ex_init_(cfg.extent_init_px * 2.0 / (width - 1)),
      ey_init_(cfg.extent_init_px * 2.0 / (height - 1)) {
    const std::size_t K = static_cast<std::size_t>(cfg_.max_slots);
    state_.resize(K);
    pred_.resize(K);
    cur_.resize(K);
    used_.assign(K, 0);
    dead_.assign(K, 0);
    alpha_.assign(K, 0.0);
    gamma_.assign(K, {cfg_.gamma0_color, cfg_.gamma0_color, cfg_.gamma0_color});
    rate_.assign(K, {cfg_.color_rate0, cfg_.color_rate0, cfg_.color_rate0});
}

std::vector<int> Smm::used_order() const {
    std::vector<int> o;
    for (int k = 0; k < cfg_.max_slots; ++k)
        if (used_[static_cast<std::size_t>(k)]) o.push_back(k);
    return o;
}

void Smm::set_prediction(int k, const Vec10& mean, const Vec10& prec) {
    pred_[static_cast<std::size_t>(k)].mean = mean;
    pred_[static_cast<std::size_t>(k)].prec = prec;
    cur_[static_cast<std::size_t>(k)] = pred_[static_cast<std::size_t>(k)];
}

void Smm::score_params(int k, double mean5[5], double invvar5[5], double* c_lik) const {
    const auto ks = static_cast<std::size_t>(k);
    const Vec10& m = cur_[ks].mean;
    mean5[0] = m[PX];
    mean5[1] = m[PY];
    mean5[2] = m[CR];
    mean5[3] = m[CG];
    mean5[4] = m[CB];
    // Extent is the blob's standard deviation along each axis; it enters the
    // observation covariance as a variance.
    const double ex = std::max(m[EX], cfg_.extent_floor);
    const double ey = std::max(m[EY], cfg_.extent_floor);
    if (!(ex > 0.0) || !(ey > 0.0)) throw std::runtime_error("smm: extent collapsed, covariance not PD");
    const double vx = ex * ex, vy = ey * ey;
    double c0 = -0.5 * std::log(2.0 * M_PI * vx) - 0.5 * std::log(2.0 * M_PI * vy);
    invvar5[0] = 1.0 / vx;
    invvar5[1] = 1.0 / vy;
    for (int ch = 0; ch < 3; ++ch) {
        const double g = gamma_[ks][ch], b = rate_[ks][ch];
        invvar5[2 + ch] = g / b;  // E[precision]
        c0 += 0.5 * (core::digamma(g) - std::log(b)) - 0.5 * std::log(2.0 * M_PI);
    }
    *c_lik = c0;
}

void Smm::compute_rows(const Tokens& t) {
    order_ = used_order();
    const std::size_t n = t.n();
    rows_.resize(order_.size() * n);
    elogpi_.resize(order_.size());
    double total = cfg_.alpha0_smm;
    for (int k : order_) total += alpha_[static_cast<std::size_t>(k)];
    const double psi_total = core::digamma(total);
    const auto soa = t.soa();
    for (std::size_t row = 0; row < order_.size(); ++row) {
        double mean5[5], invvar5[5], c0;
        score_params(order_[row], mean5, invvar5, &c0);
        simd::gauss5_scores(soa, mean5, invvar5, c0, rows_.data() + row * n);
        elogpi_[row] = core::digamma(alpha_[static_cast<std::size_t>(order_[row])]) - psi_total;
    }
}

void Smm::reduce(const Tokens& t) {
    const std::size_t n = t.n();
    const std::size_t R = order_.size();
    stats_.assign(R, RowStats{});
    worst_best_ = 0.0;
    worst_item_ = 0;
    neg_ell_ = 0.0;
    bool have = false;
    for (std::size_t i = 0; i < n; ++i) {
        double best_r = -1e300, best_lik = -1e300;
        for (std::size_t row = 0; row < R; ++row) {
            const double lik = rows_[row * n + i];
            if (lik > best_lik) best_lik = lik;
            const double s = lik + elogpi_[row];
            if (s > best_r) best_r = s;
        }
        neg_ell_ -= best_lik;
        if (!have || best_lik < worst_best_) {
            worst_best_ = best_lik;
            worst_item_ = i;
            have = true;
        }
        double z = 0.0;
        for (std::size_t row = 0; row < R; ++row) {
            const double d = rows_[row * n + i] + elogpi_[row] - best_r;
            if (d > -34.0) z += std::exp(d);
        }
        const double tok[5] = {t.px[i], t.py[i], t.cr[i], t.cg[i], t.cb[i]};
        for (std::size_t row = 0; row < R; ++row) {
            const double d = rows_[row * n + i] + elogpi_[row] - best_r;
            if (d <= -34.0) continue;
            const double r = std::exp(d) / z;
            RowStats& s = stats_[row];
            s.mass += r;
            for (int j = 0; j < 5; ++j) {
                s.s1[j] += r * tok[j];
                s.s2[j] += r * tok[j] * tok[j];
            }
        }
    }
    stats_fresh_ = true;
}

int Smm::allocate_slot(const Tokens& t, std::size_t item) {
    int k_new = -1;
    for (int k = 0; k < cfg_.max_slots; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        if (used_[ks] && dead_[ks] >= cfg_.dead_recycle_after) {
            k_new = k;
            break;
        }
    }
    if (k_new < 0) {
        for (int k = 0; k < cfg_.max_slots; ++k) {
            if (!used_[static_cast<std::size_t>(k)]) {
                k_new = k;
                ++used_count_;
                break;
            }
        }
    }
    if (k_new < 0) return -1;
    const auto ks = static_cast<std::size_t>(k_new);
    used_[ks] = 1;
    dead_[ks] = 0;
    SlotState fresh;
    fresh.mean.fill(0.0);
    fresh.mean[PX] = t.px[item];
    fresh.mean[PY] = t.py[item];
    fresh.mean[CR] = t.cr[item];
    fresh.mean[CG] = t.cg[item];
    fresh.mean[CB] = t.cb[item];
    fresh.mean[EX] = ex_init_;
    fresh.mean[EY] = ey_init_;
    fresh.prec.fill(cfg_.slot_prior_prec);
    fresh.prec[EX] = cfg_.extent_prior_strength;
    fresh.prec[EY] = cfg_.extent_prior_strength;
    pred_[ks] = fresh;
    cur_[ks] = fresh;
    state_[ks] = fresh;
    alpha_[ks] = 1.0;  // stick prior pseudocount
    alpha_snap_[ks] = 1.0;
    gamma_[ks] = {cfg_.color_warm_shape, cfg_.color_warm_shape, cfg_.color_warm_shape};
    rate_[ks] = {cfg_.color_warm_rate, cfg_.color_warm_rate, cfg_.color_warm_rate};
    gamma_snap_[ks] = gamma_[ks];
    rate_snap_[ks] = rate_[ks];
    created_scratch_.push_back(k_new);
    return k_new;
}

void Smm::hard_assign(const Tokens& t, std::size_t item, int k_new) {
    // Remove the worst token's soft contributions, then give it fully to the
    // new component.
    const std::size_t n = t.n();
    const std::size_t R = order_.size();  // order_ does not yet include k_new
    const double tok[5] = {t.px[item], t.py[item], t.cr[item], t.cg[item], t.cb[item]};
    double best = -1e300;
    for (std::size_t row = 0; row < R; ++row)
        best = std::max(best, rows_[row * n + item] + elogpi_[row]);
    double z = 0.0;
    for (std::size_t row = 0; row < R; ++row) {
        const double d = rows_[row * n + item] + elogpi_[row] - best;
        if (d > -34.0) z += std::exp(d);
    }
    for (std::size_t row = 0; row < R; ++row) {
        const double d = rows_[row * n + item] + elogpi_[row] - best;
        if (d <= -34.0) continue;
        const double r = std::exp(d) / z;
        RowStats& s = stats_[row];
        s.mass -= r;
        for (int j = 0; j < 5; ++j) {
            s.s1[j] -= r * tok[j];
            s.s2[j] -= r * tok[j] * tok[j];
        }
    }
    RowStats fresh;
    fresh.mass = 1.0;
    for (int j = 0; j < 5; ++j) {
        fresh.s1[j] = tok[j];
        fresh.s2[j] = tok[j] * tok[j];
    }
    // Append the new slot's row stats; order_ will be rebuilt on next refresh,
    // but the state/M updates below walk order_ + the appended entry.
    order_.push_back(k_new);
    stats_.push_back(fresh);
    elogpi_.push_back(0.0);
    stats_fresh_ = false;
}

double Smm::extent_obs(const RowStats& s, int axis, double mu) const {
    const double var = std::max(s.s2[axis] - 2.0 * mu * s.s1[axis] + mu * mu * s.mass, 0.0) /
                       std::max(s.mass, 1e-12);
    return std::sqrt(var);
}

void Smm::update_states(const Tokens& t) {
    (void)t;
    for (std::size_t row = 0; row < order_.size(); ++row) {
        const auto ks = static_cast<std::size_t>(order_[row]);
        const RowStats& s = stats_[row];
        const SlotState& prior = pred_[ks];
        SlotState post = prior;

        double invvar5[5];
        {
            const double ex = std::max(cur_[ks].mean[EX], cfg_.extent_floor);
            const double ey = std::max(cur_[ks].mean[EY], cfg_.extent_floor);
            invvar5[0] = 1.0 / (ex * ex);
            invvar5[1] = 1.0 / (ey * ey);
            for (int ch = 0; ch < 3; ++ch)
                invvar5[2 + ch] = gamma_[ks][ch] / rate_[ks][ch];
        }
        // Position and color receive pixel evidence through the fixed
        // projection; natural parameters add.
        static constexpr int dims[5] = {PX, PY, CR, CG, CB};
        for (int j = 0; j < 5; ++j) {
            const int d = dims[j];
            const double lam = prior.prec[static_cast<std::size_t>(d)] + s.mass * invvar5[j];
            const double hh =
                prior.prec[static_cast<std::size_t>(d)] * prior.mean[static_cast<std::size_t>(d)] +
                invvar5[j] * s.s1[j];
            if (!(lam > 0.0)) throw std::runtime_error("smm: singular slot precision");
            post.prec[static_cast<std::size_t>(d)] = lam;
            post.mean[static_cast<std::size_t>(d)] = hh / lam;
        }
        // Extent tracks the responsibility-weighted pixel spread around the
        // updated position, blended against the prediction by assigned mass.
        if (s.mass > 1e-9) {
            for (int axis = 0; axis < 2; ++axis) {
                const int d = axis == 0 ? EX : EY;
                const double e_obs = extent_obs(s, axis, post.mean[static_cast<std::size_t>(axis)]);
                const double lam0 = prior.prec[static_cast<std::size_t>(d)];
                const double lam = lam0 + s.mass;
                const double mean =
                    (lam0 * prior.mean[static_cast<std::size_t>(d)] + s.mass * e_obs) / lam;
                post.prec[static_cast<std::size_t>(d)] = lam;
                post.mean[static_cast<std::size_t>(d)] = std::max(mean, cfg_.extent_floor);
            }
        }
        state_[ks] = post;
        cur_[ks] = post;
    }
}

void Smm::m_step(bool learn) {
    if (!learn) return;
    const double rho = cfg_.rho;
    for (std::size_t row = 0; row < order_.size(); ++row) {
        const auto ks = static_cast<std::size_t>(order_[row]);
        const RowStats& s = stats_[row];
        const double target_alpha = 1.0 + s.mass;  // per-slot stick prior is 1
        if (rho <= 0.0)
            alpha_[ks] = alpha_snap_[ks] + s.mass;
        else
            alpha_[ks] = (1 - rho) * alpha_snap_[ks] + rho * target_alpha;
        for (int ch = 0; ch < 3; ++ch) {
            const double mu = state_[ks].mean[static_cast<std::size_t>(CR + ch)];
            const double sq =
                std::max(s.s2[2 + ch] - 2.0 * mu * s.s1[2 + ch] + mu * mu * s.mass, 0.0);
            if (rho <= 0.0) {
                gamma_[ks][ch] = gamma_snap_[ks][ch] + 0.5 * s.mass;
                rate_[ks][ch] = rate_snap_[ks][ch] + 0.5 * sq;
            } else {
                gamma_[ks][ch] =
                    (1 - rho) * gamma_snap_[ks][ch] + rho * (cfg_.gamma0_color + 0.5 * s.mass);
                rate_[ks][ch] =
                    (1 - rho) * rate_snap_[ks][ch] + rho * (cfg_.color_rate0 + 0.5 * sq);
            }
        }
    }
}

// Expansion handle bridging the generic driver onto the pixel batch.
struct SmmExpandHandle {
    Smm& s;
    const Tokens& t;

    struct Worst {
        int item;
        double best;
        bool any;
    };

    Worst refresh_and_worst() {
        s.compute_rows(t);
        s.reduce(t);
        if (s.order_.empty()) {
            // no components yet: every token is unexplained; seed from the first
            return {0, -1e300, t.n() > 0};
        }
        return {static_cast<int>(s.worst_item_), s.worst_best_, t.n() > 0};
    }
    int components() const { return static_cast<int>(s.order_.size()); }
    bool at_capacity() const {
        for (int k = 0; k < s.cfg_.max_slots; ++k) {
            const auto ks = static_cast<std::size_t>(k);
            if (!s.used_[ks]) return false;
            if (s.dead_[ks] >= s.cfg_.dead_recycle_after) return false;
        }
        return true;
    }
    void create_and_update(int item) {
        const int k_new = s.allocate_slot(t, static_cast<std::size_t>(item));
        if (k_new < 0) return;
        s.hard_assign(t, static_cast<std::size_t>(item), k_new);
        s.update_states(t);
        s.m_step(true);
    }
};

void Smm::process_frame(const Tokens& t, bool learn, FrameStats& out) {
    alpha_snap_ = alpha_;
    gamma_snap_ = gamma_;
    rate_snap_ = rate_;
    out.created.clear();
    out.capped = false;

    created_scratch_.clear();
    // Filtering pass first: fold this frame's evidence into the slot
    // posteriors so the expansion check below judges updated slots, not the
    // stale predictions (a tracked moving object is explained by its own
    // slot once the slot has moved).
    if (!order_.empty() || !used_order().empty()) {
        compute_rows(t);
        reduce(t);
        update_states(t);
    }
    if (learn) {
        SmmExpandHandle handle{*this, t};
        const auto res = expand_batch(handle, cfg_.tau_smm, cfg_.expand_steps);
        out.capped = res.capped;
        out.created = created_scratch_;
    }
    if (!stats_fresh_) {
        compute_rows(t);
        reduce(t);
    }
    update_states(t);
    m_step(learn);

    out.mass.assign(static_cast<std::size_t>(cfg_.max_slots), 0.0);
    for (std::size_t row = 0; row < order_.size(); ++row)
        out.mass[static_cast<std::size_t>(order_[row])] = stats_[row].mass;
    out.neg_expected_loglik = neg_ell_;
    for (int k = 0; k < cfg_.max_slots; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        if (!used_[ks]) continue;
        if (out.mass[ks] > cfg_.eps_active)
            dead_[ks] = 0;
        else
            ++dead_[ks];
    }
    stats_fresh_ = false;
}

void Smm::e_assignments(const Tokens& t, std::vector<double>& r) const {
    auto* self = const_cast<Smm*>(this);
    self->compute_rows(t);
    const std::size_t n = t.n();
    const std::size_t R = order_.size();
    r.assign(n * R, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double best = -1e300;
        for (std::size_t row = 0; row < R; ++row)
            best = std::max(best, rows_[row * n + i] + elogpi_[row]);
        double z = 0.0;
        for (std::size_t row = 0; row < R; ++row) {
            const double d = rows_[row * n + i] + elogpi_[row] - best;
            if (d > -34.0) z += std::exp(d);
        }
        for (std::size_t row = 0; row < R; ++row) {
            const double d = rows_[row * n + i] + elogpi_[row] - best;
            r[i * R + row] = d > -34.0 ? std::exp(d) / z : 0.0;
        }
    }
    self->stats_fresh_ = false;
}

void Smm::save(core::SectionWriter& w) const {
    w.put_u64(static_cast<uint64_t>(cfg_.max_slots));
    for (int k = 0; k < cfg_.max_slots; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        w.put_u8(used_[ks]);
        w.put_i64(dead_[ks]);
        w.put_f64(alpha_[ks]);
        w.put_f64s(gamma_[ks].data(), 3);
        w.put_f64s(rate_[ks].data(), 3);
        w.put_f64s(state_[ks].mean.data(), 10);
        w.put_f64s(state_[ks].prec.data(), 10);
    }
}

void Smm::load(core::SectionReader& r) {
    const int K = static_cast<int>(r.get_u64());
    if (K != cfg_.max_slots) throw std::runtime_error("smm: capacity mismatch in checkpoint");
    used_count_ = 0;
    for (int k = 0; k < K; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        used_[ks] = r.get_u8();
        dead_[ks] = static_cast<int>(r.get_i64());
        alpha_[ks] = r.get_f64();
        r.get_f64s(gamma_[ks].data(), 3);
        r.get_f64s(rate_[ks].data(), 3);
        r.get_f64s(state_[ks].mean.data(), 10);
        r.get_f64s(state_[ks].prec.data(), 10);
        pred_[ks] = state_[ks];
        cur_[ks] = state_[ks];
        if (used_[ks]) ++used_count_;
    }
}

}  // namespace axiom::model
