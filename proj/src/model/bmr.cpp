#include "axiom/model/bmr.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <vector>

#include "axiom/core/special.hpp"

namespace axiom::model {

namespace {

int sample_sparse_dirichlet_mean(const SparseDirichlet& d, double u) {
    // Category draw from the posterior mean.
    double rem = u * d.total();
    for (const auto& cell : d.cells()) {
        rem -= d.base() + cell.extra;
        if (rem < 0) return cell.idx;
    }
    // Remaining mass is uniform over the non-cell indices.
    int skip = static_cast<int>(rem / d.base());
    int idx = 0;
    std::size_t ci = 0;
    while (true) {
        if (ci < d.cells().size() && d.cells()[ci].idx == idx) {
            ++ci;
            ++idx;
            continue;
        }
        if (skip == 0) break;
        --skip;
        ++idx;
    }
    return std::min(idx, d.size() - 1);
}

struct Sample {
    RmmContext ctx;  // inputs only (predict mode)
    int sw = 0;      // sampled switch outcome
    int rw = 0;      // sampled reward bin
};

// KL-to-prior restricted to the reward and switch factors.
double complexity(const Rmm::Component& c) {
    return c.disc[static_cast<std::size_t>(Factor::Switch)].kl_to_prior() +
           c.disc[static_cast<std::size_t>(Factor::Reward)].kl_to_prior();
}

double mean_prob(const Rmm::Component& c, Factor f, int idx) {
    const SparseDirichlet& d = c.disc[static_cast<std::size_t>(f)];
    return d.count(idx) / d.total();
}

// Mutual expected log-likelihood of each component's mean statistics under
// the other, used only to rank merge candidates.
double pair_similarity(const Rmm& rmm, int a, int b) {
    const Rmm::Component& ca = rmm.comp(a);
    const Rmm::Component& cb = rmm.comp(b);
    auto one_way = [&](const Rmm::Component& x, const Rmm::Component& y) {
        double s = y.cont.expected_loglik(x.cont.mean().data());
        for (int f = 0; f < kNumFactors; ++f) {
            const SparseDirichlet& dx = x.disc[static_cast<std::size_t>(f)];
            const SparseDirichlet& dy = y.disc[static_cast<std::size_t>(f)];
            // cross term sum_l mean_x(l) * E[log a_y(l)] grouped over cells
            double covered = 0.0, acc = 0.0;
            for (const auto& cell : dx.cells()) {
                const double p = (dx.base() + cell.extra) / dx.total();
                acc += p * dy.elog(cell.idx);
                covered += p;
            }
            for (const auto& cell : dy.cells()) {
                bool in_x = false;
                for (const auto& cx : dx.cells())
                    if (cx.idx == cell.idx) {
                        in_x = true;
                        break;
                    }
                if (in_x) continue;
                const double p = dx.base() / dx.total();
                acc += p * dy.elog(cell.idx);
                covered += p;
            }
            acc += (1.0 - covered) * dy.elog_base();
            s += acc;
        }
        return s;
    };
    return one_way(ca, cb) + one_way(cb, ca);
}

}  // namespace

BmrReport bmr_reduce(Rmm& rmm, core::Rng rng) {
    BmrReport rep;
    rep.components_before = rmm.components_in_use();
    rep.components_after = rep.components_before;
    if (rep.components_before < 2) return rep;

    const Config& cfg = rmm.config();
    const int M0 = rmm.components_in_use();
    const int n_samples = cfg.bmr_samples;

    // --- ancestral sampling from the current model
    std::vector<double> mix_mean(static_cast<std::size_t>(M0));
    {
        double tot = 0.0;
        for (int m = 0; m < M0; ++m) tot += rmm.mixing().count(m);
        for (int m = 0; m < M0; ++m) mix_mean[static_cast<std::size_t>(m)] = rmm.mixing().count(m) / tot;
    }
    std::vector<Sample> data(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) {
        core::Rng r = rng.fork(1000 + i);
        double u = r.next_unit();
        int m = 0;
        for (; m < M0 - 1; ++m) {
            u -= mix_mean[static_cast<std::size_t>(m)];
            if (u < 0) break;
        }
        const Rmm::Component& c = rmm.comp(m);
        Sample& s = data[static_cast<std::size_t>(i)];
        const Eigen::VectorXd f = c.cont.sample_predictive(r);
        for (int d = 0; d < rmm.feature_dim(); ++d) s.ctx.f[static_cast<std::size_t>(d)] = f(d);
        auto draw = [&](Factor fac) {
            return sample_sparse_dirichlet_mean(c.disc[static_cast<std::size_t>(fac)], r.next_unit());
        };
        s.ctx.type = draw(Factor::Type);
        s.ctx.interacting = draw(Factor::Interacting);
        s.ctx.assign = draw(Factor::Assign);
        s.ctx.action = draw(Factor::Action);
        s.sw = draw(Factor::Switch);
        s.rw = draw(Factor::Reward);
    }

    // --- cached per-sample score structure in scaled space
    std::vector<double> mix_elog;
    rmm.mixing().elog_all(mix_elog);
    const std::size_t N = data.size();
    std::vector<double> w(N * static_cast<std::size_t>(M0));
    std::vector<double> smax(N);
    std::vector<double> Z(N, 0.0), Asw(N, 0.0), Arw(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
        double best = -1e300;
        for (int m = 0; m < M0; ++m) {
            const double s = rmm.score(data[i].ctx, m) + mix_elog[static_cast<std::size_t>(m)];
            w[i * static_cast<std::size_t>(M0) + static_cast<std::size_t>(m)] = s;
            best = std::max(best, s);
        }
        smax[i] = best;
        for (int m = 0; m < M0; ++m) {
            double& wim = w[i * static_cast<std::size_t>(M0) + static_cast<std::size_t>(m)];
            wim = std::exp(wim - best);
            Z[i] += wim;
            Asw[i] += wim * mean_prob(rmm.comp(m), Factor::Switch, data[i].sw);
            Arw[i] += wim * mean_prob(rmm.comp(m), Factor::Reward, data[i].rw);
        }
    }

    auto fit_term = [&]() {
        double fit = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            fit += std::log(std::max(Asw[i], 1e-300)) + std::log(std::max(Arw[i], 1e-300)) -
                   2.0 * std::log(std::max(Z[i], 1e-300));
        return fit;
    };

    std::vector<char> alive(static_cast<std::size_t>(M0), 1);
    // Working copies of merged content + pooled mixing probabilities (fixed
    // elog snapshot; the merged stick inherits the summed probability).
    std::vector<Rmm::Component> work(static_cast<std::size_t>(M0));
    std::vector<double> pi_log(static_cast<std::size_t>(M0));
    std::vector<double> counts_work(static_cast<std::size_t>(M0));
    std::vector<double> kl(static_cast<std::size_t>(M0));
    for (int m = 0; m < M0; ++m) {
        work[static_cast<std::size_t>(m)] = rmm.comp(m);
        pi_log[static_cast<std::size_t>(m)] = mix_elog[static_cast<std::size_t>(m)];
        counts_work[static_cast<std::size_t>(m)] = rmm.mixing().count(m);
        kl[static_cast<std::size_t>(m)] = complexity(rmm.comp(m));
    }
    double total_kl = 0.0;
    for (double v : kl) total_kl += v;
    double elbo = fit_term() - total_kl;

    // --- candidate pairs ranked by mutual expected log-likelihood
    struct Cand {
        int a, b;
        double sim;
    };
    std::vector<Cand> cands;
    {
        // At large M, subsample pair space deterministically to stay bounded.
        const long all_pairs = static_cast<long>(M0) * (M0 - 1) / 2;
        const long budget = 8L * cfg.bmr_pairs;
        if (all_pairs <= budget) {
            for (int a = 0; a < M0; ++a)
                for (int b = a + 1; b < M0; ++b) cands.push_back({a, b, pair_similarity(rmm, a, b)});
        } else {
            core::Rng pr = rng.fork(77);
            for (long t = 0; t < budget; ++t) {
                const int a = static_cast<int>(pr.next_below(static_cast<uint32_t>(M0)));
                int b = static_cast<int>(pr.next_below(static_cast<uint32_t>(M0)));
                if (a == b) b = (b + 1) % M0;
                cands.push_back({std::min(a, b), std::max(a, b), pair_similarity(rmm, a, b)});
            }
        }
        std::stable_sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
            if (x.sim != y.sim) return x.sim > y.sim;
            if (x.a != y.a) return x.a < y.a;
            return x.b < y.b;
        });
        if (static_cast<int>(cands.size()) > cfg.bmr_pairs) cands.resize(static_cast<std::size_t>(cfg.bmr_pairs));
    }

    std::vector<double> w_new(N);
    for (const Cand& cand : cands) {
        if (!alive[static_cast<std::size_t>(cand.a)] || !alive[static_cast<std::size_t>(cand.b)]) continue;
        ++rep.merges_tested;
        const int a = cand.a, b = cand.b;
        Rmm::Component merged;
        {
            // Merge the *current* working contents (components may already
            // carry earlier accepted merges).
            merged.cont = Niw::merge(work[static_cast<std::size_t>(a)].cont,
                                     work[static_cast<std::size_t>(b)].cont, rmm.cont_prior());
            for (int f = 0; f < kNumFactors; ++f)
                merged.disc[static_cast<std::size_t>(f)] = SparseDirichlet::merge(
                    work[static_cast<std::size_t>(a)].disc[static_cast<std::size_t>(f)],
                    work[static_cast<std::size_t>(b)].disc[static_cast<std::size_t>(f)]);
        }
        const double pi_merged = std::log(std::exp(pi_log[static_cast<std::size_t>(a)]) +
                                          std::exp(pi_log[static_cast<std::size_t>(b)]));
        const double kl_merged = complexity(merged);

        // Incremental ELBO trial.
        double fit_try = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            double s = merged.cont.expected_loglik(data[i].ctx.f.data());
            s += merged.disc[static_cast<std::size_t>(Factor::Type)].elog(data[i].ctx.type);
            s += merged.disc[static_cast<std::size_t>(Factor::Interacting)].elog(data[i].ctx.interacting);
            s += merged.disc[static_cast<std::size_t>(Factor::Assign)].elog(data[i].ctx.assign);
            s += merged.disc[static_cast<std::size_t>(Factor::Action)].elog(data[i].ctx.action);
            const double wn = std::exp(s + pi_merged - smax[i]);
            w_new[i] = wn;
            const double wa = w[i * static_cast<std::size_t>(M0) + static_cast<std::size_t>(a)];
            const double wb = w[i * static_cast<std::size_t>(M0) + static_cast<std::size_t>(b)];
            const double Zi = Z[i] - wa - wb + wn;
            const double aswi = Asw[i] -
                                wa * mean_prob(work[static_cast<std::size_t>(a)], Factor::Switch, data[i].sw) -
                                wb * mean_prob(work[static_cast<std::size_t>(b)], Factor::Switch, data[i].sw) +
                                wn * mean_prob(merged, Factor::Switch, data[i].sw);
            const double arwi = Arw[i] -
                                wa * mean_prob(work[static_cast<std::size_t>(a)], Factor::Reward, data[i].rw) -
                                wb * mean_prob(work[static_cast<std::size_t>(b)], Factor::Reward, data[i].rw) +
                                wn * mean_prob(merged, Factor::Reward, data[i].rw);
            fit_try += std::log(std::max(aswi, 1e-300)) + std::log(std::max(arwi, 1e-300)) -
                       2.0 * std::log(std::max(Zi, 1e-300));
        }
        const double total_kl_try = total_kl - kl[static_cast<std::size_t>(a)] -
                                    kl[static_cast<std::size_t>(b)] + kl_merged;
        const double elbo_try = fit_try - total_kl_try;
        if (elbo_try >= elbo - 1e-9) {
            // Accept: a absorbs b.
            for (std::size_t i = 0; i < N; ++i) {
                const double wa = w[i * static_cast<std::size_t>(M0) + static_cast<std::size_t>(a)];
                const double wb = w[i * static_cast<std::size_t>(M0) + static_cast<std::size_t>(b)];
                Z[i] += w_new[i] - wa - wb;
                Asw[i] += w_new[i] * mean_prob(merged, Factor::Switch, data[i].sw) -
                          wa * mean_prob(work[static_cast<std::size_t>(a)], Factor::Switch, data[i].sw) -
                          wb * mean_prob(work[static_cast<std::size_t>(b)], Factor::Switch, data[i].sw);
                Arw[i] += w_new[i] * mean_prob(merged, Factor::Reward, data[i].rw) -
                          wa * mean_prob(work[static_cast<std::size_t>(a)], Factor::Reward, data[i].rw) -
                          wb * mean_prob(work[static_cast<std::size_t>(b)], Factor::Reward, data[i].rw);
                w[i * static_cast<std::size_t>(M0) + static_cast<std::size_t>(a)] = w_new[i];
                w[i * static_cast<std::size_t>(M0) + static_cast<std::size_t>(b)] = 0.0;
            }
            work[static_cast<std::size_t>(a)] = std::move(merged);
            pi_log[static_cast<std::size_t>(a)] = pi_merged;
            counts_work[static_cast<std::size_t>(a)] +=
                counts_work[static_cast<std::size_t>(b)] - 1.0;  // prior stick not double-counted
            kl[static_cast<std::size_t>(a)] = kl_merged;
            kl[static_cast<std::size_t>(b)] = 0.0;
            total_kl = total_kl_try;
            alive[static_cast<std::size_t>(b)] = 0;
            assert(elbo_try >= elbo - 1e-6);
            elbo = elbo_try;
            ++rep.merges_accepted;
        }
    }

    // Write accepted merges back, preserving component order.
    if (rep.merges_accepted > 0) rmm.rebuild_after_bmr(work, alive, counts_work);
    rep.components_after = rmm.components_in_use();
    return rep;
}

}  // namespace axiom::model
