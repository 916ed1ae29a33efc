#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cassert>
#include <cmath>
#include <vector>

#include "axiom/core/special.hpp"

namespace axiom::model {

// Normal-Inverse-Wishart posterior over a Gaussian's (mean, covariance).
// Stored in standard parameters (m, kappa, U, n); conjugate updates and
// merges go through the natural representation (kappa, kappa*m,
// U + kappa*m*m^T, n), which is linear in the sufficient statistics.
class Niw {
public:
    Niw() = default;
    Niw(int d, double kappa0, double u0_diag, double n0)
        : d_(d), m_(Eigen::VectorXd::Zero(d)), kappa_(kappa0),
          U_(Eigen::MatrixXd::Identity(d, d) * u0_diag), n_(n0) {}

    static Niw at_datum(const double* y, int d, double u0_diag) {
        // Fresh-component initializer: unit strength at the datum,
        // degrees of freedom d + 2, prior scale matrix.
        Niw out(d, 1.0, u0_diag, d + 2);
        out.m_ = Eigen::Map<const Eigen::VectorXd>(y, d);
        return out;
    }

    int dim() const { return d_; }
    const Eigen::VectorXd& mean() const { return m_; }
    double kappa() const { return kappa_; }
    const Eigen::MatrixXd& scale() const { return U_; }
    double dof() const { return n_; }

    void set_params(const Eigen::VectorXd& m, double kappa, const Eigen::MatrixXd& U, double n) {
        d_ = static_cast<int>(m.size());
        m_ = m;
        kappa_ = kappa;
        U_ = U;
        n_ = n;
        dirty_ = true;
    }

    // Conjugate update with weighted moments N = sum w, S1 = sum w*y,
    // S2 = sum w*y*y^T.
    void add_stats(double N, const Eigen::VectorXd& S1, const Eigen::MatrixXd& S2) {
        const Eigen::VectorXd b = kappa_ * m_ + S1;
        const Eigen::MatrixXd C = U_ + kappa_ * m_ * m_.transpose() + S2;
        kappa_ += N;
        n_ += N;
        m_ = b / kappa_;
        U_ = C - kappa_ * m_ * m_.transpose();
        dirty_ = true;
    }

    void add_obs(const double* y, double w) {
        Eigen::Map<const Eigen::VectorXd> yv(y, d_);
        add_stats(w, w * yv, w * yv * yv.transpose());
    }

    // (1 - rho) * current + rho * target, in natural parameters.
    void blend_toward(const Niw& target, double rho) {
        const double a = (1 - rho) * kappa_ + rho * target.kappa_;
        const Eigen::VectorXd b = (1 - rho) * kappa_ * m_ + rho * target.kappa_ * target.m_;
        const Eigen::MatrixXd C = (1 - rho) * (U_ + kappa_ * m_ * m_.transpose()) +
                                  rho * (target.U_ + target.kappa_ * target.m_ * target.m_.transpose());
        kappa_ = a;
        n_ = (1 - rho) * n_ + rho * target.n_;
        m_ = b / a;
        U_ = C - a * m_ * m_.transpose();
        dirty_ = true;
    }

    // eta_1 + eta_2 - eta_prior, so prior mass is not double-counted.
    static Niw merge(const Niw& x, const Niw& y, const Niw& prior) {
        Niw out;
        out.d_ = x.d_;
        out.kappa_ = x.kappa_ + y.kappa_ - prior.kappa_;
        out.n_ = x.n_ + y.n_ - prior.n_;
        const Eigen::VectorXd b =
            x.kappa_ * x.m_ + y.kappa_ * y.m_ - prior.kappa_ * prior.m_;
        const Eigen::MatrixXd C = (x.U_ + x.kappa_ * x.m_ * x.m_.transpose()) +
                                  (y.U_ + y.kappa_ * y.m_ * y.m_.transpose()) -
                                  (prior.U_ + prior.kappa_ * prior.m_ * prior.m_.transpose());
        out.m_ = b / out.kappa_;
        out.U_ = C - out.kappa_ * out.m_ * out.m_.transpose();
        out.dirty_ = true;
        return out;
    }

    // E_q[log N(y; mu, Sigma)] in the digamma/log-det form.
    double expected_loglik(const double* y) const {
        refresh();
        Eigen::Map<const Eigen::VectorXd> yv(y, d_);
        const Eigen::VectorXd diff = yv - m_;
        const double quad = n_ * diff.dot(Pn_over_n_ * diff);
        return c0_ - 0.5 * quad;
    }

    // Same, marginalized to a subset of dimensions: sub-block of (m, U) with
    // degrees of freedom reduced by the number of dropped dimensions.
    double expected_loglik_masked(const double* y, const std::vector<int>& dims) const {
        const int ds = static_cast<int>(dims.size());
        Eigen::VectorXd ms(ds);
        Eigen::MatrixXd Us(ds, ds);
        Eigen::VectorXd yv(ds);
        for (int i = 0; i < ds; ++i) {
            ms(i) = m_(dims[i]);
            yv(i) = y[dims[i]];
            for (int j = 0; j < ds; ++j) Us(i, j) = U_(dims[i], dims[j]);
        }
        const double n_adj = n_ - (d_ - ds);
        Eigen::LLT<Eigen::MatrixXd> llt(Us);
        const Eigen::VectorXd diff = yv - ms;
        const double quad = n_adj * diff.dot(llt.solve(diff));
        double logdet = 0.0;
        for (int i = 0; i < ds; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
        double elogdet_prec = -logdet + ds * std::log(2.0);
        for (int i = 1; i <= ds; ++i) elogdet_prec += core::digamma(0.5 * (n_adj + 1 - i));
        return -0.5 * ds * std::log(2.0 * M_PI) + 0.5 * elogdet_prec -
               0.5 * (ds / kappa_ + quad);
    }

    // Cached score ingredients for flat hot loops: score = c0 - 0.5*(y-m)'P(y-m).
    double score_const() const {
        refresh();
        return c0_;
    }
    const Eigen::MatrixXd& score_precision() const {
        refresh();
        return P_;
    }

    // Draw from the posterior predictive (multivariate Student-t).
    template <class RngT>
    Eigen::VectorXd sample_predictive(RngT& rng) const {
        refresh();
        const double dof = std::max(n_ - d_ + 1, 1.0);
        Eigen::VectorXd z(d_);
        for (int i = 0; i < d_; ++i) z(i) = rng.next_normal();
        double ratio;  // chi2(dof)/dof
        if (dof > 256.0) {
            ratio = std::max(0.25, 1.0 + rng.next_normal() * std::sqrt(2.0 / dof));
        } else {
            double chi2 = 0.0;
            for (int i = 0; i < static_cast<int>(dof); ++i) {
                const double g = rng.next_normal();
                chi2 += g * g;
            }
            ratio = std::max(chi2 / dof, 1e-12);
        }
        return m_ + (predictive_chol_ * z) / std::sqrt(ratio);
    }

private:
    void refresh() const {
        if (!dirty_) return;
        Eigen::LLT<Eigen::MatrixXd> llt(U_);
        Uinv_ = llt.solve(Eigen::MatrixXd::Identity(d_, d_));
        double logdetU = 0.0;
        for (int i = 0; i < d_; ++i) logdetU += 2.0 * std::log(llt.matrixL()(i, i));
        double elogdet_prec = -logdetU + d_ * std::log(2.0);
        for (int i = 1; i <= d_; ++i) elogdet_prec += core::digamma(0.5 * (n_ + 1 - i));
        c0_ = -0.5 * d_ * std::log(2.0 * M_PI) + 0.5 * elogdet_prec - 0.5 * d_ / kappa_;
        P_ = n_ * Uinv_;
        Pn_over_n_ = Uinv_;
        const double dof = std::max(n_ - d_ + 1, 1.0);
        const Eigen::MatrixXd pred_cov = U_ * ((kappa_ + 1) / (kappa_ * dof));
        predictive_chol_ = Eigen::LLT<Eigen::MatrixXd>(pred_cov).matrixL();
        dirty_ = false;
    }

    int d_ = 0;
    Eigen::VectorXd m_;
    double kappa_ = 0.0;
    Eigen::MatrixXd U_;
    double n_ = 0.0;

    mutable bool dirty_ = true;
    mutable Eigen::MatrixXd Uinv_, P_, Pn_over_n_, predictive_chol_;
    mutable double c0_ = 0.0;
};

}  // namespace axiom::model
