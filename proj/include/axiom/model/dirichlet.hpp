#pragma once

#include <algorithm>
#include <cassert>
#include <vector>

#include "axiom/core/special.hpp"

namespace axiom::model {

// Truncated stick-breaking mixing weights: one pseudocount per component in
// use plus a tail pseudocount for not-yet-used sticks. E[log pi] runs over
// in-use components with the tail absorbing the remaining mass.
class StickMixing {
public:
    explicit StickMixing(double tail) : tail_(tail) {}

    int size() const { return static_cast<int>(counts_.size()); }
    void push_component(double prior_count = 1.0) { counts_.push_back(prior_count); }
    void add(int i, double w) { counts_[static_cast<std::size_t>(i)] += w; }
    void set(int i, double v) { counts_[static_cast<std::size_t>(i)] = v; }
    double count(int i) const { return counts_[static_cast<std::size_t>(i)]; }
    double tail() const { return tail_; }

    double total() const {
        double s = tail_;
        for (double c : counts_) s += c;
        return s;
    }

    double elog(int i) const {
        return core::digamma(counts_[static_cast<std::size_t>(i)]) - core::digamma(total());
    }

    void elog_all(std::vector<double>& out) const {
        const double pt = core::digamma(total());
        out.resize(counts_.size());
        for (std::size_t i = 0; i < counts_.size(); ++i) out[i] = core::digamma(counts_[i]) - pt;
    }

    void erase(int i) { counts_.erase(counts_.begin() + i); }

    const std::vector<double>& counts() const { return counts_; }
    std::vector<double>& counts() { return counts_; }

private:
    std::vector<double> counts_;
    double tail_;
};

// Dirichlet posterior over a (possibly large) categorical factor, stored as
// a uniform prior base plus sparse extra counts on observed cells. The cell
// list stays sorted by index; expected-log values are cached.
class SparseDirichlet {
public:
    SparseDirichlet() = default;
    SparseDirichlet(double base, int size) : base_(base), size_(size) {}

    int size() const { return size_; }
    double base() const { return base_; }

    void grow(int new_size) {
        assert(new_size >= size_);
        if (new_size != size_) {
            size_ = new_size;
            dirty_ = true;
        }
    }

    double count(int i) const {
        const Cell* c = find(i);
        return base_ + (c ? c->extra : 0.0);
    }

    double total() const { return base_ * size_ + extra_total_; }

    void add(int i, double w) {
        assert(i >= 0 && i < size_);
        auto it = std::lower_bound(cells_.begin(), cells_.end(), i,
                                   [](const Cell& c, int idx) { return c.idx < idx; });
        if (it != cells_.end() && it->idx == i)
            it->extra += w;
        else
            cells_.insert(it, Cell{i, w, 0.0});
        extra_total_ += w;
        dirty_ = true;
    }

    double mean(int i) const { return count(i) / total(); }

    // E[log a_i] = psi(count_i) - psi(total); cached per cell.
    double elog(int i) const {
        refresh();
        const Cell* c = find(i);
        return c ? c->elog : elog_base_;
    }

    double elog_base() const {
        refresh();
        return elog_base_;
    }

    double psi_total() const {
        refresh();
        return psi_total_;
    }

    struct Cell {
        int idx;
        double extra;
        mutable double elog;
    };
    const std::vector<Cell>& cells() const { return cells_; }

    // eta1 + eta2 - eta_prior on the extra counts; bases must agree.
    static SparseDirichlet merge(const SparseDirichlet& a, const SparseDirichlet& b) {
        assert(a.base_ == b.base_);
        SparseDirichlet out(a.base_, std::max(a.size_, b.size_));
        out.cells_ = a.cells_;
        out.extra_total_ = a.extra_total_;
        for (const Cell& c : b.cells_) out.add(c.idx, c.extra);
        out.dirty_ = true;
        return out;
    }

    // KL( Dir(this) || Dir(prior with same base/size) ), restricted to this factor.
    double kl_to_prior() const {
        const double a0 = base_;
        const double asum = a0 * size_;
        const double bsum = total();
        double kl = core::lgamma_pos(bsum) - core::lgamma_pos(asum);
        const double psi_bsum = core::digamma(bsum);
        // Non-extra cells contribute zero (b_i == a_i).
        for (const Cell& c : cells_) {
            const double b = a0 + c.extra;
            kl -= core::lgamma_pos(b) - core::lgamma_pos(a0);
            kl += c.extra * (core::digamma(b) - psi_bsum);
        }
        return kl;
    }

private:
    const Cell* find(int i) const {
        auto it = std::lower_bound(cells_.begin(), cells_.end(), i,
                                   [](const Cell& c, int idx) { return c.idx < idx; });
        return (it != cells_.end() && it->idx == i) ? &*it : nullptr;
    }

    void refresh() const {
        if (!dirty_) return;
        psi_total_ = core::digamma(total());
        elog_base_ = core::digamma(base_) - psi_total_;
        for (const Cell& c : cells_) c.elog = core::digamma(base_ + c.extra) - psi_total_;
        dirty_ = false;
    }

    double base_ = 1.0;
    int size_ = 0;
    double extra_total_ = 0.0;
    std::vector<Cell> cells_;
    mutable bool dirty_ = true;
    mutable double psi_total_ = 0.0;
    mutable double elog_base_ = 0.0;
};

}  // namespace axiom::model
