#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "axiom/core/checkpoint.hpp"
#include "axiom/model/config.hpp"
#include "axiom/model/dirichlet.hpp"
#include "axiom/model/niw.hpp"

namespace axiom::model {

// Discrete factors of the recurrent mixture. Type vocabularies grow lazily
// as the identity and transition mixtures grow; interacting index 0 is the
// "no partner" category so growth never remaps existing cells.
enum class Factor : int { Type = 0, Interacting = 1, Assign = 2, Switch = 3, Action = 4, Reward = 5 };
inline constexpr int kNumFactors = 6;
inline constexpr int kRewardBins = 3;  // {-1, 0, +1} -> {0, 1, 2}

inline int reward_to_bin(int reward) { return reward + 1; }
inline int bin_to_reward(int bin) { return bin - 1; }

// Categorical distribution stored as uniform base probability plus sparse
// cell overrides (absolute probabilities).
struct SparseDist {
    double base = 0.0;
    int size = 0;
    std::vector<std::pair<int, double>> cells;  // sorted by index

    double prob(int i) const {
        for (const auto& [idx, p] : cells)
            if (idx == i) return p;
        return base;
    }
    double sum() const {
        double s = base * size;
        for (const auto& [idx, p] : cells) s += p - base;
        return s;
    }
};

// One slot-step of evidence for the rMM. Continuous features are
// (p_x, p_y, v_x, v_y, u, dp_x, dp_y); the displacement pair is dropped in
// fixed-distance mode. Switch and reward are outputs during prediction and
// observed during learning.
struct RmmContext {
    std::array<double, 7> f{};
    int type = 0;
    int interacting = 0;  // 0 = no partner, 1 + v = partner of type v
    int assign = 1;
    int action = 0;
    const std::vector<double>* switch_soft = nullptr;  // q(s_tmm) when learning
    int reward_bin = -1;                               // observed bin when learning
};

class Rmm {
public:
    struct Component {
        Niw cont;
        std::array<SparseDirichlet, kNumFactors> disc;
        uint32_t version = 0;
    };

    Rmm(const Config& cfg, int action_count);

    int feature_dim() const { return fdim_; }
    int components_in_use() const { return static_cast<int>(comps_.size()); }
    bool at_capacity() const { return components_in_use() >= cfg_.max_components; }
    int factor_size(Factor f) const { return factor_sizes_[static_cast<std::size_t>(f)]; }
    void grow_factor(Factor f, int new_size);

    // Expected log-likelihood of a context under component m, mixing excluded.
    double score(const RmmContext& ctx, int m) const;
    // Normalized responsibilities incl. the mixing term; throws if empty.
    void e_step(const RmmContext& ctx, std::vector<double>& rho) const;

    // Mixture predictive over an output factor: q(l) = sum_m rho_m E[a_m,l].
    SparseDist predict(const std::vector<double>& rho, Factor f) const;

    // Expected Dirichlet-count information gain over the switch and reward
    // factors: sum_m rho_m KL( Dir(alpha_m + rho_m * abar_m) || Dir(alpha_m) )
    // with abar_m the component's own predictive outcome distribution.
    double info_gain_exact(const std::vector<double>& rho) const;
    // Table-interpolated variant used inside rollouts (per-component tables
    // over the added weight, rebuilt lazily when a component changes).
    double info_gain(const std::vector<double>& rho) const;

    struct Item {
        RmmContext ctx;
        double weight;  // slot gate
    };
    struct Result {
        std::vector<std::vector<double>> rho;
        int created = 0;
        bool capped = false;
    };
    void process(const std::vector<Item>& batch, bool learn, Result& out);

    const Component& comp(int m) const { return comps_[static_cast<std::size_t>(m)]; }
    const StickMixing& mixing() const { return mixing_; }
    Niw cont_prior() const { return Niw(fdim_, cfg_.rmm_kappa0, cfg_.rmm_u0, cfg_.rmm_n0); }
    double disc_base(Factor f) const;
    const Config& config() const { return cfg_; }

    // BMR support: merged = eta1 + eta2 - eta_prior; the merged component
    // replaces keep_idx and drop_idx is removed (order preserved).
    Component merged_component(int m1, int m2) const;
    void apply_merge(int keep_idx, int drop_idx, Component merged);
    // Replace the component set after a reduction pass: survivors keep their
    // (possibly merged) working content and pooled mixing counts.
    void rebuild_after_bmr(std::vector<Component>& work, const std::vector<char>& alive,
                           const std::vector<double>& counts);

    void save(core::SectionWriter& w) const;
    void load(core::SectionReader& r);

private:
    friend struct RmmExpandHandle;
    friend class Bmr;

    static constexpr int kIgKnots = 24;
    struct KlTableEntry {
        uint32_t version = ~0u;
        std::array<double, kIgKnots> sw{};
        std::array<double, kIgKnots> rw{};
    };

    double factor_elog(const Component& c, Factor f, int value) const;
    double switch_soft_elog(const Component& c, const std::vector<double>& q) const;
    void refresh_mix_elog() const;
    void m_step(const std::vector<Item>& batch);
    int create_component(const RmmContext& ctx);
    // KL( Dir(alpha + w*abar) || Dir(alpha) ) for one factor of one component.
    double comp_kl_at(const Component& c, Factor f, double w) const;
    const KlTableEntry& ig_entry(int m) const;

    Config cfg_;
    int fdim_;
    std::vector<Component> comps_;
    StickMixing mixing_;
    std::array<int, kNumFactors> factor_sizes_{};

    mutable std::vector<double> mix_elog_;
    mutable bool mix_dirty_ = true;
    mutable std::vector<KlTableEntry> ig_cache_;

    // frame scratch
    std::vector<double> scores_;
    std::vector<double> resp_;
    std::vector<Component> snap_;
    std::vector<double> mix_snap_;
    bool fresh_ = false;
};

}  // namespace axiom::model
