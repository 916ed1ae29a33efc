#pragma once

#include <array>
#include <vector>

#include "axiom/core/checkpoint.hpp"
#include "axiom/model/config.hpp"
#include "axiom/model/dirichlet.hpp"
#include "axiom/model/niw.hpp"

namespace axiom::model {

// Identity Mixture Model: NIW mixture over the 5-D (color, extent) features
// of gated slots, assigning each slot a discrete type shared across
// instances. The feature mask marginalizes dimensions out of the E-step
// density (identity remap across color perturbations); M-step statistics
// stay full-dimensional.
class Imm {
public:
    static constexpr int kFeat = 5;

    explicit Imm(const Config& cfg);

    int types_in_use() const { return static_cast<int>(comps_.size()); }
    int capacity() const { return cfg_.max_types; }

    double expected_loglik(int v, const double f[kFeat]) const;
    void e_step(const double f[kFeat], std::vector<double>& gamma) const;
    int argmax_type(const double f[kFeat]) const;

    struct Item {
        std::array<double, kFeat> f;
        double weight;  // slot gate
    };
    // Expansion + E + M over one frame's gated slot features.
    void process(const std::vector<Item>& batch, bool learn, std::vector<int>* types_out);

    void set_feature_mask(const std::array<bool, kFeat>& mask);
    const std::array<bool, kFeat>& feature_mask() const { return mask_; }

    const Niw& component(int v) const { return comps_[static_cast<std::size_t>(v)]; }
    double mixing_count(int v) const { return mixing_.count(v); }

    void save(core::SectionWriter& w) const;
    void load(core::SectionReader& r);

private:
    friend struct ImmExpandHandle;

    void refresh_batch(const std::vector<Item>& batch);
    void m_step(const std::vector<Item>& batch);

    Config cfg_;
    std::array<bool, kFeat> mask_;
    std::vector<int> mask_dims_;
    std::vector<Niw> comps_;
    StickMixing mixing_;

    // frame scratch
    std::vector<double> scores_;  // [item][comp] expected log-lik
    std::vector<double> resp_;    // [item][comp] responsibilities
    std::vector<Niw> comp_snap_;
    std::vector<double> mix_snap_;
    bool fresh_ = false;
};

}  // namespace axiom::model
