#pragma once

#include "axiom/core/rng.hpp"
#include "axiom/model/rmm.hpp"

namespace axiom::model {

struct BmrReport {
    int components_before = 0;
    int merges_tested = 0;
    int merges_accepted = 0;
    int components_after = 0;
};

// Bayesian model reduction of the rMM: draw data from the model by ancestral
// sampling, rank candidate pairs by mutual expected log-likelihood, and
// greedily accept merges whose restricted ELBO (reward and switch multinomial
// factors only, fit on the samples plus KL-to-prior complexity) does not
// decrease. Accepted merges pool natural parameters as eta1 + eta2 - eta_prior.
BmrReport bmr_reduce(Rmm& rmm, core::Rng rng);

}  // namespace axiom::model
