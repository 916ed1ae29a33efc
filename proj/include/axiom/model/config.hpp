#pragma once

namespace axiom::model {

// All tunables in one place. Defaults follow the hyperparameter table the
// agent was calibrated with; artifact-specific knobs are grouped at the end
// of each block.
struct Config {
    // --- slot mixture (pixels -> slots)
    int max_slots = 32;
    double tau_smm = 5.7;        // expansion threshold
    double alpha0_smm = 1.0;     // stick-breaking tail pseudocount
    double gamma0_color = 0.1;   // Gamma shape prior, per RGB channel
    double color_rate0 = 1.0;    // Gamma rate prior
    double extent_floor = 0.0125;  // 2/160 in normalized units
    double extent_init_px = 4.0;   // fresh-slot extent, pixels
    double slot_prior_prec = 1e-4;
    int dead_recycle_after = 25;  // frames of no assignment before a slot may be reused
    // Expansion seeds a new slot's color precision warm (E[prec] = 20, weak
    // strength) so the slot can claim its blob within one pass; the cold
    // Gamma prior (shape 0.1) cannot explain even an exact color match and
    // would spawn clone slots instead.
    double color_warm_shape = 5.0;
    double color_warm_rate = 0.25;
    // Pseudo-observations backing a fresh slot's extent so one hard-assigned
    // pixel cannot collapse it to the floor before the slot claims its blob.
    double extent_prior_strength = 25.0;

    // --- presence / moving / unused gating
    double phi_np_p = 0.0;
    double phi_p_np = 0.01;
    double zeta = 0.01;  // EP damping for the presence correction
    double lambda_move = 0.99;
    double beta_move = 0.01;
    double nu_u = 0.05;
    double eps_active = 1.0;
    double gate_threshold = 0.5;
    int min_track_age = 3;  // frames a slot must exist before feeding dynamics
    double r_min = 0.075;
    bool fixed_distance = false;  // ablation: displacement dropped from rMM features
    double fixed_r = 1.25;        // interaction radius while in fixed-distance mode

    // --- identity mixture
    int max_types = 32;
    double tau_imm = -100.0;
    double alpha0_imm = 1e-4;
    double imm_kappa0 = 1e-4;
    double imm_u0 = 0.25;  // U0 = imm_u0 * I5
    double imm_n0 = 11.0;
    // Identity features are (color, extent) rescaled to byte / quarter-pixel
    // units; at that scale the 1/4 I5 scale prior separates palette colors
    // in a handful of observations while tolerating shape jitter.
    double imm_color_scale = 255.0;
    double imm_extent_scale = 0.25;  // multiplies the pixel-unit extent

    // --- transition mixture
    int max_modes = 500;
    double tau_tmm = -1e-5;
    double alpha0_tmm = 0.1;
    double tmm_noise = 2.0;  // isotropic covariance scale, normalized latent units

    // --- recurrent mixture
    int max_components = 5000;
    double tau_rmm = -10.0;
    double alpha0_rmm = 0.1;
    double rmm_kappa0 = 1e-4;
    // The component scale prior is quoted as 625*I7 on the precision's
    // Wishart scale; the additive inverse-scale parameter is its inverse.
    // Fresh components then cover ~a sprite-width of context space, which is
    // what makes tau_rmm = -10 a meaningful novelty threshold.
    double rmm_u0 = 1.0 / 625.0;
    double rmm_n0 = 15.0;
    double a0_type = 1e-4;
    double a0_interacting = 1e-4;
    double a0_assign = 1e-4;
    double a0_switch = 1e-4;
    double a0_action = 1e-4;
    double a0_reward = 1.0;

    // --- structure learning
    int expand_steps = 10;  // max expansion iterations per batch
    int bmr_interval = 500;
    int bmr_pairs = 2000;
    int bmr_samples = 2000;
    bool no_bmr = false;

    // --- learning mode: 0 accumulates natural parameters across frames
    // (exact streaming conjugate update); a value in (0,1] blends toward
    // prior + current-frame statistics at that rate instead.
    double rho = 0.0;

    // --- planner
    int horizon = 32;
    int policies = 512;
    int samples = 3;
    double ig_weight = 0.1;
    double discount = 0.99;
    double topk_ratio = 0.1;
    double random_ratio = 0.5;
    double temperature = 10.0;
    double alpha_smooth = 1.0;
    double walk_repeat = 0.8;  // smoothed random walk: keep previous action w.p. 0.8

    // Normalized-position delta -> pixels-per-frame velocity conversion,
    // (W-1)/2 and (H-1)/2 for the 160x210 frame.
    double vel_scale_x = 79.5;
    double vel_scale_y = 104.5;
};

}  // namespace axiom::model
