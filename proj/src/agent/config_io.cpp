#include "axiom/agent/config_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace axiom::agent {

namespace {

struct Entry {
    const char* key;
    std::function<void(model::Config&, const std::string&)> set;
    std::function<std::string(const model::Config&)> get;
};

std::string fmt_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double to_double(const std::string& s) {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("bad number: " + s);
    return v;
}

int to_int(const std::string& s) {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("bad integer: " + s);
    return v;
}

bool to_bool(const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw std::invalid_argument("bad bool: " + s);
}

#define F64(name, field)                                                             \
    Entry { name, [](model::Config& c, const std::string& v) { c.field = to_double(v); }, \
            [](const model::Config& c) { return fmt_double(c.field); } }
#define I32(name, field)                                                          \
    Entry { name, [](model::Config& c, const std::string& v) { c.field = to_int(v); }, \
            [](const model::Config& c) { return std::to_string(c.field); } }
#define BOOLF(name, field)                                                          \
    Entry { name, [](model::Config& c, const std::string& v) { c.field = to_bool(v); }, \
            [](const model::Config& c) { return c.field ? std::string("true") : std::string("false"); } }

const std::vector<Entry>& entries() {
    static const std::vector<Entry> e = {
        I32("smm.max_slots", max_slots),
        F64("smm.tau", tau_smm),
        F64("smm.alpha0", alpha0_smm),
        F64("smm.gamma0_color", gamma0_color),
        F64("smm.color_rate0", color_rate0),
        F64("smm.extent_floor", extent_floor),
        F64("smm.extent_init_px", extent_init_px),
        F64("smm.slot_prior_prec", slot_prior_prec),
        I32("smm.dead_recycle_after", dead_recycle_after),
        F64("smm.color_warm_shape", color_warm_shape),
        F64("smm.color_warm_rate", color_warm_rate),
        F64("smm.extent_prior_strength", extent_prior_strength),
        F64("gates.phi_np_p", phi_np_p),
        F64("gates.phi_p_np", phi_p_np),
        F64("gates.zeta", zeta),
        F64("gates.lambda_move", lambda_move),
        F64("gates.beta_move", beta_move),
        F64("gates.nu_u", nu_u),
        F64("gates.eps_active", eps_active),
        F64("gates.gate_threshold", gate_threshold),
        I32("gates.min_track_age", min_track_age),
        F64("gates.r_min", r_min),
        BOOLF("rmm.fixed_distance", fixed_distance),
        F64("rmm.fixed_r", fixed_r),
        I32("imm.max_types", max_types),
        F64("imm.tau", tau_imm),
        F64("imm.alpha0", alpha0_imm),
        F64("imm.kappa0", imm_kappa0),
        F64("imm.u0", imm_u0),
        F64("imm.n0", imm_n0),
        F64("imm.color_scale", imm_color_scale),
        F64("imm.extent_scale", imm_extent_scale),
        I32("tmm.max_modes", max_modes),
        F64("tmm.tau", tau_tmm),
        F64("tmm.alpha0", alpha0_tmm),
        F64("tmm.noise", tmm_noise),
        I32("rmm.max_components", max_components),
        F64("rmm.tau", tau_rmm),
        F64("rmm.alpha0", alpha0_rmm),
        F64("rmm.kappa0", rmm_kappa0),
        F64("rmm.u0", rmm_u0),
        F64("rmm.n0", rmm_n0),
        F64("rmm.a0_type", a0_type),
        F64("rmm.a0_interacting", a0_interacting),
        F64("rmm.a0_assign", a0_assign),
        F64("rmm.a0_switch", a0_switch),
        F64("rmm.a0_action", a0_action),
        F64("rmm.a0_reward", a0_reward),
        I32("expand.max_steps", expand_steps),
        I32("bmr.interval", bmr_interval),
        I32("bmr.pairs", bmr_pairs),
        I32("bmr.samples", bmr_samples),
        BOOLF("bmr.disabled", no_bmr),
        F64("learn.rho", rho),
        I32("planner.horizon", horizon),
        I32("planner.policies", policies),
        I32("planner.samples", samples),
        F64("planner.ig_weight", ig_weight),
        F64("planner.discount", discount),
        F64("planner.topk_ratio", topk_ratio),
        F64("planner.random_ratio", random_ratio),
        F64("planner.temperature", temperature),
        F64("planner.alpha_smooth", alpha_smooth),
        F64("planner.walk_repeat", walk_repeat),
    };
    return e;
}

#undef F64
#undef I32
#undef BOOLF

}  // namespace

std::map<std::string, std::string> parse_kv_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = strip(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config line missing '=': " + line);
        kv[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
    }
    return kv;
}

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_kv_text(ss.str());
}

void apply_config_kv(model::Config& cfg, const std::map<std::string, std::string>& kv) {
    for (const auto& [key, value] : kv) {
        bool found = false;
        for (const auto& e : entries()) {
            if (key == e.key) {
                e.set(cfg, value);
                found = true;
                break;
            }
        }
        if (!found) throw std::invalid_argument("unknown config key: " + key);
    }
}

std::string canonical_config(const model::Config& cfg,
                             const std::map<std::string, std::string>& extras) {
    std::map<std::string, std::string> all;
    for (const auto& e : entries()) all[e.key] = e.get(cfg);
    for (const auto& [k, v] : extras) all["run." + k] = v;
    std::string out;
    for (const auto& [k, v] : all) out += k + "=" + v + "\n";
    return out;
}

}  // namespace axiom::agent
