#pragma once

#include <map>
#include <string>

#include "axiom/model/config.hpp"

namespace axiom::agent {

// Flat key=value configuration with section dots (planner.horizon=32).
// Precedence is handled by the caller: built-in defaults, then file values,
// then CLI overrides; the merged result echoes back via canonical_config.
std::map<std::string, std::string> parse_kv_file(const std::string& path);
std::map<std::string, std::string> parse_kv_text(const std::string& text);

// Applies known keys onto cfg; throws on unknown keys or unparsable values.
void apply_config_kv(model::Config& cfg, const std::map<std::string, std::string>& kv);

// Canonical echo of every tunable, sorted by key, one per line, with
// optional run-level extras prepended (game, steps, seed, ...).
std::string canonical_config(const model::Config& cfg,
                             const std::map<std::string, std::string>& extras = {});

}  // namespace axiom::agent
