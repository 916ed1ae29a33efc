#pragma once

#include <string>

#include "axiom/gameworld/gameworld.hpp"

namespace axiom::gw {

// Binary PPM: "P6 160 210 255" header followed by raw RGB rows.
void write_ppm(const Frame& frame, const std::string& path);
Frame read_ppm(const std::string& path);

// Append-style record file helper: one line per step, tab separated
// step, action, reward, frame-hash (FNV-1a of the pixel bytes, hex).
std::string record_line(int64_t step, int action, int reward, uint64_t frame_hash);

}  // namespace axiom::gw
