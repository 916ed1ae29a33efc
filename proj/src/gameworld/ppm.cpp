#include "axiom/gameworld/ppm.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace axiom::gw {

void write_ppm(const Frame& frame, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "P6\n" << kW << " " << kH << "\n255\n";
    f.write(reinterpret_cast<const char*>(frame.px.data()),
            static_cast<std::streamsize>(frame.px.size()));
}

Frame read_ppm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string magic;
    int w = 0, h = 0, maxv = 0;
    f >> magic >> w >> h >> maxv;
    if (magic != "P6" || w != kW || h != kH || maxv != 255)
        throw std::runtime_error("bad PPM header in " + path);
    f.get();  // single whitespace after header
    Frame frame;
    f.read(reinterpret_cast<char*>(frame.px.data()), static_cast<std::streamsize>(frame.px.size()));
    if (!f) throw std::runtime_error("truncated PPM " + path);
    return frame;
}

std::string record_line(int64_t step, int action, int reward, uint64_t frame_hash) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%" PRId64 "\t%d\t%d\t%016" PRIx64, step, action, reward,
                  frame_hash);
    return buf;
}

}  // namespace axiom::gw
