#include "axiom/core/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace axiom::core {

namespace {

constexpr char kMagic[4] = {'A', 'X', 'C', 'K'};
constexpr uint32_t kVersion = 1;

std::array<uint32_t, 256> make_crc_table() {
    std::array<uint32_t, 256> t{};
    for (uint32_t i = 0; i < 256; ++i) {
        uint32_t c = i;
        for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
        t[i] = c;
    }
    return t;
}

void append_le(std::vector<uint8_t>& out, uint64_t v, int nbytes) {
    for (int i = 0; i < nbytes; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

uint64_t read_le(const std::vector<uint8_t>& in, std::size_t& pos, int nbytes) {
    uint64_t v = 0;
    if (pos + nbytes > in.size()) throw std::runtime_error("checkpoint: truncated");
    for (int i = 0; i < nbytes; ++i) v |= static_cast<uint64_t>(in[pos + i]) << (8 * i);
    pos += nbytes;
    return v;
}

}  // namespace

uint32_t crc32(const uint8_t* data, std::size_t n, uint32_t seed) {
    static const std::array<uint32_t, 256> table = make_crc_table();
    uint32_t c = seed ^ 0xFFFFFFFFu;
    for (std::size_t i = 0; i < n; ++i) c = table[(c ^ data[i]) & 0xff] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

void SectionWriter::put_f64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    append_le(bytes_, bits, 8);
}

void SectionWriter::put_u64(uint64_t v) { append_le(bytes_, v, 8); }
void SectionWriter::put_i64(int64_t v) { append_le(bytes_, static_cast<uint64_t>(v), 8); }

void SectionWriter::put_f64s(const double* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) put_f64(v[i]);
}

void SectionWriter::put_bytes(const uint8_t* v, std::size_t n) {
    bytes_.insert(bytes_.end(), v, v + n);
}

double SectionReader::get_f64() {
    uint64_t bits = get_u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

uint64_t SectionReader::get_u64() { return read_le(bytes_, pos_, 8); }
int64_t SectionReader::get_i64() { return static_cast<int64_t>(get_u64()); }

uint8_t SectionReader::get_u8() {
    if (pos_ >= bytes_.size()) throw std::runtime_error("checkpoint: truncated");
    return bytes_[pos_++];
}

void SectionReader::get_f64s(double* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) v[i] = get_f64();
}

void Checkpoint::add_section(const std::string& name, SectionWriter w) {
    if (name.empty() || name.size() > 8) throw std::runtime_error("checkpoint: bad section name");
    sections_.emplace_back(name, w.bytes());
}

bool Checkpoint::has_section(const std::string& name) const {
    for (const auto& s : sections_)
        if (s.first == name) return true;
    return false;
}

SectionReader Checkpoint::section(const std::string& name) const {
    for (const auto& s : sections_)
        if (s.first == name) return SectionReader(s.second);
    throw std::runtime_error("checkpoint: missing section " + name);
}

std::vector<std::string> Checkpoint::section_names() const {
    std::vector<std::string> names;
    for (const auto& s : sections_) names.push_back(s.first);
    return names;
}

std::vector<uint8_t> Checkpoint::serialize() const {
    std::vector<uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    append_le(out, kVersion, 4);
    append_le(out, sections_.size(), 4);
    for (const auto& [name, payload] : sections_) {
        char tag[8] = {0};
        std::memcpy(tag, name.data(), name.size());
        out.insert(out.end(), tag, tag + 8);
        append_le(out, payload.size(), 8);
        append_le(out, crc32(payload.data(), payload.size()), 4);
        out.insert(out.end(), payload.begin(), payload.end());
    }
    return out;
}

Checkpoint Checkpoint::deserialize(const std::vector<uint8_t>& bytes) {
    std::size_t pos = 0;
    if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw std::runtime_error("checkpoint: bad magic");
    pos = 4;
    const uint32_t version = static_cast<uint32_t>(read_le(bytes, pos, 4));
    if (version != kVersion) throw std::runtime_error("checkpoint: version mismatch");
    const uint32_t count = static_cast<uint32_t>(read_le(bytes, pos, 4));
    Checkpoint ck;
    for (uint32_t i = 0; i < count; ++i) {
        if (pos + 8 > bytes.size()) throw std::runtime_error("checkpoint: truncated");
        char tag[9] = {0};
        std::memcpy(tag, bytes.data() + pos, 8);
        pos += 8;
        const uint64_t size = read_le(bytes, pos, 8);
        const uint32_t crc = static_cast<uint32_t>(read_le(bytes, pos, 4));
        if (pos + size > bytes.size()) throw std::runtime_error("checkpoint: truncated");
        std::vector<uint8_t> payload(bytes.begin() + pos, bytes.begin() + pos + size);
        pos += size;
        if (crc32(payload.data(), payload.size()) != crc)
            throw std::runtime_error(std::string("checkpoint: CRC mismatch in section ") + tag);
        ck.sections_.emplace_back(tag, std::move(payload));
    }
    return ck;
}

void Checkpoint::save(const std::string& path) const {
    const auto bytes = serialize();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("checkpoint: write failed " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

}  // namespace axiom::core
