#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace axiom::core {

// Versioned binary container: magic "AXCK", format version, section table,
// little-endian payloads, CRC32 per section. Numeric payloads are 64-bit
// floats / integers appended through the typed put/get helpers.

uint32_t crc32(const uint8_t* data, std::size_t n, uint32_t seed = 0);

class SectionWriter {
public:
    void put_f64(double v);
    void put_u64(uint64_t v);
    void put_i64(int64_t v);
    void put_u8(uint8_t v) { bytes_.push_back(v); }
    void put_f64s(const double* v, std::size_t n);
    void put_bytes(const uint8_t* v, std::size_t n);

    const std::vector<uint8_t>& bytes() const { return bytes_; }

private:
    std::vector<uint8_t> bytes_;
};

class SectionReader {
public:
    explicit SectionReader(std::vector<uint8_t> bytes) : bytes_(std::move(bytes)) {}

    double get_f64();
    uint64_t get_u64();
    int64_t get_i64();
    uint8_t get_u8();
    void get_f64s(double* v, std::size_t n);
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    std::vector<uint8_t> bytes_;
    std::size_t pos_ = 0;
};

class Checkpoint {
public:
    // Section names are at most 8 bytes ("smm", "imm", "tmm", "rmm",
    // "gates", "harness", ...).
    void add_section(const std::string& name, SectionWriter w);
    bool has_section(const std::string& name) const;
    SectionReader section(const std::string& name) const;
    std::vector<std::string> section_names() const;

    void save(const std::string& path) const;
    // Throws std::runtime_error on bad magic, version mismatch or CRC failure.
    static Checkpoint load(const std::string& path);

    std::vector<uint8_t> serialize() const;
    static Checkpoint deserialize(const std::vector<uint8_t>& bytes);

private:
    std::vector<std::pair<std::string, std::vector<uint8_t>>> sections_;
};

}  // namespace axiom::core
