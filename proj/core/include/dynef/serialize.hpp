#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dynef {

// Little-endian byte sinks/sources used by every on-disk format.

struct byte_writer {
    std::vector<uint8_t> bytes;

    void u8(uint8_t v) { bytes.push_back(v); }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(uint8_t(v >> (8 * i)));
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(uint8_t(v >> (8 * i)));
    }
    void magic(char const (&tag)[5]) {
        bytes.insert(bytes.end(), tag, tag + 4);
    }
    void words(std::vector<uint64_t> const& ws) {
        for (uint64_t w : ws) u64(w);
    }
};

struct byte_reader {
    uint8_t const* cur;
    uint8_t const* end;

    explicit byte_reader(std::vector<uint8_t> const& b)
        : cur(b.data()), end(b.data() + b.size()) {}

    void need(size_t k) const {
        if (size_t(end - cur) < k) throw std::runtime_error("truncated input");
    }
    uint8_t u8() {
        need(1);
        return *cur++;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(*cur++) << (8 * i);
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(*cur++) << (8 * i);
        return v;
    }
    void magic(char const (&tag)[5]) {
        need(4);
        if (std::memcmp(cur, tag, 4) != 0) throw std::runtime_error(std::string("bad magic, expected ") + tag);
        cur += 4;
    }
    void words(std::vector<uint64_t>& ws, uint64_t count) {
        ws.resize(count);
        for (uint64_t i = 0; i != count; ++i) ws[i] = u64();
    }
    bool exhausted() const { return cur == end; }
};

inline void write_file(std::string const& path, std::vector<uint8_t> const& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(reinterpret_cast<char const*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::vector<uint8_t> read_file(std::string const& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::streamsize size = in.tellg();
    in.seekg(0);
    std::vector<uint8_t> bytes(static_cast<size_t>(size));
    in.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!in) throw std::runtime_error("read failed: " + path);
    return bytes;
}

}  // namespace dynef
