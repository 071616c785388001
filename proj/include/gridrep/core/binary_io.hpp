#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridrep/error.hpp"

namespace gridrep::binio {

// Little-endian encoders/decoders for the model and feature file formats.

class Writer {
public:
    void magic(std::string_view m) { bytes_.insert(bytes_.end(), m.begin(), m.end()); }

    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }

    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    void f64s(std::span<const double> vs) {
        for (double v : vs) f64(v);
    }

    void text(std::string_view s) {
        u64(s.size());
        bytes_.insert(bytes_.end(), s.begin(), s.end());
    }

    const std::vector<char>& bytes() const { return bytes_; }

private:
    std::vector<char> bytes_;
};

class Reader {
public:
    Reader(std::span<const char> bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

    void expect_magic(std::string_view m) {
        need(m.size(), "magic");
        if (std::string_view(bytes_.data() + pos_, m.size()) != m) {
            throw FormatError(what_ + ": bad magic, expected \"" + std::string(m) + "\"");
        }
        pos_ += m.size();
    }

    std::uint64_t u64() {
        need(8, "u64 field");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    std::vector<double> f64s(std::uint64_t count) {
        if (count > remaining() / 8) throw FormatError(what_ + ": truncated payload (need " + std::to_string(count) + " reals)");
        std::vector<double> out(count);
        for (auto& v : out) v = f64();
        return out;
    }

    std::string text() {
        const std::uint64_t n = u64();
        need(n, "text block");
        std::string s(bytes_.data() + pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }

    void expect_end() const {
        if (remaining() != 0) throw FormatError(what_ + ": " + std::to_string(remaining()) + " trailing bytes");
    }

private:
    void need(std::uint64_t n, const char* field) const {
        if (n > remaining()) throw FormatError(what_ + ": truncated " + field);
    }

    std::span<const char> bytes_;
    std::size_t pos_ = 0;
    std::string what_;
};

std::vector<char> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const char> bytes);

}  // namespace gridrep::binio
