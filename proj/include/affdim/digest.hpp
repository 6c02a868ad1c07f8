#pragma once

// FNV-1a provenance digests. Every reported number carries the hex digest of
// the inputs that produced it, so reports can be traced and diffed.

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace affdim {

class Digest {
public:
    Digest& bytes(const void* data, std::size_t n) {
        auto p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            hash_ ^= p[i];
            hash_ *= 0x100000001B3ULL;
        }
        return *this;
    }

    Digest& add(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        return bytes(&bits, sizeof bits);
    }
    Digest& add(std::uint64_t v) { return bytes(&v, sizeof v); }
    Digest& add(std::int64_t v) { return bytes(&v, sizeof v); }
    Digest& add(int v) { return add(static_cast<std::int64_t>(v)); }
    Digest& add(const std::string& s) { return bytes(s.data(), s.size()); }
    Digest& add(const std::vector<double>& v) {
        for (double x : v) add(x);
        return *this;
    }

    std::uint64_t value() const { return hash_; }

    std::string hex() const {
        static const char* digits = "0123456789abcdef";
        std::string out(16, '0');
        std::uint64_t h = hash_;
        for (int i = 15; i >= 0; --i) {
            out[static_cast<std::size_t>(i)] = digits[h & 0xF];
            h >>= 4;
        }
        return out;
    }

private:
    std::uint64_t hash_ = 0xCBF29CE484222325ULL;
};

}  // namespace affdim
