#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace seats {

/// Shortest round-trip decimal form of a double (same value on re-parse).
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

inline double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// splitmix64; used to derive independent per-purpose seeds so that no
// RNG state has to be persisted for replay.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt_a, std::uint64_t salt_b = 0) {
    return splitmix64(splitmix64(seed ^ splitmix64(salt_a)) ^ splitmix64(salt_b));
}

inline std::string trim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return "";
    auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            out.emplace_back(text.substr(start));
            break;
        }
        out.emplace_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return out;
}

/// Keeps at most `cap` trailing bytes of a growing stream.
class TailBuffer {
  public:
    explicit TailBuffer(std::size_t cap) : cap_(cap) {}

    void append(const char* data, std::size_t n) {
        if (n >= cap_) {
            buf_.assign(data + (n - cap_), data + n);
            return;
        }
        if (buf_.size() + n > cap_) buf_.erase(0, buf_.size() + n - cap_);
        buf_.append(data, n);
    }

    const std::string& str() const { return buf_; }

  private:
    std::size_t cap_;
    std::string buf_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, std::string_view content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + p.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write: " + p.string());
}

} // namespace seats
