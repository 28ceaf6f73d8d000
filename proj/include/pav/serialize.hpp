#pragma once

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace pav {

// Little-endian, length-prefixed binary encoding used by every component.
class Writer {
public:
    void u64(std::uint64_t x) {
        char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((x >> (8 * i)) & 0xff);
        buf_.append(b, 8);
    }
    void bytes(const std::string& s) {
        u64(s.size());
        buf_ += s;
    }
    template <class T>
    void vec(const std::vector<T>& v) {
        static_assert(std::is_integral_v<T>);
        u64(v.size());
        for (T x : v) u64(static_cast<std::uint64_t>(x));
    }
    // Compact variant for wide arrays of small integers.
    template <class T>
    void raw(const std::vector<T>& v) {
        static_assert(std::is_integral_v<T>);
        u64(v.size());
        buf_.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(T));
    }
    const std::string& str() const { return buf_; }
    std::string take() { return std::move(buf_); }

private:
    std::string buf_;
};

class Reader {
public:
    explicit Reader(const std::string& s) : s_(s) {}
    std::uint64_t u64() {
        need(8);
        std::uint64_t x = 0;
        for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(static_cast<unsigned char>(s_[p_ + i])) << (8 * i);
        p_ += 8;
        return x;
    }
    std::string bytes() {
        std::uint64_t n = u64();
        need(n);
        std::string r = s_.substr(p_, n);
        p_ += n;
        return r;
    }
    template <class T>
    std::vector<T> vec() {
        std::uint64_t n = u64();
        if (n > (s_.size() - p_) / 8) throw std::runtime_error("corrupt index: vector length");
        std::vector<T> v(n);
        for (auto& x : v) x = static_cast<T>(u64());
        return v;
    }
    template <class T>
    std::vector<T> raw() {
        std::uint64_t n = u64();
        if (n > (s_.size() - p_) / sizeof(T)) throw std::runtime_error("corrupt index: raw length");
        std::vector<T> v(n);
        std::memcpy(v.data(), s_.data() + p_, n * sizeof(T));
        p_ += n * sizeof(T);
        return v;
    }
    bool done() const { return p_ == s_.size(); }

private:
    void need(std::uint64_t n) {
        if (n > s_.size() - p_) throw std::runtime_error("corrupt index: truncated");
    }
    const std::string& s_;
    size_t p_ = 0;
};

}  // namespace pav
