#pragma once

#include <cstdint>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace intweave {

template <class... Ts> struct overload : Ts... { using Ts::operator()...; };
template <class... Ts> overload(Ts...) -> overload<Ts...>;

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : Error {
    int line, column;
    ParseError(const std::string& msg, int l, int c)
        : Error("parse error at " + std::to_string(l) + ":" + std::to_string(c) + ": " + msg),
          line(l), column(c) {}
};

struct TypeError : Error {
    using Error::Error;
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

// Deterministic 64-bit generator (splitmix64); used by all fuzzers and the corpus.
struct Rng {
    uint64_t state;
    explicit Rng(uint64_t seed) : state(seed) {}
    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    uint64_t below(uint64_t n) { return n == 0 ? 0 : next() % n; }
    bool chance(uint64_t num, uint64_t den) { return below(den) < num; }
};

template <typename T>
std::string join(const std::vector<T>& xs, const std::string& sep) {
    std::ostringstream out;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) out << sep;
        out << xs[i];
    }
    return out.str();
}

} // namespace intweave
