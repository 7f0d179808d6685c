#pragma once

#include <cstdint>
#include <vector>

#include "semistable/linalg.hpp"

namespace testutil {

// Deterministic PRNG (splitmix64); identical sequences on every platform.
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    // Uniform in [lo, hi] inclusive.
    long pick(long lo, long hi) { return lo + static_cast<long>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
};

inline semistable::IntMat random_matrix(Rng& rng, std::size_t rows, std::size_t cols, long lo, long hi) {
    semistable::IntMat m(rows, cols);
    for (auto& x : m.data) x = rng.pick(lo, hi);
    return m;
}

inline semistable::IntVec vec(std::initializer_list<long> xs) {
    semistable::IntVec out;
    for (long x : xs) out.push_back(semistable::Int(x));
    return out;
}

inline semistable::RatVec rvec(std::initializer_list<const char*> xs) {
    semistable::RatVec out;
    for (const char* x : xs) out.push_back(semistable::parse_rat(x));
    return out;
}

inline semistable::IntMat mat(std::initializer_list<std::initializer_list<long>> rows) {
    std::vector<semistable::IntVec> rws;
    std::size_t cols = 0;
    for (const auto& r : rows) {
        rws.push_back(vec(r));
        cols = rws.back().size();
    }
    return semistable::IntMat::from_rows(rws, cols);
}

}  // namespace testutil
