#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace survbal {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

// Bad inputs: malformed files, invalid configs, infeasible requests. CLI exit code 1.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values reached during optimization. CLI exit code 2.
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// splitmix64; used to derive independent seeds from (master, stream ids).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = splitmix64(master);
    for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
    return h;
}

}  // namespace survbal
