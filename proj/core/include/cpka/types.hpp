#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cpka {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

// Numerical-rank shortfall while whitening.
class RankError : public std::runtime_error {
public:
    RankError(const std::string& what, int rank) : std::runtime_error(what), rank_(rank) {}
    int rank() const { return rank_; }
private:
    int rank_;
};

// Tensor would exceed the configured memory cap.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A pre-condition on the argument (dimension, range, aliasing).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Seeded generator shared by every stochastic routine. Sequences are
// reproducible for a given standard library build.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    double normal() { return norm_(eng_); }

    // circular complex normal, E|z|^2 = 1
    cd cnormal() {
        const double re = normal();
        const double im = normal();
        return {re * M_SQRT1_2, im * M_SQRT1_2};
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
    std::normal_distribution<double> norm_{0.0, 1.0};
};

// Deterministic sub-seed derivation (splitmix64 finaliser).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace cpka

#include <functional>

namespace cpka {

// Non-fatal diagnostics (e.g. tensor built from data that is not white).
// Defaults to stderr; tests and tools may redirect.
using WarningHandler = std::function<void(const std::string&)>;
void set_warning_handler(WarningHandler h);
void warn(const std::string& msg);

}  // namespace cpka
