#pragma once

#include <cmath>

#include "cpka/types.hpp"
#include "cpka/whitening.hpp"

namespace testutil {

inline cpka::CMatrix random_complex(int rows, int cols, std::uint64_t seed) {
    cpka::Rng rng(seed);
    cpka::CMatrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = rng.cnormal();
    return m;
}

inline cpka::CMatrix random_real(int rows, int cols, std::uint64_t seed) {
    cpka::Rng rng(seed);
    cpka::CMatrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = rng.normal();
    return m;
}

// uniform-ish non-Gaussian real sources, whitened
inline cpka::CMatrix whitened(const cpka::CMatrix& x) {
    return cpka::whiten(cpka::DataMatrix{x, 1.0}).z.x;
}

inline cpka::CVector random_unit(int n, std::uint64_t seed, bool complex = true) {
    cpka::Rng rng(seed);
    cpka::CVector w(n);
    for (int i = 0; i < n; ++i) w(i) = complex ? rng.cnormal() : cpka::cd(rng.normal(), 0.0);
    return w / w.norm();
}

// Brute-force definition, no symmetry tricks.
inline cpka::cd brute_moment(const cpka::CMatrix& z, int a, int b, int c, int d) {
    cpka::cd s = 0;
    for (Eigen::Index j = 0; j < z.cols(); ++j)
        s += z(a, j) * std::conj(z(b, j)) * z(c, j) * std::conj(z(d, j));
    return s / static_cast<double>(z.cols());
}

inline double direct_kurt(const cpka::CMatrix& z, const cpka::CVector& w) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        const double m = std::norm(w.dot(z.col(j)));
        s += m * m;
    }
    return s / static_cast<double>(z.cols());
}

}  // namespace testutil
