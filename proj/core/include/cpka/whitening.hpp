#pragma once

#include <optional>

#include "cpka/signal_model.hpp"

namespace cpka {

struct WhiteningResult {
    DataMatrix z;       // N' x L, (1/L) Z Z^H = I
    CMatrix v;          // N' x N
    CVector mean;       // length N
    int kept_dims = 0;
    RVector eigenvalues;  // all N covariance eigenvalues, descending
};

DataMatrix center(const DataMatrix& x);

// Eigen-decomposition whitening, V = diag(lambda)^(-1/2) U^H over the
// n_keep dominant eigenpairs. Each eigenvector is phase-fixed so its
// largest-magnitude entry is real positive. Real input yields a real V.
WhiteningResult whiten(const DataMatrix& x, std::optional<int> n_keep = std::nullopt);

// Number of eigenvalues above `ratio` times the largest one.
int dominant_rank(const RVector& eigenvalues_desc, double ratio);

bool is_real_matrix(const CMatrix& m, double tol = 0.0);

}  // namespace cpka
