#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "cpka/signal_model.hpp"
#include "cpka/tensor.hpp"

namespace cpka {

enum class Direction { Ascent, Descent };

const char* to_string(Direction d);
Direction direction_from_string(const std::string& s);

struct PkaConfig {
    double alpha = 1e-2;
    Direction direction = Direction::Ascent;
    double tol = 1e-9;  // on the phase-aligned update norm
    int max_iter = 5000;
    int max_restarts = 20;
    double det_floor = 1e-12;
    std::uint64_t rng_seed = 0;
    // a run is accepted when ||Cw^3 - lambda w|| <= restart_residual * ||Cw^3||
    double restart_residual = 1e-6;
};

struct VectorDiagnostics {
    int iterations = 0;
    double residual = 0.0;
    int restarts = 0;
    bool converged = false;
};

struct UnmixingMatrix {
    CMatrix w;  // columns are unit-norm extraction vectors
    std::string algorithm;
    std::vector<VectorDiagnostics> diagnostics;
    // per-sweep off-diagonal energy (JADE only)
    std::vector<double> objective_history;

    Eigen::Index size() const { return w.cols(); }
    bool converged() const;
    double volume() const { return std::abs((w.adjoint() * w).determinant()); }
};

// Raised when the restart budget runs out. Carries the best pair seen.
class PkaError : public std::runtime_error {
public:
    PkaError(const std::string& what, EigenPair best, VectorDiagnostics diag)
        : std::runtime_error(what), best_(std::move(best)), diag_(diag) {}
    const EigenPair& best() const { return best_; }
    const VectorDiagnostics& diagnostics() const { return diag_; }
private:
    EigenPair best_;
    VectorDiagnostics diag_;
};

// Raised by pka() when any vector failed; partial() holds every column
// (failed ones filled with their best pair) and the per-vector flags.
class PkaIncomplete : public std::runtime_error {
public:
    PkaIncomplete(const std::string& what, UnmixingMatrix partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const UnmixingMatrix& partial() const { return partial_; }
private:
    UnmixingMatrix partial_;
};

// min over phi of ||b - e^{i phi} a||
double aligned_distance(const CVector& a, const CVector& b);

// Scale so the largest-magnitude entry is real positive.
CVector fix_phase(const CVector& w);

// One Riemannian step of the volume-constrained update.
CVector pka_step(const FourthOrderTensor& t, const std::vector<CVector>& w_prev, const CVector& w,
                 const PkaConfig& cfg);

// One plain fixed-point step, Cw^3 / ||Cw^3||.
CVector fixed_point_step(const FourthOrderTensor& t, const CVector& w);

// Iterate pka_step from `w0` until the aligned step falls below cfg.tol.
// Returns the final vector; `iterations` receives the count and `stopped`
// whether the tolerance was met.
CVector pka_iterate(const FourthOrderTensor& t, const std::vector<CVector>& w_prev, CVector w0,
                    const PkaConfig& cfg, int* iterations = nullptr, bool* stopped = nullptr);

EigenPair pka_extract(const FourthOrderTensor& t, const std::vector<CVector>& w_prev, const PkaConfig& cfg,
                      VectorDiagnostics* diag = nullptr);

UnmixingMatrix pka(const FourthOrderTensor& t, int n_sources, const PkaConfig& cfg);

struct DeflationConfig {
    double tol = 1e-10;
    int max_iter = 5000;
    int max_restarts = 20;
    std::uint64_t rng_seed = 0;
    Direction direction = Direction::Ascent;
};

// w <- P Cw^3 / ||.|| with P the projector onto the complement of the
// previous vectors. Descent uses the shifted map w <- P (sigma w - Cw^3),
// sigma = sum_ab c_aabb.
UnmixingMatrix fixed_point_deflation(const FourthOrderTensor& t, int n_sources, const DeflationConfig& cfg);

// Kurtosis fixed point w <- P (Cw^3 - beta w), beta = 2 for circular
// complex data and 3 for real data.
UnmixingMatrix cfastica(const FourthOrderTensor& t, int n_sources, const DeflationConfig& cfg);
UnmixingMatrix cfastica(const CMatrix& z, int n_sources, const DeflationConfig& cfg);

// w <- P S x_2 w x_3 w / ||.||, real vectors.
UnmixingMatrix psa(const ThirdOrderTensor& s, int n_sources, const DeflationConfig& cfg);

struct JadeConfig {
    double angle_tol = 1e-8;
    int max_sweeps = 100;
};

UnmixingMatrix jade(const CMatrix& z, int n_sources, const JadeConfig& cfg = {});

// Row k is w_k^H z.
SourceSet unmix(const UnmixingMatrix& w, const DataMatrix& z);

}  // namespace cpka
