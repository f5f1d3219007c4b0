#include "cpka/separators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cpka {

const char* to_string(Direction d) { return d == Direction::Ascent ? "ascent" : "descent"; }

Direction direction_from_string(const std::string& s) {
    if (s == "ascent") return Direction::Ascent;
    if (s == "descent") return Direction::Descent;
    throw InputError("unknown direction '" + s + "' (expected ascent or descent)");
}

bool UnmixingMatrix::converged() const {
    return std::all_of(diagnostics.begin(), diagnostics.end(), [](const VectorDiagnostics& d) { return d.converged; });
}

double aligned_distance(const CVector& a, const CVector& b) {
    const cd ip = a.dot(b);
    const cd ph = std::abs(ip) > 0 ? ip / std::abs(ip) : cd(1.0);
    return (b - ph * a).norm();
}

CVector fix_phase(const CVector& w) {
    Eigen::Index imax = 0;
    w.cwiseAbs().maxCoeff(&imax);
    const double m = std::abs(w[imax]);
    if (m == 0) return w;
    return w * (std::conj(w[imax]) / m);
}

namespace {

CVector random_unit(Rng& rng, int n, bool real) {
    CVector w(n);
    for (int i = 0; i < n; ++i) w[i] = real ? cd(rng.normal(), 0.0) : cd(rng.normal(), rng.normal());
    return w / w.norm();
}

CMatrix stack(const std::vector<CVector>& cols, int n) {
    CMatrix m(n, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = cols[k];
    return m;
}

CMatrix complement_projector(const std::vector<CVector>& prev, int n) {
    CMatrix p = CMatrix::Identity(n, n);
    if (!prev.empty()) {
        const CMatrix w = stack(prev, n);
        p -= w * w.adjoint();
    }
    return p;
}

}  // namespace

CVector pka_step(const FourthOrderTensor& t, const std::vector<CVector>& w_prev, const CVector& w,
                 const PkaConfig& cfg) {
    const int n = t.dim();
    std::vector<CVector> cols = w_prev;
    cols.push_back(w);
    const CMatrix wk = stack(cols, n);
    const double vol = std::abs((wk.adjoint() * wk).determinant());
    const CVector g = contract3(t, w);
    const CVector rg = g - w * w.dot(g);
    const double sign = cfg.direction == Direction::Ascent ? 1.0 : -1.0;
    CVector next = w + (sign * cfg.alpha / std::max(vol, cfg.det_floor)) * rg;
    return next / next.norm();
}

CVector fixed_point_step(const FourthOrderTensor& t, const CVector& w) {
    const CVector g = contract3(t, w);
    return g / g.norm();
}

CVector pka_iterate(const FourthOrderTensor& t, const std::vector<CVector>& w_prev, CVector w,
                    const PkaConfig& cfg, int* iterations, bool* stopped) {
    bool met = false;
    int it = 0;
    for (; it < cfg.max_iter; ++it) {
        const CVector next = pka_step(t, w_prev, w, cfg);
        const double step = aligned_distance(w, next);
        w = next;
        if (step < cfg.tol) {
            met = true;
            ++it;
            break;
        }
    }
    if (iterations) *iterations = it;
    if (stopped) *stopped = met;
    return w;
}

EigenPair pka_extract(const FourthOrderTensor& t, const std::vector<CVector>& w_prev, const PkaConfig& cfg,
                      VectorDiagnostics* diag) {
    const int n = t.dim();
    if (static_cast<int>(w_prev.size()) >= n) throw InputError("pka_extract: already have N vectors");
    if (!(cfg.alpha > 0) || !(cfg.tol > 0) || !(cfg.det_floor > 0)) throw InputError("pka_extract: invalid config");
    if (n == 1) {
        EigenPair p = make_eigenpair(t, CVector::Ones(1));
        if (diag) *diag = {0, p.residual, 0, true};
        return p;
    }

    Rng rng(derive_seed(cfg.rng_seed, w_prev.size()));
    const bool real = t.real_valued();
    EigenPair best;
    VectorDiagnostics best_diag;
    best.residual = std::numeric_limits<double>::infinity();

    for (int attempt = 0; attempt <= cfg.max_restarts; ++attempt) {
        int iters = 0;
        bool stopped = false;
        const CVector w = pka_iterate(t, w_prev, random_unit(rng, n, real), cfg, &iters, &stopped);
        EigenPair p = make_eigenpair(t, fix_phase(w));
        // anomalies: a large residual, or a run that never settled within max_iter
        const bool ok = stopped && p.residual <= cfg.restart_residual;
        if (ok || p.residual < best.residual) {
            best = p;
            best_diag = {iters, p.residual, attempt, ok};
        }
        if (ok) {
            if (diag) *diag = best_diag;
            return best;
        }
    }
    best_diag.restarts = cfg.max_restarts;
    if (diag) *diag = best_diag;
    throw PkaError("pka_extract: restart budget exhausted, best residual " + std::to_string(best.residual), best,
                   best_diag);
}

UnmixingMatrix pka(const FourthOrderTensor& t, int n_sources, const PkaConfig& cfg) {
    const int n = t.dim();
    if (n_sources < 1 || n_sources > n) throw InputError("pka: n_sources out of range");
    UnmixingMatrix out;
    out.algorithm = "pka";
    out.w.resize(n, n_sources);
    std::vector<CVector> prev;
    int failed = 0;
    for (int k = 0; k < n_sources; ++k) {
        VectorDiagnostics d;
        EigenPair p;
        try {
            p = pka_extract(t, prev, cfg, &d);
        } catch (const PkaError& e) {
            p = e.best();
            d = e.diagnostics();
            ++failed;
        }
        out.w.col(k) = p.w;
        out.diagnostics.push_back(d);
        prev.push_back(p.w);
    }
    if (failed)
        throw PkaIncomplete("pka: " + std::to_string(failed) + " of " + std::to_string(n_sources) +
                                " vectors did not converge",
                            out);
    return out;
}

namespace {

enum class FixedPointKind { Plain, FastIca };

UnmixingMatrix deflate(const FourthOrderTensor& t, int n_sources, const DeflationConfig& cfg, FixedPointKind kind,
                       const char* name) {
    const int n = t.dim();
    if (n_sources < 1 || n_sources > n) throw InputError(std::string(name) + ": n_sources out of range");
    const bool real = t.real_valued();
    const bool descent = kind == FixedPointKind::Plain && cfg.direction == Direction::Descent;
    double sigma = 0.0;
    if (descent)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) sigma += t(a, a, b, b).real();
    const double beta = real ? 3.0 : 2.0;

    UnmixingMatrix out;
    out.algorithm = name;
    out.w.resize(n, n_sources);
    std::vector<CVector> prev;
    for (int k = 0; k < n_sources; ++k) {
        Rng rng(derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(k)));
        const CMatrix proj = complement_projector(prev, n);
        CVector best_w;
        VectorDiagnostics best_d;
        double best_step = std::numeric_limits<double>::infinity();
        for (int attempt = 0; attempt <= cfg.max_restarts; ++attempt) {
            CVector w = proj * random_unit(rng, n, real);
            w /= w.norm();
            double step = std::numeric_limits<double>::infinity();
            int it = 0;
            bool met = false;
            for (; it < cfg.max_iter; ++it) {
                CVector g = contract3(t, w);
                if (kind == FixedPointKind::FastIca) g -= beta * w;
                if (descent) g = sigma * w - g;
                CVector next = proj * g;
                const double nn = next.norm();
                if (!(nn > 1e-14)) break;
                next /= nn;
                step = aligned_distance(w, next);
                w = next;
                if (step < cfg.tol) {
                    met = true;
                    ++it;
                    break;
                }
            }
            if (met || step < best_step) {
                best_step = step;
                best_w = w;
                best_d = {it, make_eigenpair(t, w).residual, attempt, met};
            }
            if (met) break;
        }
        out.w.col(k) = fix_phase(best_w);
        out.diagnostics.push_back(best_d);
        prev.push_back(best_w);
    }
    return out;
}

}  // namespace

UnmixingMatrix fixed_point_deflation(const FourthOrderTensor& t, int n_sources, const DeflationConfig& cfg) {
    return deflate(t, n_sources, cfg, FixedPointKind::Plain, "deflation");
}

UnmixingMatrix cfastica(const FourthOrderTensor& t, int n_sources, const DeflationConfig& cfg) {
    return deflate(t, n_sources, cfg, FixedPointKind::FastIca, "cfastica");
}

UnmixingMatrix cfastica(const CMatrix& z, int n_sources, const DeflationConfig& cfg) {
    return cfastica(fourth_moment_tensor(z), n_sources, cfg);
}

UnmixingMatrix psa(const ThirdOrderTensor& s, int n_sources, const DeflationConfig& cfg) {
    const int n = s.dim();
    if (n_sources < 1 || n_sources > n) throw InputError("psa: n_sources out of range");
    UnmixingMatrix out;
    out.algorithm = "psa";
    out.w.resize(n, n_sources);
    RMatrix prev(n, 0);
    for (int k = 0; k < n_sources; ++k) {
        Rng rng(derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(k)));
        const RMatrix proj = RMatrix::Identity(n, n) - prev * prev.transpose();
        RVector best_w;
        VectorDiagnostics best_d;
        double best_step = std::numeric_limits<double>::infinity();
        for (int attempt = 0; attempt <= cfg.max_restarts; ++attempt) {
            RVector w(n);
            for (int i = 0; i < n; ++i) w[i] = rng.normal();
            w = proj * w;
            w /= w.norm();
            double step = std::numeric_limits<double>::infinity();
            int it = 0;
            bool met = false;
            for (; it < cfg.max_iter; ++it) {
                RVector next = proj * sw2(s, w);
                const double nn = next.norm();
                if (!(nn > 1e-14)) break;  // no skewness left in this direction
                next /= nn;
                step = std::min((next - w).norm(), (next + w).norm());
                w = next;
                if (step < cfg.tol) {
                    met = true;
                    ++it;
                    break;
                }
            }
            if (met || step < best_step || best_w.size() == 0) {
                best_step = step;
                best_w = w;
                const RVector g = sw2(s, w);
                const double lam = w.dot(g);
                const double gn = g.norm();
                best_d = {it, gn > 0 ? (g - lam * w).norm() / gn : 0.0, attempt, met};
            }
            if (met) break;
        }
        out.w.col(k) = fix_phase(best_w.cast<cd>());
        out.diagnostics.push_back(best_d);
        prev.conservativeResize(n, k + 1);
        prev.col(k) = best_w;
    }
    return out;
}

namespace {

double offdiag_energy(const std::vector<CMatrix>& ms) {
    double e = 0.0;
    for (const CMatrix& m : ms) e += m.cwiseAbs2().sum() - m.diagonal().cwiseAbs2().sum();
    return e;
}

}  // namespace

UnmixingMatrix jade(const CMatrix& z, int n_sources, const JadeConfig& cfg) {
    const int n = static_cast<int>(z.rows());
    if (n_sources < 1 || n_sources > n) throw InputError("jade: n_sources out of range");
    std::vector<CMatrix> ms = cumulant_matrices(z);
    CMatrix v = CMatrix::Identity(n, n);
    UnmixingMatrix out;
    out.algorithm = "jade";
    out.objective_history.push_back(offdiag_energy(ms));

    bool settled = false;
    int sweep = 0;
    for (; sweep < cfg.max_sweeps && !settled; ++sweep) {
        settled = true;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) {
                // 3 x M matrix of the pair's diagonal difference and off-diagonal parts
                Eigen::Matrix<cd, 3, Eigen::Dynamic> g(3, static_cast<Eigen::Index>(ms.size()));
                for (std::size_t m = 0; m < ms.size(); ++m) {
                    const CMatrix& mm = ms[m];
                    const auto col = static_cast<Eigen::Index>(m);
                    g(0, col) = mm(p, p) - mm(q, q);
                    g(1, col) = mm(p, q) + mm(q, p);
                    g(2, col) = cd(0.0, 1.0) * (mm(q, p) - mm(p, q));
                }
                const Eigen::Matrix3d gg = (g * g.adjoint()).real();
                Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(gg);
                Eigen::Vector3d a = es.eigenvectors().col(2);
                if (a[0] < 0) a = -a;
                const double c = std::sqrt(0.5 + a[0] / 2.0);
                const cd s = 0.5 * cd(a[1], -a[2]) / c;
                if (std::abs(s) <= cfg.angle_tol) continue;
                settled = false;
                Eigen::Matrix2cd rot;
                rot << c, -std::conj(s), s, c;
                CMatrix vpq(n, 2);
                vpq << v.col(p), v.col(q);
                vpq = vpq * rot;
                v.col(p) = vpq.col(0);
                v.col(q) = vpq.col(1);
                for (CMatrix& mm : ms) {
                    CMatrix rows(2, n);
                    rows << mm.row(p), mm.row(q);
                    rows = rot.adjoint() * rows;
                    mm.row(p) = rows.row(0);
                    mm.row(q) = rows.row(1);
                    CMatrix cols(n, 2);
                    cols << mm.col(p), mm.col(q);
                    cols = cols * rot;
                    mm.col(p) = cols.col(0);
                    mm.col(q) = cols.col(1);
                }
            }
        out.objective_history.push_back(offdiag_energy(ms));
    }

    // keep the n_sources columns carrying the most diagonal energy
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    if (n_sources < n) {
        std::vector<double> energy(static_cast<std::size_t>(n), 0.0);
        for (const CMatrix& mm : ms)
            for (int i = 0; i < n; ++i) energy[static_cast<std::size_t>(i)] += std::norm(mm(i, i));
        std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
            return energy[static_cast<std::size_t>(x)] > energy[static_cast<std::size_t>(y)];
        });
    }
    out.w.resize(n, n_sources);
    for (int k = 0; k < n_sources; ++k) {
        out.w.col(k) = fix_phase(v.col(order[static_cast<std::size_t>(k)]));
        out.diagnostics.push_back({sweep, 0.0, 0, settled});
    }
    return out;
}

SourceSet unmix(const UnmixingMatrix& w, const DataMatrix& z) {
    if (w.w.rows() != z.channels()) throw InputError("unmix: dimension mismatch");
    std::vector<std::string> labels;
    for (Eigen::Index k = 0; k < w.w.cols(); ++k) labels.push_back("y" + std::to_string(k));
    return SourceSet(w.w.adjoint() * z.x, std::move(labels), z.sample_rate);
}

}  // namespace cpka
