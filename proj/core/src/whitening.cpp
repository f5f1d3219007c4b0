#include "cpka/whitening.hpp"

#include <cmath>

namespace cpka {

bool is_real_matrix(const CMatrix& m, double tol) {
    return m.size() == 0 || m.imag().cwiseAbs().maxCoeff() <= tol;
}

DataMatrix center(const DataMatrix& x) {
    if (x.samples() < 2) throw InputError("center: need at least two samples");
    DataMatrix out = x;
    for (Eigen::Index i = 0; i < x.channels(); ++i) out.x.row(i).array() -= x.x.row(i).mean();
    return out;
}

int dominant_rank(const RVector& ev, double ratio) {
    int r = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev[i] > ratio * ev[0]) ++r;
    return r;
}

WhiteningResult whiten(const DataMatrix& x, std::optional<int> n_keep) {
    const Eigen::Index n = x.channels();
    const int keep = n_keep.value_or(static_cast<int>(n));
    if (keep < 1 || keep > n) throw InputError("whiten: n_keep out of range");

    WhiteningResult res;
    res.mean.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) res.mean[i] = x.x.row(i).mean();
    const DataMatrix xc = center(x);
    const auto len = static_cast<double>(x.samples());

    CMatrix u;
    RVector ev;
    if (is_real_matrix(xc.x)) {
        const RMatrix xr = xc.x.real();
        RMatrix cov = xr * xr.transpose() / len;
        cov = (0.5 * (cov + cov.transpose())).eval();
        Eigen::SelfAdjointEigenSolver<RMatrix> es(cov);
        ev = es.eigenvalues().reverse();
        u = es.eigenvectors().rowwise().reverse().cast<cd>();
    } else {
        CMatrix cov = xc.x * xc.x.adjoint() / len;
        cov = (0.5 * (cov + cov.adjoint())).eval();
        Eigen::SelfAdjointEigenSolver<CMatrix> es(cov);
        ev = es.eigenvalues().reverse();
        u = es.eigenvectors().rowwise().reverse();
    }
    res.eigenvalues = ev;

    const double trace = ev.sum();
    int rank = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        if (ev[i] > 1e-12 * trace) ++rank;
    if (rank < keep)
        throw RankError("whiten: numerical rank " + std::to_string(rank) + " below requested " +
                            std::to_string(keep),
                        rank);

    res.v.resize(keep, n);
    for (int k = 0; k < keep; ++k) {
        CVector col = u.col(k);
        Eigen::Index imax = 0;
        col.cwiseAbs().maxCoeff(&imax);
        const cd ph = std::abs(col[imax]) > 0 ? std::conj(col[imax]) / std::abs(col[imax]) : cd(1.0);
        col *= ph;
        res.v.row(k) = col.adjoint() / std::sqrt(ev[k]);
    }
    res.z = {res.v * xc.x, x.sample_rate};
    res.kept_dims = keep;
    return res;
}

}  // namespace cpka
