#include "cpka/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cpka/whitening.hpp"

namespace cpka {

double SeparationReport::sdr_mean() const {
    if (sdr_db.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::accumulate(sdr_db.begin(), sdr_db.end(), 0.0) / static_cast<double>(sdr_db.size());
}

double SeparationReport::sdr_min() const {
    if (sdr_db.empty()) return std::numeric_limits<double>::quiet_NaN();
    return *std::min_element(sdr_db.begin(), sdr_db.end());
}

double isi(const CMatrix& p) {
    if (p.rows() != p.cols()) throw InputError("isi: P must be square");
    const RMatrix a = p.cwiseAbs2();
    double total = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double m = a.row(i).maxCoeff();
        if (!(m > 0)) throw InputError("isi: P has an all-zero row");
        total += a.row(i).sum() / m - 1.0;
    }
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        const double m = a.col(j).maxCoeff();
        if (!(m > 0)) throw InputError("isi: P has an all-zero column");
        total += a.col(j).sum() / m - 1.0;
    }
    return total;
}

double isi(const UnmixingMatrix& w, const CMatrix& a_eff) {
    if (w.w.rows() != a_eff.rows()) throw InputError("isi: dimension mismatch");
    return isi(CMatrix(w.w.adjoint() * a_eff));
}

double correlation(const CVector& a, const CVector& b) {
    if (a.size() != b.size()) throw InputError("correlation: length mismatch");
    const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
    const bool complex = !is_real_matrix(a, 1e-12 * scale) || !is_real_matrix(b, 1e-12 * scale);
    if (complex) {
        const RVector ea = a.cwiseAbs(), eb = b.cwiseAbs();
        const double den = ea.norm() * eb.norm();
        if (!(den > 0)) throw InputError("correlation: zero-norm signal");
        return std::abs(ea.dot(eb)) / den;
    }
    const RVector ra = a.real(), rb = b.real();
    const double den = ra.norm() * rb.norm();
    if (!(den > 0)) throw InputError("correlation: zero-norm signal");
    return std::abs(ra.dot(rb)) / den;
}

namespace {

RMatrix cc_table(const SourceSet& truth, const SourceSet& est) {
    if (truth.count() != est.count() || truth.length() != est.length())
        throw InputError("acc: truth and estimate differ in shape");
    const Eigen::Index n = truth.count();
    RMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            m(i, j) = correlation(truth.data.row(i).transpose(), est.data.row(j).transpose());
    return m;
}

}  // namespace

AccResult acc(const SourceSet& truth, const SourceSet& estimate) {
    const RMatrix m = cc_table(truth, estimate);
    const Eigen::Index n = m.rows();
    AccResult r;
    r.matching.assign(static_cast<std::size_t>(n), -1);
    r.cc.assign(static_cast<std::size_t>(n), 0.0);
    RMatrix work = m;
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Index i = 0, j = 0;
        work.maxCoeff(&i, &j);
        r.matching[static_cast<std::size_t>(i)] = static_cast<int>(j);
        r.cc[static_cast<std::size_t>(i)] = m(i, j);
        work.row(i).setConstant(-1.0);
        work.col(j).setConstant(-1.0);
    }
    r.value = std::accumulate(r.cc.begin(), r.cc.end(), 0.0) / static_cast<double>(n);
    return r;
}

AccResult acc_optimal(const SourceSet& truth, const SourceSet& estimate) {
    const RMatrix m = cc_table(truth, estimate);
    const auto n = static_cast<int>(m.rows());
    if (n > 9) throw InputError("acc_optimal: too many sources for exhaustive search");
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    AccResult best;
    best.value = -1.0;
    do {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += m(i, perm[static_cast<std::size_t>(i)]);
        s /= n;
        if (s > best.value) {
            best.value = s;
            best.matching = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    best.cc.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) best.cc[static_cast<std::size_t>(i)] = m(i, best.matching[static_cast<std::size_t>(i)]);
    return best;
}

SdrParts sdr_decompose(const SourceSet& truth, Eigen::Index source, const CVector& y) {
    const CVector s = truth.data.row(source).transpose();
    const double ss = s.squaredNorm();
    if (!(ss > 0)) throw InputError("sdr: zero-energy true source");
    SdrParts parts;
    parts.target = (s.dot(y) / ss) * s;
    // projection onto the span of all true sources
    const CMatrix basis = truth.data.transpose();
    const Eigen::HouseholderQR<CMatrix> qr(basis);
    const CMatrix q = qr.householderQ() * CMatrix::Identity(basis.rows(), basis.cols());
    const CVector proj = q * (q.adjoint() * y);
    parts.interf = proj - parts.target;
    parts.artif = y - proj;
    return parts;
}

std::vector<double> sdr(const SourceSet& truth, const SourceSet& estimate, const std::vector<int>& matching) {
    if (static_cast<Eigen::Index>(matching.size()) != truth.count()) throw InputError("sdr: matching size mismatch");
    std::vector<double> out;
    for (Eigen::Index i = 0; i < truth.count(); ++i) {
        const CVector y = estimate.data.row(matching[static_cast<std::size_t>(i)]).transpose();
        const SdrParts p = sdr_decompose(truth, i, y);
        const double num = p.target.squaredNorm();
        const double den = (p.interf + p.artif).squaredNorm();
        double v;
        if (!(num > 0))
            v = -std::numeric_limits<double>::infinity();
        else if (!(den > 0))
            v = kSdrCap;
        else
            v = std::min(kSdrCap, 10.0 * std::log10(num / den));
        out.push_back(v);
    }
    return out;
}

double eigen_cosine(const FourthOrderTensor& t, const CVector& w) {
    if (std::abs(w.norm() - 1.0) > 1e-9) throw InputError("eigen_cosine: expected a unit vector");
    const CVector g = contract3(t, w);
    const double gn = g.norm();
    if (gn < 1e-14) throw std::domain_error("eigen_cosine: Cw^3 vanishes (degenerate direction)");
    const cd v = w.dot(g);
    if (std::abs(v.imag()) > 1e-9 * std::max(1.0, std::abs(v.real())))
        throw std::runtime_error("eigen_cosine: w^H Cw^3 is not real");
    return v.real() / gn;
}

}  // namespace cpka
