#include "cpka/tensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>

#include "cpka/signal_model.hpp"
#include "cpka/whitening.hpp"

namespace cpka {

namespace {
WarningHandler& warning_handler() {
    static WarningHandler h = [](const std::string& m) { std::cerr << "warning: " << m << '\n'; };
    return h;
}
}  // namespace

void set_warning_handler(WarningHandler h) { warning_handler() = std::move(h); }
void warn(const std::string& msg) {
    if (warning_handler()) warning_handler()(msg);
}

bool FourthOrderTensor::real_valued() const {
    return std::all_of(data_.begin(), data_.end(), [](const cd& v) { return v.imag() == 0.0; });
}

DenseTensor DenseTensor::zeros(std::vector<int> dims) {
    DenseTensor t;
    std::size_t total = 1;
    for (int d : dims) total *= static_cast<std::size_t>(d);
    t.dims = std::move(dims);
    t.data.assign(total, cd(0.0));
    return t;
}

DenseTensor DenseTensor::from(const FourthOrderTensor& t) {
    DenseTensor out;
    out.dims = {t.dim(), t.dim(), t.dim(), t.dim()};
    out.data = t.data();
    return out;
}

DenseTensor DenseTensor::from(const ThirdOrderTensor& t) {
    DenseTensor out;
    out.dims = {t.dim(), t.dim(), t.dim()};
    out.data.assign(t.data().begin(), t.data().end());
    return out;
}

std::size_t DenseTensor::offset(const std::vector<int>& idx) const {
    std::size_t off = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) off = off * static_cast<std::size_t>(dims[k]) + static_cast<std::size_t>(idx[k]);
    return off;
}

namespace {

void check_capacity(int n, std::size_t cap) {
    const double bytes = std::pow(static_cast<double>(n), 4) * sizeof(cd);
    if (bytes > static_cast<double>(cap))
        throw CapacityError("tensor of dimension " + std::to_string(n) + " needs " +
                            std::to_string(static_cast<long long>(bytes)) + " bytes, cap is " +
                            std::to_string(cap));
}

// the eight index maps of the moment-tensor symmetry group, with a flag
// telling whether the value is conjugated under the map
using Quad = std::array<int, 4>;
std::array<std::pair<Quad, bool>, 8> orbit(const Quad& q) {
    const auto [a, b, c, d] = q;
    return {{{{a, b, c, d}, false},
             {{c, b, a, d}, false},
             {{a, d, c, b}, false},
             {{c, d, a, b}, false},
             {{b, a, d, c}, true},
             {{d, a, b, c}, true},
             {{b, c, d, a}, true},
             {{d, c, b, a}, true}}};
}

}  // namespace

FourthOrderTensor fourth_moment_tensor(const CMatrix& z, std::size_t memory_cap) {
    const int n = static_cast<int>(z.rows());
    const Eigen::Index len = z.cols();
    if (n < 1 || len < 1) throw InputError("fourth_moment_tensor: empty data");
    check_capacity(n, memory_cap);

    {
        const CMatrix cov = z * z.adjoint() / static_cast<double>(len);
        const double dev = (cov - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
        if (dev > 1e-3) warn("fourth_moment_tensor: input covariance deviates from identity by " + std::to_string(dev));
    }

    // pair products p_ab = z_a conj(z_b), one contiguous column per (a, b)
    CMatrix p(len, static_cast<Eigen::Index>(n) * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            p.col(a * n + b) = z.row(a).transpose().cwiseProduct(z.row(b).transpose().conjugate());

    FourthOrderTensor t(n);
    const double inv = 1.0 / static_cast<double>(len);
    std::vector<char> done(t.data().size(), 0);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    if (done[t.index(a, b, c, d)]) continue;
                    const cd* pab = p.col(a * n + b).data();
                    const cd* pcd = p.col(c * n + d).data();
                    cd acc(0.0);
                    for (Eigen::Index j = 0; j < len; ++j) acc += pab[j] * pcd[j];
                    acc *= inv;
                    // a representative that maps onto its own conjugate is real
                    for (const auto& [q, conj] : orbit({a, b, c, d}))
                        if (conj && q == Quad{a, b, c, d}) acc = cd(acc.real(), 0.0);
                    for (const auto& [q, conj] : orbit({a, b, c, d})) {
                        const std::size_t k = t.index(q[0], q[1], q[2], q[3]);
                        t.data()[k] = conj ? std::conj(acc) : acc;
                        done[k] = 1;
                    }
                }
    return t;
}

ThirdOrderTensor coskewness_tensor(const CMatrix& z) {
    if (!is_real_matrix(z)) throw InputError("coskewness_tensor: skewness statistics take real data only");
    const int n = static_cast<int>(z.rows());
    const Eigen::Index len = z.cols();
    if (n < 1 || len < 1) throw InputError("coskewness_tensor: empty data");
    const RMatrix x = z.real().transpose();  // L x N, contiguous columns
    ThirdOrderTensor s(n);
    const double inv = 1.0 / static_cast<double>(len);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            for (int k = j; k < n; ++k) {
                const double* xi = x.col(i).data();
                const double* xj = x.col(j).data();
                const double* xk = x.col(k).data();
                double acc = 0.0;
                for (Eigen::Index l = 0; l < len; ++l) acc += xi[l] * xj[l] * xk[l];
                acc *= inv;
                s(i, j, k) = s(i, k, j) = s(j, i, k) = s(j, k, i) = s(k, i, j) = s(k, j, i) = acc;
            }
    return s;
}

DenseTensor nmode_product(const DenseTensor& t, const CMatrix& u, int mode) {
    if (mode < 1 || mode > t.order()) throw InputError("nmode_product: mode out of range");
    const std::size_t m = static_cast<std::size_t>(mode - 1);
    if (u.rows() != t.dims[m]) throw InputError("nmode_product: mode dimension does not match rows of U");

    std::vector<int> out_dims = t.dims;
    out_dims[m] = static_cast<int>(u.cols());
    DenseTensor out = DenseTensor::zeros(out_dims);

    // view t as (outer, I_n, inner)
    std::size_t outer = 1, inner = 1;
    for (std::size_t k = 0; k < m; ++k) outer *= static_cast<std::size_t>(t.dims[k]);
    for (std::size_t k = m + 1; k < t.dims.size(); ++k) inner *= static_cast<std::size_t>(t.dims[k]);
    const auto in_n = static_cast<std::size_t>(t.dims[m]);
    const auto jn = static_cast<std::size_t>(u.cols());
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t j = 0; j < jn; ++j)
            for (std::size_t r = 0; r < inner; ++r) {
                cd acc(0.0);
                for (std::size_t i = 0; i < in_n; ++i)
                    acc += t.data[(o * in_n + i) * inner + r] * u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                out.data[(o * jn + j) * inner + r] = acc;
            }
    return out;
}

DenseTensor nmode_product(const DenseTensor& t, const CVector& v, int mode) {
    DenseTensor out = nmode_product(t, CMatrix(v), mode);
    out.dims.erase(out.dims.begin() + (mode - 1));
    return out;
}

CVector contract3(const FourthOrderTensor& t, const CVector& w) {
    const int n = t.dim();
    if (w.size() != n) throw InputError("cw3: vector length does not match tensor dimension");
    CVector g(n);
    const cd* c = t.data().data();
    for (int a = 0; a < n; ++a) {
        cd acc(0.0);
        for (int b = 0; b < n; ++b)
            for (int cc = 0; cc < n; ++cc) {
                const cd wbc = w[b] * std::conj(w[cc]);
                const cd* row = c + t.index(a, b, cc, 0);
                cd inner(0.0);
                for (int d = 0; d < n; ++d) inner += row[d] * w[d];
                acc += wbc * inner;
            }
        g[a] = acc;
    }
    return g;
}

cd contract4(const FourthOrderTensor& t, const CVector& w) {
    return w.dot(contract3(t, w));  // Eigen's dot conjugates the left operand
}

namespace {
void check_unit(const CVector& w) {
    if (std::abs(w.norm() - 1.0) > 1e-9) throw InputError("expected a unit vector");
}
}  // namespace

CVector cw3(const FourthOrderTensor& t, const CVector& w) {
    check_unit(w);
    return contract3(t, w);
}

double cw4(const FourthOrderTensor& t, const CVector& w) {
    check_unit(w);
    const cd v = contract4(t, w);
    if (std::abs(v.imag()) > 1e-10 * std::max(1.0, std::abs(v.real())))
        throw std::runtime_error("cw4: imaginary part " + std::to_string(v.imag()) + " exceeds tolerance");
    return v.real();
}

CVector cw3_samples(const CMatrix& z, const CVector& w) {
    const CVector y = (w.adjoint() * z).transpose();  // y_j = w^H z_j
    CVector weights(y.size());
    for (Eigen::Index j = 0; j < y.size(); ++j) weights[j] = std::norm(y[j]) * std::conj(y[j]);
    return z * weights / static_cast<double>(z.cols());
}

double cw4_samples(const CMatrix& z, const CVector& w) {
    const CVector y = z.adjoint() * w;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < y.size(); ++j) acc += std::norm(y[j]) * std::norm(y[j]);
    return acc / static_cast<double>(z.cols());
}

RVector sw2(const ThirdOrderTensor& s, const RVector& w) {
    const int n = s.dim();
    if (w.size() != n) throw InputError("sw2: vector length does not match tensor dimension");
    RVector g = RVector::Zero(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) g[i] += s(i, j, k) * w[j] * w[k];
    return g;
}

EigenPair make_eigenpair(const FourthOrderTensor& t, const CVector& w) {
    EigenPair p;
    p.w = w;
    const CVector g = contract3(t, w);
    p.lambda = w.dot(g).real();
    const double gn = g.norm();
    p.residual = gn > 0 ? (g - p.lambda * w).norm() / gn : 0.0;
    return p;
}

FourthOrderTensor random_statistical_tensor(int n, std::uint64_t seed, int l_samples) {
    if (n < 2) throw InputError("random_statistical_tensor: n must be >= 2");
    if (l_samples < n) throw InputError("random_statistical_tensor: too few samples");
    Rng rng(seed);
    constexpr double jitter = 0.8;   // rad, per-channel phase spread around the common phase
    constexpr double p_lo = 0.95;    // lower bound of the unit-modulus power share
    const Eigen::Index len = l_samples;

    RVector common(len);
    for (Eigen::Index j = 0; j < len; ++j) common[j] = 2.0 * kPi * rng.uniform();
    CMatrix s(n, len);
    for (int i = 0; i < n; ++i) {
        const double p = rng.uniform(p_lo, 1.0);
        const double a = std::sqrt(p), g = std::sqrt(1.0 - p);
        for (Eigen::Index j = 0; j < len; ++j) {
            const double ph = common[j] + jitter * rng.normal();
            s(i, j) = a * std::polar(1.0, ph) + g * rng.cnormal();
        }
    }
    CMatrix mixing(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) mixing(i, j) = rng.cnormal();
    const WhiteningResult wr = whiten(DataMatrix{mixing * s, 1.0});
    return fourth_moment_tensor(wr.z.x);
}

std::vector<CMatrix> cumulant_matrices(const CMatrix& z, std::size_t memory_cap) {
    const int n = static_cast<int>(z.rows());
    const auto len = static_cast<double>(z.cols());
    check_capacity(n, memory_cap);
    const FourthOrderTensor c = fourth_moment_tensor(z, memory_cap);
    const CMatrix r = z * z.adjoint() / len;
    const CMatrix q = z * z.transpose() / len;
    std::vector<CMatrix> out;
    out.reserve(static_cast<std::size_t>(n) * n);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            CMatrix m(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    m(i, j) = c(i, j, k, l) - r(i, j) * r(k, l) - q(i, k) * std::conj(q(j, l)) - r(i, l) * r(k, j);
            out.push_back(std::move(m));
        }
    return out;
}

double symmetry_defect(const FourthOrderTensor& t) {
    const int n = t.dim();
    double worst = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    const cd v = t(a, b, c, d);
                    for (const auto& [q, conj] : orbit({a, b, c, d})) {
                        const cd u = t(q[0], q[1], q[2], q[3]);
                        worst = std::max(worst, std::abs((conj ? std::conj(u) : u) - v));
                    }
                }
    return worst;
}

double listed_symmetry_defect(const FourthOrderTensor& t) {
    const int n = t.dim();
    double worst = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    const cd v = t(a, b, c, d);
                    const std::array<cd, 7> rel = {std::conj(t(b, a, c, d)), t(c, b, a, d), std::conj(t(d, b, c, a)),
                                                   std::conj(t(a, c, b, d)), t(a, d, c, b), std::conj(t(a, b, d, c)),
                                                   v};
                    for (const cd& u : rel) worst = std::max(worst, std::abs(u - v));
                }
    return worst;
}

}  // namespace cpka
