#pragma once

#include <cstddef>
#include <vector>

#include "cpka/types.hpp"

namespace cpka {

inline constexpr std::size_t kDefaultTensorCap = std::size_t{1} << 30;

// c_abcd = (1/L) sum_j z_aj conj(z_bj) z_cj conj(z_dj), dense, row-major with
// the first index slowest.
class FourthOrderTensor {
public:
    FourthOrderTensor() = default;
    explicit FourthOrderTensor(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n * n) {}

    int dim() const { return n_; }
    std::size_t index(int a, int b, int c, int d) const {
        return ((static_cast<std::size_t>(a) * n_ + b) * n_ + c) * n_ + d;
    }
    cd& operator()(int a, int b, int c, int d) { return data_[index(a, b, c, d)]; }
    const cd& operator()(int a, int b, int c, int d) const { return data_[index(a, b, c, d)]; }

    std::vector<cd>& data() { return data_; }
    const std::vector<cd>& data() const { return data_; }

    // Built from real samples: every entry is real and real start vectors
    // suffice.
    bool real_valued() const;

private:
    int n_ = 0;
    std::vector<cd> data_;
};

// S_ijk = (1/L) sum_l x_il x_jl x_kl, fully symmetric.
class ThirdOrderTensor {
public:
    ThirdOrderTensor() = default;
    explicit ThirdOrderTensor(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n) {}

    int dim() const { return n_; }
    double& operator()(int i, int j, int k) { return data_[(static_cast<std::size_t>(i) * n_ + j) * n_ + k]; }
    double operator()(int i, int j, int k) const { return data_[(static_cast<std::size_t>(i) * n_ + j) * n_ + k]; }
    const std::vector<double>& data() const { return data_; }

private:
    int n_ = 0;
    std::vector<double> data_;
};

// General dense complex tensor for the n-mode product.
struct DenseTensor {
    std::vector<int> dims;
    std::vector<cd> data;

    static DenseTensor zeros(std::vector<int> dims);
    static DenseTensor from(const FourthOrderTensor& t);
    static DenseTensor from(const ThirdOrderTensor& t);
    std::size_t offset(const std::vector<int>& idx) const;
    int order() const { return static_cast<int>(dims.size()); }
};

struct EigenPair {
    CVector w;
    double lambda = 0.0;
    double residual = 0.0;  // ||Cw^3 - lambda w|| / ||Cw^3||
};

FourthOrderTensor fourth_moment_tensor(const CMatrix& z, std::size_t memory_cap = kDefaultTensorCap);
ThirdOrderTensor coskewness_tensor(const CMatrix& z);

// (A x_n U)_{..j..} = sum_{i_n} a_{..i_n..} U_{i_n j}; `mode` is 1-based.
DenseTensor nmode_product(const DenseTensor& t, const CMatrix& u, int mode);
// Same with a column vector, the contracted mode is dropped.
DenseTensor nmode_product(const DenseTensor& t, const CVector& v, int mode);

// (Cw^3)_a = sum c_abcd w_b conj(w_c) w_d, so that w^H Cw^3 = (1/L) sum |w^H z|^4.
// The unchecked forms take any vector; cw3/cw4 insist on unit norm.
CVector contract3(const FourthOrderTensor& t, const CVector& w);
cd contract4(const FourthOrderTensor& t, const CVector& w);
CVector cw3(const FourthOrderTensor& t, const CVector& w);
double cw4(const FourthOrderTensor& t, const CVector& w);

// The same quantities evaluated directly on the samples, O(NL).
CVector cw3_samples(const CMatrix& z, const CVector& w);
double cw4_samples(const CMatrix& z, const CVector& w);

// S x_2 w x_3 w
RVector sw2(const ThirdOrderTensor& s, const RVector& w);

EigenPair make_eigenpair(const FourthOrderTensor& t, const CVector& w);

// Tensor of a freshly drawn, whitened, circular complex source mixture; see
// the README for the construction.
FourthOrderTensor random_statistical_tensor(int n, std::uint64_t seed, int l_samples = 10000);

// N^2 matrices, entry k*N + l holds (N_kl)_ij = cum(z_i, z_j*, z_k, z_l*).
std::vector<CMatrix> cumulant_matrices(const CMatrix& z, std::size_t memory_cap = kDefaultTensorCap);

// Largest deviation over the moment-tensor symmetry group
// {c_abcd = c_cbad = c_adcb = conj(c_badc)}.
double symmetry_defect(const FourthOrderTensor& t);
// Largest deviation over the seven relations
// c_abcd = c*_bacd = c_cbad = c*_dbca = c*_acbd = c_adcb = c*_abdc.
// Only real tensors satisfy all seven; see the README.
double listed_symmetry_defect(const FourthOrderTensor& t);

void write_tensor_csv(const std::string& path, const FourthOrderTensor& t);
FourthOrderTensor read_tensor_csv(const std::string& path);
void write_tensor_binary(const std::string& path, const FourthOrderTensor& t);
FourthOrderTensor read_tensor_binary(const std::string& path);

}  // namespace cpka
