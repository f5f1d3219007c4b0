#pragma once

#include <map>
#include <string>
#include <vector>

#include "cpka/separators.hpp"
#include "cpka/signal_model.hpp"
#include "cpka/tensor.hpp"

namespace cpka {

struct SeparationReport {
    std::string algorithm;
    std::uint64_t seed = 0;
    double isi = 0.0;
    double acc = 0.0;
    std::vector<double> sdr_db;
    std::vector<int> matching;  // matching[i] = estimate row paired with true source i
    bool converged = true;
    std::map<std::string, double> extras;

    double sdr_mean() const;
    double sdr_min() const;
};

// Appendix ISI of a square global matrix P.
double isi(const CMatrix& p);
// P = W^H A_eff, where A_eff maps sources to the data the separator saw.
double isi(const UnmixingMatrix& w, const CMatrix& a_eff);

struct AccResult {
    double value = 0.0;
    std::vector<int> matching;
    std::vector<double> cc;  // matched |CC| per true source
};

// |x1 . x2| / (||x1|| ||x2||); complex rows are compared through their
// magnitude envelopes.
double correlation(const CVector& a, const CVector& b);
AccResult acc(const SourceSet& truth, const SourceSet& estimate);
// Exhaustive optimum over all permutations, for cross-checking the greedy pass.
AccResult acc_optimal(const SourceSet& truth, const SourceSet& estimate);

inline constexpr double kSdrCap = 300.0;

struct SdrParts {
    CVector target, interf, artif;
};

SdrParts sdr_decompose(const SourceSet& truth, Eigen::Index source, const CVector& estimate);
std::vector<double> sdr(const SourceSet& truth, const SourceSet& estimate, const std::vector<int>& matching);

// s(w) = Re(w^H Cw^3) / ||Cw^3||
double eigen_cosine(const FourthOrderTensor& t, const CVector& w);

}  // namespace cpka
