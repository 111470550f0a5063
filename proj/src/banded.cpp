#include "elflow/banded.hpp"

#include <algorithm>

#include "elflow/common.hpp"

extern "C" void dgbsv_(const int* n, const int* kl, const int* ku, const int* nrhs, double* ab, const int* ldab,
                       int* ipiv, double* b, const int* ldb, int* info);

namespace elflow {

BandedMatrix::BandedMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1), ab_(static_cast<std::size_t>(ldab_) * n, 0.0) {}

double& BandedMatrix::at(int i, int j) {
    if (!in_band(i, j)) throw Error(ErrorKind::InvalidArgument, "band matrix entry outside the band");
    return ab_[static_cast<std::size_t>(j) * ldab_ + kl_ + ku_ + i - j];
}

double BandedMatrix::get(int i, int j) const {
    if (!in_band(i, j)) return 0.0;
    return ab_[static_cast<std::size_t>(j) * ldab_ + kl_ + ku_ + i - j];
}

void BandedMatrix::clear_row(int i) {
    for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j) at(i, j) = 0.0;
}

int BandedMatrix::solve(std::vector<double>& b, int nrhs) const {
    std::vector<double> work = ab_;
    std::vector<int> ipiv(n_);
    int info = 0;
    const int ldb = n_;
    dgbsv_(&n_, &kl_, &ku_, &nrhs, work.data(), &ldab_, ipiv.data(), b.data(), &ldb, &info);
    return info;
}

}  // namespace elflow
