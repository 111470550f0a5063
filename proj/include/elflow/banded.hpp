#pragma once
#include <vector>

namespace elflow {

// General band matrix in LAPACK band storage, solved with dgbsv.
class BandedMatrix {
public:
    BandedMatrix(int n, int kl, int ku);

    int size() const { return n_; }
    int lower() const { return kl_; }
    int upper() const { return ku_; }

    bool in_band(int i, int j) const { return j - i <= ku_ && i - j <= kl_; }
    double& at(int i, int j);
    double get(int i, int j) const;
    void clear_row(int i);

    // Solves A X = B in place (B column-major, n x nrhs). Returns the LAPACK info code.
    int solve(std::vector<double>& b, int nrhs = 1) const;

private:
    int n_, kl_, ku_, ldab_;
    std::vector<double> ab_;
};

}  // namespace elflow
