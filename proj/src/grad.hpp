#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "net.hpp"

namespace relufd {

// Rows are gradients of each output coordinate with respect to the flat
// parameter vector; shape n_d x D.
MatrixXd grad_wrt_params(const Params& p, const VectorXd& x);

// Path-polynomial evaluation of output k on the augmented computational
// graph.  Returns the value, its analytic parameter gradient, and the list
// of monomials (as index strings) for structural inspection.
struct PathPoly {
    double value = 0.0;
    VectorXd grad;
    std::vector<std::string> terms;   // e.g. "b1_3 W2_13 W3_11", 1-based
};
PathPoly path_polynomial(const Params& p, const VectorXd& x, int k,
                         double zero_atol = 1e-12);

struct JacobianBatch {
    MatrixXd J;        // (m * n_d) x D
    MatrixXd Z;        // m x n_0 sample points
    uint64_t seed = 0;
    int resamples = 0;
};
JacobianBatch batch_jacobian(const Params& p, long long m, uint64_t seed,
                             double zero_atol = 1e-12);

// Count of singular values above rel_tol * sigma_max.
int numerical_rank(const MatrixXd& M, double rel_tol = 1e-6);

// Row-streaming rank accumulator.  Keeps an orthonormal basis of the row
// space; once the rank stalls it switches to tracking an orthonormal basis
// of the complement, so each further row costs O(D * deficiency) instead of
// O(D * rank).  Supports early exit at a caller-supplied cap.
class StreamingRank {
public:
    StreamingRank(long long dim, double rel_tol = 1e-6, long long cap = -1);

    void add_row(const VectorXd& row);
    void add_rows(const MatrixXd& rows);   // one row per matrix row

    int rank() const { return r_; }
    bool saturated() const { return cap_ >= 0 && r_ >= cap_; }

private:
    void absorb(const VectorXd& row);      // basis-mode insertion
    void build_complement();

    long long dim_;
    double rel_tol_;
    long long cap_;
    double max_norm_ = 0.0;
    MatrixXd Q_;       // dim x r, orthonormal columns
    int r_ = 0;
    int stall_ = 0;
    MatrixXd N_;       // dim x (dim - r) complement basis
    bool comp_mode_ = false;
};

struct FdimEstimate {
    int rank = 0;
    long long m = 0;
    double tolerance = 0.0;
    long long upper_bound = 0;
    bool attained_max = false;
    int resamples = 0;
    double wall_ms = 0.0;
};

// Draw the i-th sample point (resampling near-fold points deterministically).
VectorXd sample_smooth_point(const Params& p, uint64_t seed, long long index,
                             double zero_atol, int* resamples);

FdimEstimate estimate_fdim(const Params& p, int m_multiplier, uint64_t seed,
                           double rel_tol = 1e-6);

// Shared-sample variant: ranks at several multipliers using one growing
// sample stream, so the per-trial curve is monotone by construction.
std::vector<FdimEstimate> estimate_fdim_multi(const Params& p,
                                              const std::vector<int>& multipliers,
                                              uint64_t seed, double rel_tol = 1e-6);

}  // namespace relufd
