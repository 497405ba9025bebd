#pragma once

#include <cstdint>

#include "nort/splr.hpp"

namespace nort {

// Top singular triplets of an implicit operator. Columns orthonormal,
// singvals nonnegative nonincreasing.
struct PartialSvd {
    RowMat left;            // rows() x k
    Eigen::VectorXd singvals;
    RowMat right;           // cols() x k
    bool converged = true;  // false: best effort after hitting max_inner
    int matvec_pairs = 0;   // GKL expansion steps spent
};

// Golub-Kahan-Lanczos bidiagonalization with full reorthogonalization and a
// seeded random start vector. Stops when the top k_request triplets have
// residual <= tol * sigma_1, the subspace saturates, or max_inner expansion
// steps are exhausted (best available triplets are then returned with
// converged = false). Deterministic given the seed.
PartialSvd lanczos_svd(const SplrOperator& op, index_t k_request, double tol, int max_inner,
                       std::uint64_t seed);

// Subspace (block power) iteration over the same operator; reference
// implementation kept as an independent cross-check of lanczos_svd.
PartialSvd power_svd(const SplrOperator& op, index_t k_request, int iters, std::uint64_t seed);

} // namespace nort
