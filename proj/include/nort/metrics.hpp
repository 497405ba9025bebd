#pragma once

#include <functional>
#include <vector>

#include "nort/datagen.hpp"
#include "nort/dense_tensor.hpp"
#include "nort/factored.hpp"
#include "nort/parallel.hpp"
#include "nort/sparse_tensor.hpp"

namespace nort {

// Root-mean-square deviation over the held-out support.
double rmse(const FactoredTensor& x, const SparseTensorCoo& heldout, Exec exec = Exec::parallel);
double rmse(const CpFactors& truth, const SparseTensorCoo& heldout);

struct RankingMetrics {
    double mrr = 0;
    double hits1 = 0;
    double hits3 = 0;
};

struct Triple {
    index_t i1, i2, i3; // 1-based; i3 is the target relation
};

// Ranks in descending score order; equal scores rank by smaller relation
// index. scores(i1, i2, j) must be defined for j = 1..relation_count.
RankingMetrics mrr_hits(const std::function<double(index_t, index_t, index_t)>& scores,
                        const std::vector<Triple>& test_triples, index_t relation_count);

// sqrt(I^pi) * max|entry| / frobenius; in [1, sqrt(I^pi)] for nonzero input.
double spikiness(const DenseTensor& x);

// sum_i alphas[i] * ||X_<i+1>||_* / ||X||_F (diagnostic scale only).
double rank_measure(const DenseTensor& x, const std::vector<double>& alphas);

} // namespace nort
