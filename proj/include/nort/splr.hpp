#pragma once

#include <Eigen/Core>
#include <memory>
#include <optional>

#include "nort/factored.hpp"
#include "nort/losses.hpp"
#include "nort/parallel.hpp"
#include "nort/sparse_tensor.hpp"

namespace nort {

// Products against the mode-i unfolding of a mode-j folded low-rank matrix,
// computed without materializing any tensor:
//   a^T [ (U diag V^T)^<j> ]_<i>   and   [ (U diag V^T)^<j> ]_<i> b.
// Requires i != factor.mode(); for i == mode the plain matrix product applies.
Eigen::VectorXd kron_unfold_left(const FactorPair& factor, const Shape& shape, int i, const Eigen::VectorXd& a,
                                 Exec exec = Exec::parallel);
Eigen::VectorXd kron_unfold_right(const FactorPair& factor, const Shape& shape, int i, const Eigen::VectorXd& b,
                                  Exec exec = Exec::parallel);

// Same products against a sparse tensor's mode-i unfolding, O(nnz).
Eigen::VectorXd sparse_unfold_left(const SparseTensorCoo& s, int i, const Eigen::VectorXd& a);
Eigen::VectorXd sparse_unfold_right(const SparseTensorCoo& s, int i, const Eigen::VectorXd& b);

// Implicit mode-i unfolding of a "sparse plus low-rank" iterate
//   Z = sum_t coeff_t * fold_{mode_t}(factor_t) + coeff_s * S,
// optionally with (I - mu*G) applied along the first mode of the low-rank
// part (Laplacian-regularized gradient step; the sparse part is untouched).
// Supports left products a^T Z_<i> and right products Z_<i> b.
class SplrOperator {
  public:
    struct LowRankTerm {
        double coeff;
        std::shared_ptr<const FactorPair> factor;
    };
    struct SparseTerm {
        double coeff;
        std::shared_ptr<const SparseTensorCoo> tensor;
        // Optional value override sharing the tensor's support (canonical
        // entry order); used to reuse the observation support for gradients.
        std::shared_ptr<const std::vector<double>> values;
    };
    struct Laplacian {
        double mu;
        Eigen::MatrixXd g; // symmetric I^1 x I^1
    };

    SplrOperator(Shape shape, int target_mode, std::vector<LowRankTerm> lowrank,
                 std::optional<SparseTerm> sparse, std::optional<Laplacian> laplacian = std::nullopt,
                 Exec exec = Exec::parallel);

    const Shape& shape() const { return shape_; }
    int target_mode() const { return target_mode_; }
    index_t rows() const { return rows_; }
    index_t cols() const { return cols_; }

    Eigen::VectorXd left(const Eigen::VectorXd& a) const;  // a^T Z_<i>, length cols()
    Eigen::VectorXd right(const Eigen::VectorXd& b) const; // Z_<i> b, length rows()

    // Dense unfolding (test/diagnostic use only).
    Eigen::MatrixXd densify_unfolding() const;

  private:
    Shape shape_;
    int target_mode_;
    index_t rows_, cols_;
    Exec exec_;
    std::vector<LowRankTerm> terms_; // Laplacian already folded in
    double sparse_coeff_ = 0;
    // Target-mode CSR (right products, parallel over rows) and CSC (left
    // products, parallel over columns) of the sparse term.
    std::vector<index_t> row_ptr_, csr_col_;
    std::vector<double> csr_val_;
    std::vector<index_t> col_ptr_, csc_row_;
    std::vector<double> csc_val_;
    audit::Charge charge_;
};

inline Eigen::VectorXd op_left(const SplrOperator& op, const Eigen::VectorXd& a) { return op.left(a); }
inline Eigen::VectorXd op_right(const SplrOperator& op, const Eigen::VectorXd& b) { return op.right(b); }

// (I - mu*G) applied along the first mode of every low-rank term; returns
// terms usable by any target mode. Exact identity (same objects) when mu == 0.
std::vector<SplrOperator::LowRankTerm> laplacian_premultiply(const Shape& shape,
                                                             const std::vector<SplrOperator::LowRankTerm>& terms,
                                                             double mu, const Eigen::MatrixXd& g);

// Frobenius inner product of two implicitly represented tensors
// sum_t coeff_t * fold(factor_t); cross-mode pairs go through the
// fold-free kernels.
double factored_inner(const FactoredTensor& a, const FactoredTensor& b, Exec exec = Exec::parallel);
double factored_norm(const FactoredTensor& a, Exec exec = Exec::parallel);

} // namespace nort
