#pragma once

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <vector>

#include "nort/alloc_audit.hpp"
#include "nort/shape.hpp"

namespace nort {

class DenseTensor;

// Row-major so that the kernels' scattered row reads are contiguous.
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One mode's low-rank factorization. Represents
//   left * right^T                      when singvals is absent, and
//   left * diag(singvals) * right^T     when present (columns orthonormal,
//                                       singvals nonincreasing >= 0).
// k = 0 encodes the zero matrix.
class FactorPair {
  public:
    FactorPair() = default;
    FactorPair(int mode, RowMat left, RowMat right, std::optional<Eigen::VectorXd> singvals = std::nullopt);

    static FactorPair zero(const Shape& shape, int mode);

    int mode() const { return mode_; }
    index_t rank() const { return left_.cols(); }
    const RowMat& left() const { return left_; }
    const RowMat& right() const { return right_; }
    bool has_singvals() const { return singvals_.has_value(); }
    const Eigen::VectorXd& singvals() const { return *singvals_; }

    // Scale of singular value p (1.0 when singvals are absent).
    double sigma(index_t p) const { return singvals_ ? (*singvals_)(p) : 1.0; }

    // Dense value left * diag * right^T (test/diagnostic use).
    Eigen::MatrixXd dense_matrix() const;

    bool matches_shape(const Shape& shape) const;

  private:
    int mode_ = 0;
    RowMat left_;  // I^mode x k
    RowMat right_; // (I^pi / I^mode) x k
    std::optional<Eigen::VectorXd> singvals_;
    audit::Charge charge_;
};

// Implicit tensor sum_terms coeff * fold_mode(factor). Terms share the
// FactorPairs by reference; the tensor itself is immutable.
class FactoredTensor {
  public:
    struct Term {
        double coeff;
        std::shared_ptr<const FactorPair> factor;
    };

    FactoredTensor() = default;
    explicit FactoredTensor(Shape shape) : shape_(std::move(shape)) {}
    FactoredTensor(Shape shape, std::vector<Term> terms);

    const Shape& shape() const { return shape_; }
    const std::vector<Term>& terms() const { return terms_; }

    FactoredTensor& add_term(double coeff, std::shared_ptr<const FactorPair> factor);

    DenseTensor densify() const;

  private:
    Shape shape_;
    std::vector<Term> terms_;
};

// Element at a 1-based multi-index: sum of per-term inner products of one
// left row and one right row, O(sum_i k_i) per element.
double factored_element(const FactoredTensor& x, const MultiIndex& idx);

// Elements at every index of a sparse support, in canonical entry order.
class SparseTensorCoo;
enum class Exec;
std::vector<double> factored_elements_at(const FactoredTensor& x, const SparseTensorCoo& at, Exec exec);

} // namespace nort
