#pragma once

#include <Eigen/Core>
#include <vector>

#include "nort/shape.hpp"

namespace nort {

// Materialized tensor, first mode fastest in memory. Test oracle and
// diagnostic-scale helper only; solver paths never construct one.
class DenseTensor {
  public:
    DenseTensor() = default;
    explicit DenseTensor(Shape shape, double fill = 0.0)
        : shape_(std::move(shape)), data_(static_cast<std::size_t>(shape_.numel()), fill) {}

    const Shape& shape() const { return shape_; }
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    double at(const MultiIndex& idx) const { return data_[static_cast<std::size_t>(shape_.linear_offset(idx))]; }
    double& at(const MultiIndex& idx) { return data_[static_cast<std::size_t>(shape_.linear_offset(idx))]; }

    double frobenius_norm() const;
    double max_abs() const;

  private:
    Shape shape_;
    std::vector<double> data_;
};

// Mode-d unfolding as an I^d x (I^pi / I^d) matrix, entries placed per
// unfold_index. Inverse: dense_fold.
Eigen::MatrixXd dense_unfold(const DenseTensor& t, int d);
DenseTensor dense_fold(const Eigen::MatrixXd& m, int d, const Shape& shape);

} // namespace nort
