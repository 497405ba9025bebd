#include "nort/dense_tensor.hpp"

#include <cmath>

namespace nort {

double DenseTensor::frobenius_norm() const {
    double s = 0;
    for (double v : data_)
        s += v * v;
    return std::sqrt(s);
}

double DenseTensor::max_abs() const {
    double s = 0;
    for (double v : data_)
        s = std::max(s, std::abs(v));
    return s;
}

Eigen::MatrixXd dense_unfold(const DenseTensor& t, int d) {
    const Shape& shape = t.shape();
    ModeUnfold mu(shape, d);
    Eigen::MatrixXd m(mu.rows(), mu.cols());
    for (index_t off = 0; off < shape.numel(); ++off) {
        MultiIndex idx = shape.index_at(off);
        index_t row0 = idx[static_cast<std::size_t>(d - 1)] - 1;
        m(row0, mu.col0_of(idx)) = t.data()[static_cast<std::size_t>(off)];
    }
    return m;
}

DenseTensor dense_fold(const Eigen::MatrixXd& m, int d, const Shape& shape) {
    ModeUnfold mu(shape, d);
    if (m.rows() != mu.rows() || m.cols() != mu.cols())
        throw BoundsError("matrix size does not match the mode-" + std::to_string(d) + " unfolding");
    DenseTensor t(shape);
    for (index_t off = 0; off < shape.numel(); ++off) {
        MultiIndex idx = shape.index_at(off);
        index_t row0 = idx[static_cast<std::size_t>(d - 1)] - 1;
        t.data()[static_cast<std::size_t>(off)] = m(row0, mu.col0_of(idx));
    }
    return t;
}

} // namespace nort
