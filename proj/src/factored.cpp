#include "nort/factored.hpp"

#include "nort/dense_tensor.hpp"

namespace nort {

FactorPair::FactorPair(int mode, RowMat left, RowMat right, std::optional<Eigen::VectorXd> singvals)
    : mode_(mode), left_(std::move(left)), right_(std::move(right)), singvals_(std::move(singvals)) {
    if (left_.cols() != right_.cols())
        throw ConfigError("factor pair column counts differ");
    if (singvals_ && singvals_->size() != left_.cols())
        throw ConfigError("singular value count does not match factor rank");
    charge_.resize(static_cast<std::int64_t>(sizeof(double)) *
                   (left_.size() + right_.size() + (singvals_ ? singvals_->size() : 0)));
}

FactorPair FactorPair::zero(const Shape& shape, int mode) {
    shape.check_mode(mode);
    return FactorPair(mode, RowMat(shape.unfold_rows(mode), 0), RowMat(shape.unfold_cols(mode), 0),
                      Eigen::VectorXd(0));
}

Eigen::MatrixXd FactorPair::dense_matrix() const {
    if (rank() == 0)
        return Eigen::MatrixXd::Zero(left_.rows(), right_.rows());
    if (singvals_)
        return left_ * singvals_->asDiagonal() * right_.transpose();
    return left_ * right_.transpose();
}

bool FactorPair::matches_shape(const Shape& shape) const {
    return mode_ >= 1 && mode_ <= shape.order() && left_.rows() == shape.unfold_rows(mode_) &&
           right_.rows() == shape.unfold_cols(mode_);
}

FactoredTensor::FactoredTensor(Shape shape, std::vector<Term> terms)
    : shape_(std::move(shape)), terms_(std::move(terms)) {
    for (const Term& t : terms_)
        if (!t.factor || !t.factor->matches_shape(shape_))
            throw ConfigError("factored tensor term does not match the shape");
}

FactoredTensor& FactoredTensor::add_term(double coeff, std::shared_ptr<const FactorPair> factor) {
    if (!factor || !factor->matches_shape(shape_))
        throw ConfigError("factored tensor term does not match the shape");
    terms_.push_back({coeff, std::move(factor)});
    return *this;
}

DenseTensor FactoredTensor::densify() const {
    DenseTensor out(shape_);
    for (const Term& t : terms_) {
        if (t.factor->rank() == 0)
            continue;
        DenseTensor part = dense_fold(t.factor->dense_matrix(), t.factor->mode(), shape_);
        for (index_t i = 0; i < shape_.numel(); ++i)
            out.data()[static_cast<std::size_t>(i)] += t.coeff * part.data()[static_cast<std::size_t>(i)];
    }
    return out;
}

double factored_element(const FactoredTensor& x, const MultiIndex& idx) {
    x.shape().check_index(idx);
    double v = 0;
    for (const auto& term : x.terms()) {
        const FactorPair& f = *term.factor;
        if (f.rank() == 0)
            continue;
        auto [row, col] = unfold_index(f.mode(), idx, x.shape());
        double dot = 0;
        const index_t k = f.rank();
        for (index_t p = 0; p < k; ++p)
            dot += f.left()(row - 1, p) * f.sigma(p) * f.right()(col - 1, p);
        v += term.coeff * dot;
    }
    return v;
}

} // namespace nort
