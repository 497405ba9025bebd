#include "nort/shape.hpp"

#include <limits>
#include <string>

namespace nort {

Shape::Shape(std::vector<index_t> dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2)
        throw ConfigError("shape must have order >= 2, got " + std::to_string(dims_.size()));
    numel_ = 1;
    for (index_t d : dims_) {
        if (d < 1)
            throw ConfigError("shape dimensions must be >= 1");
        if (numel_ > std::numeric_limits<index_t>::max() / d)
            throw ConfigError("shape element count overflows the index range");
        numel_ *= d;
    }
}

index_t Shape::unfold_rows(int d) const {
    check_mode(d);
    return dim(d);
}

index_t Shape::unfold_cols(int d) const {
    check_mode(d);
    return numel_ / dim(d);
}

void Shape::check_mode(int d) const {
    if (d < 1 || d > order())
        throw BoundsError("mode " + std::to_string(d) + " out of range 1.." + std::to_string(order()));
}

void Shape::check_index(const MultiIndex& idx) const {
    if (static_cast<int>(idx.size()) != order())
        throw BoundsError("multi-index has " + std::to_string(idx.size()) + " coordinates, expected " +
                          std::to_string(order()));
    for (int l = 1; l <= order(); ++l) {
        index_t c = idx[static_cast<std::size_t>(l - 1)];
        if (c < 1 || c > dim(l))
            throw BoundsError("coordinate " + std::to_string(c) + " out of range 1.." + std::to_string(dim(l)) +
                              " on mode " + std::to_string(l));
    }
}

index_t Shape::linear_offset(const MultiIndex& idx) const {
    check_index(idx);
    index_t off = 0, stride = 1;
    for (int l = 0; l < order(); ++l) {
        off += (idx[static_cast<std::size_t>(l)] - 1) * stride;
        stride *= dims_[static_cast<std::size_t>(l)];
    }
    return off;
}

MultiIndex Shape::index_at(index_t offset) const {
    MultiIndex idx(static_cast<std::size_t>(order()));
    for (int l = 0; l < order(); ++l) {
        idx[static_cast<std::size_t>(l)] = offset % dims_[static_cast<std::size_t>(l)] + 1;
        offset /= dims_[static_cast<std::size_t>(l)];
    }
    return idx;
}

std::pair<index_t, index_t> unfold_index(int d, const MultiIndex& idx, const Shape& shape) {
    shape.check_mode(d);
    shape.check_index(idx);
    index_t row = idx[static_cast<std::size_t>(d - 1)];
    index_t col = 1, stride = 1;
    for (int l = 1; l <= shape.order(); ++l) {
        if (l == d)
            continue;
        col += (idx[static_cast<std::size_t>(l - 1)] - 1) * stride;
        stride *= shape.dim(l);
    }
    return {row, col};
}

MultiIndex fold_index(int d, index_t row, index_t col, const Shape& shape) {
    shape.check_mode(d);
    if (row < 1 || row > shape.unfold_rows(d))
        throw BoundsError("unfolding row " + std::to_string(row) + " out of range");
    if (col < 1 || col > shape.unfold_cols(d))
        throw BoundsError("unfolding column " + std::to_string(col) + " out of range");
    MultiIndex idx(static_cast<std::size_t>(shape.order()));
    idx[static_cast<std::size_t>(d - 1)] = row;
    index_t rem = col - 1;
    for (int l = 1; l <= shape.order(); ++l) {
        if (l == d)
            continue;
        idx[static_cast<std::size_t>(l - 1)] = rem % shape.dim(l) + 1;
        rem /= shape.dim(l);
    }
    return idx;
}

ModeUnfold::ModeUnfold(const Shape& shape, int d)
    : d_(d), rows_(shape.unfold_rows(d)), cols_(shape.unfold_cols(d)), dims_(shape.dims()),
      strides_(dims_.size(), 0) {
    index_t stride = 1;
    for (int l = 1; l <= shape.order(); ++l) {
        if (l == d)
            continue;
        strides_[static_cast<std::size_t>(l - 1)] = stride;
        stride *= shape.dim(l);
    }
}

index_t ModeUnfold::col0_of(const MultiIndex& idx) const {
    index_t col = 0;
    for (int l = 1; l <= static_cast<int>(dims_.size()); ++l) {
        if (l == d_)
            continue;
        col += (idx[static_cast<std::size_t>(l - 1)] - 1) * stride(l);
    }
    return col;
}

MultiIndex ModeUnfold::index_of(index_t row0, index_t col0) const {
    MultiIndex idx(dims_.size());
    idx[static_cast<std::size_t>(d_ - 1)] = row0 + 1;
    index_t rem = col0;
    for (int l = 1; l <= static_cast<int>(dims_.size()); ++l) {
        if (l == d_)
            continue;
        idx[static_cast<std::size_t>(l - 1)] = rem % dims_[static_cast<std::size_t>(l - 1)] + 1;
        rem /= dims_[static_cast<std::size_t>(l - 1)];
    }
    return idx;
}

} // namespace nort
