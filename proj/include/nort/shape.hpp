#pragma once

#include <cstdint>
#include <initializer_list>
#include <utility>
#include <vector>

#include "nort/errors.hpp"

namespace nort {

using index_t = std::int64_t;

// Multi-index into an order-M tensor, 1-based in the public data model.
using MultiIndex = std::vector<index_t>;

// Dimensions (I^1, ..., I^M) of an order-M tensor, M >= 2.
class Shape {
  public:
    Shape() = default;
    explicit Shape(std::vector<index_t> dims);
    Shape(std::initializer_list<index_t> dims) : Shape(std::vector<index_t>(dims)) {}

    int order() const { return static_cast<int>(dims_.size()); }
    index_t dim(int d) const { return dims_[static_cast<std::size_t>(d - 1)]; } // 1-based mode
    const std::vector<index_t>& dims() const { return dims_; }
    index_t numel() const { return numel_; }

    bool operator==(const Shape& o) const { return dims_ == o.dims_; }
    bool operator!=(const Shape& o) const { return !(*this == o); }

    // Rows (I^d) and columns (I^pi / I^d) of the mode-d unfolding.
    index_t unfold_rows(int d) const;
    index_t unfold_cols(int d) const;

    void check_mode(int d) const;
    void check_index(const MultiIndex& idx) const;

    // Linear offset (0-based, first mode fastest) of a 1-based multi-index,
    // and its inverse. This is the storage order of DenseTensor.
    index_t linear_offset(const MultiIndex& idx) const;
    MultiIndex index_at(index_t offset) const;

  private:
    std::vector<index_t> dims_;
    index_t numel_ = 0;
};

// Mode-d unfolding of `idx`: row is the mode-d coordinate, and the column
// enumerates the remaining modes, earliest mode fastest:
//   col = 1 + sum_{l != d} (i_l - 1) * prod_{m < l, m != d} I^m
std::pair<index_t, index_t> unfold_index(int d, const MultiIndex& idx, const Shape& shape);

// Exact inverse of unfold_index for the same mode and shape.
MultiIndex fold_index(int d, index_t row, index_t col, const Shape& shape);

// Precomputed strides for one mode's unfolding; used by the product kernels
// so they never re-derive the index map in inner loops. All 0-based.
class ModeUnfold {
  public:
    ModeUnfold(const Shape& shape, int d); // d is 1-based

    int mode() const { return d_; }
    index_t rows() const { return rows_; }
    index_t cols() const { return cols_; }

    // Column stride (0-based) contributed by mode l (1-based, l != d).
    index_t stride(int l) const { return strides_[static_cast<std::size_t>(l - 1)]; }

    index_t col0_of(const MultiIndex& idx) const; // 0-based column
    MultiIndex index_of(index_t row0, index_t col0) const;

  private:
    int d_;
    index_t rows_, cols_;
    std::vector<index_t> dims_;
    std::vector<index_t> strides_; // strides_[d-1] unused (0)
};

} // namespace nort
