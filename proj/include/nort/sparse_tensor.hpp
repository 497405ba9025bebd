#pragma once

#include <span>
#include <string>
#include <vector>

#include "nort/alloc_audit.hpp"
#include "nort/shape.hpp"

namespace nort {

class DenseTensor;

// Order-M sparse tensor in coordinate format, indices stored flat (nnz x M,
// 1-based). Canonical form: indices within shape, no duplicates, entries
// sorted lexicographically by multi-index.
class SparseTensorCoo {
  public:
    SparseTensorCoo() = default;
    // Validates, sorts into canonical order, rejects duplicates.
    SparseTensorCoo(Shape shape, std::vector<index_t> indices, std::vector<double> values);

    const Shape& shape() const { return shape_; }
    index_t nnz() const { return static_cast<index_t>(values_.size()); }

    std::span<const index_t> index_row(index_t i) const {
        return {indices_.data() + i * shape_.order(), static_cast<std::size_t>(shape_.order())};
    }
    MultiIndex index_at_entry(index_t i) const {
        auto r = index_row(i);
        return MultiIndex(r.begin(), r.end());
    }
    double value(index_t i) const { return values_[static_cast<std::size_t>(i)]; }

    const std::vector<index_t>& flat_indices() const { return indices_; }
    const std::vector<double>& values() const { return values_; }

    // Replace values in place, keeping the support. Sizes must match.
    void set_values(std::vector<double> values);

    double frobenius_norm() const;
    double max_abs() const;

    DenseTensor densify() const;

    bool same_support(const SparseTensorCoo& o) const;

  private:
    Shape shape_;
    std::vector<index_t> indices_; // nnz * M
    std::vector<double> values_;
    audit::Charge charge_;
};

// Text COO format. Line 1: "tensor <M> <I1> ... <IM>"; each following
// non-empty line: "<i1> ... <iM> <value>" (1-based indices); '#' starts a
// comment line. Values are written with shortest round-trip formatting.
SparseTensorCoo coo_read(const std::string& path);
void coo_write(const SparseTensorCoo& tensor, const std::string& path);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

} // namespace nort
