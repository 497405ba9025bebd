#include "nort/sparse_tensor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "nort/dense_tensor.hpp"

namespace nort {

namespace {

int compare_rows(const index_t* a, const index_t* b, int m) {
    for (int d = 0; d < m; ++d) {
        if (a[d] < b[d])
            return -1;
        if (a[d] > b[d])
            return 1;
    }
    return 0;
}

std::string row_string(const index_t* r, int m) {
    std::ostringstream oss;
    oss << '(';
    for (int d = 0; d < m; ++d)
        oss << (d ? "," : "") << r[d];
    oss << ')';
    return oss.str();
}

} // namespace

SparseTensorCoo::SparseTensorCoo(Shape shape, std::vector<index_t> indices, std::vector<double> values)
    : shape_(std::move(shape)), indices_(std::move(indices)), values_(std::move(values)) {
    const int m = shape_.order();
    if (indices_.size() != values_.size() * static_cast<std::size_t>(m))
        throw DataError("index array size does not match value count");
    const index_t n = nnz();
    MultiIndex scratch(static_cast<std::size_t>(m));
    for (index_t i = 0; i < n; ++i) {
        auto r = index_row(i);
        std::copy(r.begin(), r.end(), scratch.begin());
        shape_.check_index(scratch);
    }

    std::vector<index_t> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](index_t a, index_t b) {
        return compare_rows(indices_.data() + a * m, indices_.data() + b * m, m) < 0;
    });
    std::vector<index_t> sorted_idx(indices_.size());
    std::vector<double> sorted_vals(values_.size());
    for (index_t i = 0; i < n; ++i) {
        const index_t src = perm[static_cast<std::size_t>(i)];
        std::copy_n(indices_.data() + src * m, m, sorted_idx.data() + i * m);
        sorted_vals[static_cast<std::size_t>(i)] = values_[static_cast<std::size_t>(src)];
    }
    for (index_t i = 1; i < n; ++i)
        if (compare_rows(sorted_idx.data() + (i - 1) * m, sorted_idx.data() + i * m, m) == 0)
            throw DataError("duplicate multi-index " + row_string(sorted_idx.data() + i * m, m));
    indices_ = std::move(sorted_idx);
    values_ = std::move(sorted_vals);
    charge_.resize(static_cast<std::int64_t>(indices_.capacity() * sizeof(index_t) +
                                             values_.capacity() * sizeof(double)));
}

void SparseTensorCoo::set_values(std::vector<double> values) {
    if (values.size() != values_.size())
        throw DataError("value count does not match entry count");
    values_ = std::move(values);
}

double SparseTensorCoo::frobenius_norm() const {
    double s = 0;
    for (double v : values_)
        s += v * v;
    return std::sqrt(s);
}

double SparseTensorCoo::max_abs() const {
    double s = 0;
    for (double v : values_)
        s = std::max(s, std::abs(v));
    return s;
}

DenseTensor SparseTensorCoo::densify() const {
    DenseTensor t(shape_);
    for (index_t i = 0; i < nnz(); ++i)
        t.at(index_at_entry(i)) = value(i);
    return t;
}

bool SparseTensorCoo::same_support(const SparseTensorCoo& o) const {
    return shape_ == o.shape_ && indices_ == o.indices_;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, long line_no, const std::string& what) {
    throw DataError(path + ":" + std::to_string(line_no) + ": " + what);
}

std::vector<std::string> tokens_of(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream iss(line);
    std::string t;
    while (iss >> t)
        toks.push_back(t);
    return toks;
}

index_t parse_int(const std::string& tok, const std::string& path, long line_no) {
    index_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        parse_fail(path, line_no, "expected integer, got '" + tok + "'");
    return v;
}

double parse_real(const std::string& tok, const std::string& path, long line_no) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        parse_fail(path, line_no, "expected real value, got '" + tok + "'");
    return v;
}

} // namespace

SparseTensorCoo coo_read(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open '" + path + "'");
    std::string line;
    long line_no = 0;

    Shape shape;
    int order = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#')
            continue;
        auto toks = tokens_of(line);
        if (toks.empty())
            continue;
        if (toks[0] != "tensor")
            parse_fail(path, line_no, "expected 'tensor <M> <I1> ... <IM>' header");
        if (toks.size() < 2)
            parse_fail(path, line_no, "missing tensor order");
        order = static_cast<int>(parse_int(toks[1], path, line_no));
        if (order < 2 || static_cast<int>(toks.size()) != 2 + order)
            parse_fail(path, line_no, "header dimension count does not match order");
        std::vector<index_t> dims;
        for (int d = 0; d < order; ++d)
            dims.push_back(parse_int(toks[static_cast<std::size_t>(2 + d)], path, line_no));
        try {
            shape = Shape(dims);
        } catch (const std::exception& e) {
            parse_fail(path, line_no, e.what());
        }
        break;
    }
    if (order == 0)
        throw DataError(path + ": missing header line");

    std::vector<index_t> indices;
    std::vector<double> values;
    std::vector<long> entry_lines;
    MultiIndex idx(static_cast<std::size_t>(order));
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#')
            continue;
        auto toks = tokens_of(line);
        if (toks.empty())
            continue;
        if (static_cast<int>(toks.size()) != order + 1)
            parse_fail(path, line_no, "expected " + std::to_string(order) + " indices and a value");
        for (int d = 0; d < order; ++d)
            idx[static_cast<std::size_t>(d)] = parse_int(toks[static_cast<std::size_t>(d)], path, line_no);
        try {
            shape.check_index(idx);
        } catch (const std::exception& e) {
            parse_fail(path, line_no, e.what());
        }
        double v = parse_real(toks[static_cast<std::size_t>(order)], path, line_no);
        indices.insert(indices.end(), idx.begin(), idx.end());
        values.push_back(v);
        entry_lines.push_back(line_no);
    }

    // Duplicate detection that names the offending line.
    const index_t n = static_cast<index_t>(values.size());
    std::vector<index_t> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](index_t a, index_t b) {
        return compare_rows(indices.data() + a * order, indices.data() + b * order, order) < 0;
    });
    for (index_t i = 1; i < n; ++i) {
        const index_t a = perm[static_cast<std::size_t>(i - 1)], b = perm[static_cast<std::size_t>(i)];
        if (compare_rows(indices.data() + a * order, indices.data() + b * order, order) == 0)
            parse_fail(path, std::max(entry_lines[static_cast<std::size_t>(a)], entry_lines[static_cast<std::size_t>(b)]),
                       "duplicate multi-index " + row_string(indices.data() + b * order, order));
    }

    return SparseTensorCoo(shape, std::move(indices), std::move(values));
}

void coo_write(const SparseTensorCoo& tensor, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write '" + path + "'");
    out << "tensor " << tensor.shape().order();
    for (index_t d : tensor.shape().dims())
        out << ' ' << d;
    out << '\n';
    const int m = tensor.shape().order();
    for (index_t i = 0; i < tensor.nnz(); ++i) {
        auto r = tensor.index_row(i);
        for (int d = 0; d < m; ++d)
            out << r[static_cast<std::size_t>(d)] << ' ';
        out << format_double(tensor.value(i)) << '\n';
    }
    if (!out)
        throw DataError("write failed for '" + path + "'");
}

} // namespace nort
