#include "nort/splr.hpp"

#include <cmath>

#include "nort/dense_tensor.hpp"

namespace nort {

namespace {

// Co-enumeration of the modes outside {target i, term j}: for every
// combination of the remaining coordinates, the 0-based base offsets into
// the mode-j unfolding columns (vbase) and the mode-i unfolding columns
// (cbase). Within a combination, the target coordinate advances vbase by
// stride_i_in_j and the term coordinate advances cbase by stride_j_in_i.
struct KronPlan {
    index_t rest = 1;
    index_t stride_i_in_j = 1;
    index_t stride_j_in_i = 1;
    std::vector<index_t> vbase, cbase;
    audit::Charge charge;

    KronPlan(const Shape& shape, int i, int j) {
        ModeUnfold mj(shape, j), mi(shape, i);
        stride_i_in_j = mj.stride(i);
        stride_j_in_i = mi.stride(j);
        const int m = shape.order();
        std::vector<int> rest_modes;
        for (int l = 1; l <= m; ++l)
            if (l != i && l != j)
                rest_modes.push_back(l);
        for (int l : rest_modes)
            rest *= shape.dim(l);
        vbase.assign(static_cast<std::size_t>(rest), 0);
        cbase.assign(static_cast<std::size_t>(rest), 0);
        charge.resize(static_cast<std::int64_t>(2 * sizeof(index_t)) * rest);

        std::vector<index_t> counter(rest_modes.size(), 0);
        index_t vb = 0, cb = 0;
        for (index_t r = 0; r < rest; ++r) {
            vbase[static_cast<std::size_t>(r)] = vb;
            cbase[static_cast<std::size_t>(r)] = cb;
            for (std::size_t t = 0; t < rest_modes.size(); ++t) {
                const int l = rest_modes[t];
                vb += mj.stride(l);
                cb += mi.stride(l);
                if (++counter[t] < shape.dim(l))
                    break;
                counter[t] = 0;
                vb -= mj.stride(l) * shape.dim(l);
                cb -= mi.stride(l) * shape.dim(l);
            }
        }
    }
};

// out[c] += coeff * (a^T [fold_j(U diag V^T)]_<i>)[c]
void kron_accumulate_left(const FactorPair& f, int i, double coeff, const Eigen::VectorXd& a,
                          Eigen::VectorXd& out, const Shape& shape, Exec exec) {
    const index_t k = f.rank();
    if (k == 0)
        return;
    const int j = f.mode();
    KronPlan plan(shape, i, j);
    const index_t ni = shape.dim(i), nj = shape.dim(j);
    const index_t sv = plan.stride_i_in_j, sc = plan.stride_j_in_i;
    const RowMat& u = f.left();
    const RowMat& v = f.right();

    Eigen::VectorXd scale(k);
    for (index_t p = 0; p < k; ++p)
        scale(p) = coeff * f.sigma(p);

#pragma omp parallel if (exec == Exec::parallel)
    {
        Eigen::VectorXd g(k);
#pragma omp for schedule(static)
        for (index_t r = 0; r < plan.rest; ++r) {
            g.setZero();
            const index_t vb = plan.vbase[static_cast<std::size_t>(r)];
            for (index_t t = 0; t < ni; ++t)
                g.noalias() += a(t) * v.row(vb + t * sv).transpose();
            const index_t cb = plan.cbase[static_cast<std::size_t>(r)];
            for (index_t s = 0; s < nj; ++s) {
                double acc = 0;
                for (index_t p = 0; p < k; ++p)
                    acc += u(s, p) * scale(p) * g(p);
                out(cb + s * sc) += acc;
            }
        }
    }
}

// out[r] += coeff * ([fold_j(U diag V^T)]_<i> b)[r]
void kron_accumulate_right(const FactorPair& f, int i, double coeff, const Eigen::VectorXd& b,
                           Eigen::VectorXd& out, const Shape& shape, Exec exec) {
    const index_t k = f.rank();
    if (k == 0)
        return;
    const int j = f.mode();
    KronPlan plan(shape, i, j);
    const index_t ni = shape.dim(i), nj = shape.dim(j);
    const index_t sv = plan.stride_i_in_j, sc = plan.stride_j_in_i;
    const RowMat& u = f.left();
    const RowMat& v = f.right();

    RowMat h(plan.rest, k); // h(r, :) = sum_s b[cbase+s*sc] * u(s, :)
    audit::Charge hcharge(static_cast<std::int64_t>(sizeof(double)) * h.size());
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
    for (index_t r = 0; r < plan.rest; ++r) {
        const index_t cb = plan.cbase[static_cast<std::size_t>(r)];
        h.row(r).setZero();
        for (index_t s = 0; s < nj; ++s)
            h.row(r).noalias() += b(cb + s * sc) * u.row(s);
    }
    Eigen::VectorXd scale(k);
    for (index_t p = 0; p < k; ++p)
        scale(p) = coeff * f.sigma(p);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
    for (index_t t = 0; t < ni; ++t) {
        double acc = 0;
        for (index_t r = 0; r < plan.rest; ++r) {
            const index_t vb = plan.vbase[static_cast<std::size_t>(r)] + t * sv;
            for (index_t p = 0; p < k; ++p)
                acc += v(vb, p) * scale(p) * h(r, p);
        }
        out(t) += acc;
    }
}

// Same-mode term: plain matrix products.
void direct_accumulate_left(const FactorPair& f, double coeff, const Eigen::VectorXd& a, Eigen::VectorXd& out) {
    if (f.rank() == 0)
        return;
    Eigen::VectorXd t = f.left().transpose() * a;
    for (index_t p = 0; p < f.rank(); ++p)
        t(p) *= coeff * f.sigma(p);
    out.noalias() += f.right() * t;
}

void direct_accumulate_right(const FactorPair& f, double coeff, const Eigen::VectorXd& b, Eigen::VectorXd& out) {
    if (f.rank() == 0)
        return;
    Eigen::VectorXd t = f.right().transpose() * b;
    for (index_t p = 0; p < f.rank(); ++p)
        t(p) *= coeff * f.sigma(p);
    out.noalias() += f.left() * t;
}

void check_term_mode(int i, int j) {
    if (i == j)
        throw ConfigError("kron_unfold kernels require the target mode to differ from the factor mode");
}

} // namespace

Eigen::VectorXd kron_unfold_left(const FactorPair& factor, const Shape& shape, int i, const Eigen::VectorXd& a,
                                 Exec exec) {
    check_term_mode(i, factor.mode());
    shape.check_mode(i);
    if (!factor.matches_shape(shape))
        throw ConfigError("factor does not match the shape");
    if (a.size() != shape.unfold_rows(i))
        throw ConfigError("vector length does not match the mode unfolding rows");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(shape.unfold_cols(i));
    kron_accumulate_left(factor, i, 1.0, a, out, shape, exec);
    return out;
}

Eigen::VectorXd kron_unfold_right(const FactorPair& factor, const Shape& shape, int i, const Eigen::VectorXd& b,
                                  Exec exec) {
    check_term_mode(i, factor.mode());
    shape.check_mode(i);
    if (!factor.matches_shape(shape))
        throw ConfigError("factor does not match the shape");
    if (b.size() != shape.unfold_cols(i))
        throw ConfigError("vector length does not match the mode unfolding columns");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(shape.unfold_rows(i));
    kron_accumulate_right(factor, i, 1.0, b, out, shape, exec);
    return out;
}

Eigen::VectorXd sparse_unfold_left(const SparseTensorCoo& s, int i, const Eigen::VectorXd& a) {
    const Shape& shape = s.shape();
    shape.check_mode(i);
    if (a.size() != shape.unfold_rows(i))
        throw ConfigError("vector length does not match the mode unfolding rows");
    ModeUnfold mu(shape, i);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(mu.cols());
    const int m = shape.order();
    const index_t* idx = s.flat_indices().data();
    MultiIndex scratch(static_cast<std::size_t>(m));
    for (index_t e = 0; e < s.nnz(); ++e) {
        const index_t* row = idx + e * m;
        std::copy_n(row, m, scratch.begin());
        out(mu.col0_of(scratch)) += s.value(e) * a(row[i - 1] - 1);
    }
    return out;
}

Eigen::VectorXd sparse_unfold_right(const SparseTensorCoo& s, int i, const Eigen::VectorXd& b) {
    const Shape& shape = s.shape();
    shape.check_mode(i);
    if (b.size() != shape.unfold_cols(i))
        throw ConfigError("vector length does not match the mode unfolding columns");
    ModeUnfold mu(shape, i);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(mu.rows());
    const int m = shape.order();
    const index_t* idx = s.flat_indices().data();
    MultiIndex scratch(static_cast<std::size_t>(m));
    for (index_t e = 0; e < s.nnz(); ++e) {
        const index_t* row = idx + e * m;
        std::copy_n(row, m, scratch.begin());
        out(row[i - 1] - 1) += s.value(e) * b(mu.col0_of(scratch));
    }
    return out;
}

SplrOperator::SplrOperator(Shape shape, int target_mode, std::vector<LowRankTerm> lowrank,
                           std::optional<SparseTerm> sparse, std::optional<Laplacian> laplacian, Exec exec)
    : shape_(std::move(shape)), target_mode_(target_mode), rows_(shape_.unfold_rows(target_mode)),
      cols_(shape_.unfold_cols(target_mode)), exec_(exec) {
    for (const auto& t : lowrank)
        if (!t.factor || !t.factor->matches_shape(shape_))
            throw ConfigError("low-rank term does not match the operator shape");
    if (laplacian && laplacian->mu != 0) {
        if (laplacian->g.rows() != shape_.dim(1) || laplacian->g.cols() != shape_.dim(1))
            throw ConfigError("Laplacian matrix must be I^1 x I^1");
        terms_ = laplacian_premultiply(shape_, lowrank, laplacian->mu, laplacian->g);
    } else {
        terms_ = std::move(lowrank);
    }

    if (sparse && sparse->tensor && sparse->tensor->nnz() > 0 && sparse->coeff != 0) {
        const SparseTensorCoo& s = *sparse->tensor;
        if (s.shape() != shape_)
            throw ConfigError("sparse term does not match the operator shape");
        const std::vector<double>* vals = sparse->values ? sparse->values.get() : &s.values();
        if (static_cast<index_t>(vals->size()) != s.nnz())
            throw ConfigError("sparse term value override has the wrong length");
        sparse_coeff_ = sparse->coeff;

        const index_t nnz = s.nnz();
        const int m = shape_.order();
        ModeUnfold mu(shape_, target_mode_);
        row_ptr_.assign(static_cast<std::size_t>(rows_ + 1), 0);
        col_ptr_.assign(static_cast<std::size_t>(cols_ + 1), 0);
        csr_col_.resize(static_cast<std::size_t>(nnz));
        csr_val_.resize(static_cast<std::size_t>(nnz));
        csc_row_.resize(static_cast<std::size_t>(nnz));
        csc_val_.resize(static_cast<std::size_t>(nnz));
        charge_.resize(static_cast<std::int64_t>((row_ptr_.size() + col_ptr_.size() + 2 * nnz) * sizeof(index_t) +
                                                 2 * nnz * sizeof(double)));

        const index_t* idx = s.flat_indices().data();
        MultiIndex scratch(static_cast<std::size_t>(m));
        // Counting sort by unfolding row, then by column.
        std::vector<index_t> erow(static_cast<std::size_t>(nnz)), ecol(static_cast<std::size_t>(nnz));
        for (index_t e = 0; e < nnz; ++e) {
            const index_t* r = idx + e * m;
            std::copy_n(r, m, scratch.begin());
            erow[static_cast<std::size_t>(e)] = r[target_mode_ - 1] - 1;
            ecol[static_cast<std::size_t>(e)] = mu.col0_of(scratch);
            ++row_ptr_[static_cast<std::size_t>(erow[static_cast<std::size_t>(e)] + 1)];
            ++col_ptr_[static_cast<std::size_t>(ecol[static_cast<std::size_t>(e)] + 1)];
        }
        for (index_t r = 0; r < rows_; ++r)
            row_ptr_[static_cast<std::size_t>(r + 1)] += row_ptr_[static_cast<std::size_t>(r)];
        for (index_t c = 0; c < cols_; ++c)
            col_ptr_[static_cast<std::size_t>(c + 1)] += col_ptr_[static_cast<std::size_t>(c)];
        std::vector<index_t> rfill(row_ptr_.begin(), row_ptr_.end() - 1);
        std::vector<index_t> cfill(col_ptr_.begin(), col_ptr_.end() - 1);
        for (index_t e = 0; e < nnz; ++e) {
            const double v = (*vals)[static_cast<std::size_t>(e)];
            index_t& rs = rfill[static_cast<std::size_t>(erow[static_cast<std::size_t>(e)])];
            csr_col_[static_cast<std::size_t>(rs)] = ecol[static_cast<std::size_t>(e)];
            csr_val_[static_cast<std::size_t>(rs)] = v;
            ++rs;
            index_t& cs = cfill[static_cast<std::size_t>(ecol[static_cast<std::size_t>(e)])];
            csc_row_[static_cast<std::size_t>(cs)] = erow[static_cast<std::size_t>(e)];
            csc_val_[static_cast<std::size_t>(cs)] = v;
            ++cs;
        }
    }
}

Eigen::VectorXd SplrOperator::left(const Eigen::VectorXd& a) const {
    if (a.size() != rows_)
        throw ConfigError("left-product vector length mismatch");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(cols_);
    for (const auto& t : terms_) {
        if (t.factor->mode() == target_mode_)
            direct_accumulate_left(*t.factor, t.coeff, a, out);
        else
            kron_accumulate_left(*t.factor, target_mode_, t.coeff, a, out, shape_, exec_);
    }
    if (!csc_val_.empty()) {
        const double c = sparse_coeff_;
#pragma omp parallel for schedule(static) if (exec_ == Exec::parallel)
        for (index_t col = 0; col < cols_; ++col) {
            double acc = 0;
            for (index_t e = col_ptr_[static_cast<std::size_t>(col)]; e < col_ptr_[static_cast<std::size_t>(col + 1)];
                 ++e)
                acc += csc_val_[static_cast<std::size_t>(e)] * a(csc_row_[static_cast<std::size_t>(e)]);
            out(col) += c * acc;
        }
    }
    return out;
}

Eigen::VectorXd SplrOperator::right(const Eigen::VectorXd& b) const {
    if (b.size() != cols_)
        throw ConfigError("right-product vector length mismatch");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(rows_);
    for (const auto& t : terms_) {
        if (t.factor->mode() == target_mode_)
            direct_accumulate_right(*t.factor, t.coeff, b, out);
        else
            kron_accumulate_right(*t.factor, target_mode_, t.coeff, b, out, shape_, exec_);
    }
    if (!csr_val_.empty()) {
        const double c = sparse_coeff_;
#pragma omp parallel for schedule(static) if (exec_ == Exec::parallel)
        for (index_t row = 0; row < rows_; ++row) {
            double acc = 0;
            for (index_t e = row_ptr_[static_cast<std::size_t>(row)]; e < row_ptr_[static_cast<std::size_t>(row + 1)];
                 ++e)
                acc += csr_val_[static_cast<std::size_t>(e)] * b(csr_col_[static_cast<std::size_t>(e)]);
            out(row) += c * acc;
        }
    }
    return out;
}

Eigen::MatrixXd SplrOperator::densify_unfolding() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows_, cols_);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(rows_);
    for (index_t r = 0; r < rows_; ++r) {
        e(r) = 1.0;
        m.row(r) = left(e).transpose();
        e(r) = 0.0;
    }
    return m;
}

std::vector<SplrOperator::LowRankTerm> laplacian_premultiply(const Shape& shape,
                                                             const std::vector<SplrOperator::LowRankTerm>& terms,
                                                             double mu, const Eigen::MatrixXd& g) {
    if (mu == 0)
        return terms;
    const index_t n1 = shape.dim(1);
    Eigen::MatrixXd w = Eigen::MatrixXd::Identity(n1, n1) - mu * g;
    std::vector<SplrOperator::LowRankTerm> out;
    out.reserve(terms.size());
    for (const auto& t : terms) {
        const FactorPair& f = *t.factor;
        if (f.rank() == 0) {
            out.push_back(t);
            continue;
        }
        if (f.mode() == 1) {
            RowMat left = w * f.left();
            RowMat right = f.right();
            for (index_t p = 0; p < f.rank(); ++p)
                right.col(p) *= f.sigma(p);
            out.push_back({t.coeff, std::make_shared<FactorPair>(1, std::move(left), std::move(right))});
        } else {
            // Mode 1 is the fastest index in any other mode's unfolding, so
            // each right column is a stack of contiguous length-I^1 fibers.
            RowMat right = f.right();
            const index_t fibers = right.rows() / n1;
            for (index_t p = 0; p < f.rank(); ++p) {
                Eigen::VectorXd col = right.col(p) * f.sigma(p);
                Eigen::Map<Eigen::MatrixXd> view(col.data(), n1, fibers);
                Eigen::MatrixXd transformed = w * view;
                right.col(p) = Eigen::Map<Eigen::VectorXd>(transformed.data(), right.rows());
            }
            out.push_back({t.coeff, std::make_shared<FactorPair>(f.mode(), f.left(), std::move(right))});
        }
    }
    return out;
}

namespace {

// <fold_i(A), fold_j(B)> for factor pairs; same mode reduces to a trace of
// small Gram matrices, cross mode goes through the fold-free kernels.
double pair_inner(const FactorPair& a, const FactorPair& b, const Shape& shape, Exec exec) {
    if (a.rank() == 0 || b.rank() == 0)
        return 0;
    if (a.mode() == b.mode()) {
        Eigen::MatrixXd gu = a.left().transpose() * b.left();
        Eigen::MatrixXd gv = a.right().transpose() * b.right();
        double s = 0;
        for (index_t p = 0; p < a.rank(); ++p)
            for (index_t q = 0; q < b.rank(); ++q)
                s += a.sigma(p) * b.sigma(q) * gu(p, q) * gv(p, q);
        return s;
    }
    double s = 0;
    for (index_t p = 0; p < a.rank(); ++p) {
        Eigen::VectorXd va = a.right().col(p);
        Eigen::VectorXd z = Eigen::VectorXd::Zero(shape.dim(a.mode()));
        kron_accumulate_right(b, a.mode(), 1.0, va, z, shape, exec);
        s += a.sigma(p) * a.left().col(p).dot(z);
    }
    return s;
}

} // namespace

double factored_inner(const FactoredTensor& a, const FactoredTensor& b, Exec exec) {
    if (a.shape() != b.shape())
        throw ConfigError("factored tensors have different shapes");
    double s = 0;
    for (const auto& ta : a.terms())
        for (const auto& tb : b.terms())
            s += ta.coeff * tb.coeff * pair_inner(*ta.factor, *tb.factor, a.shape(), exec);
    return s;
}

double factored_norm(const FactoredTensor& a, Exec exec) {
    return std::sqrt(std::max(0.0, factored_inner(a, a, exec)));
}

} // namespace nort
