#include "nort/lanczos.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>

namespace nort {

namespace {

// Deterministic uniform(-1,1) stream (splitmix64); avoids distribution
// implementation differences across standard libraries.
struct UniformStream {
    std::uint64_t state;
    explicit UniformStream(std::uint64_t seed) : state(seed ^ 0x9e3779b97f4a7c15ULL) {}
    double next() {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z = z ^ (z >> 31);
        return 2.0 * (static_cast<double>(z >> 11) * 0x1.0p-53) - 1.0;
    }
    void fill(Eigen::VectorXd& v) {
        for (index_t t = 0; t < v.size(); ++t)
            v(t) = next();
    }
};

// Twice-iterated classical Gram-Schmidt of w against the first j columns.
void reorthogonalize(const RowMat& basis, index_t j, Eigen::VectorXd& w) {
    if (j == 0)
        return;
    auto b = basis.leftCols(j);
    for (int pass = 0; pass < 2; ++pass)
        w.noalias() -= b * (b.transpose() * w);
}

} // namespace

PartialSvd lanczos_svd(const SplrOperator& op, index_t k_request, double tol, int max_inner,
                       std::uint64_t seed) {
    const index_t m = op.rows(), n = op.cols();
    const index_t minmn = std::min(m, n);
    if (k_request < 1 || k_request > minmn)
        throw ConfigError("k_request must lie in 1..min(rows, cols)");
    const index_t k = k_request;
    const index_t hard_cap = std::min<index_t>(minmn, static_cast<index_t>(max_inner) + 1);

    index_t cap = std::min<index_t>(hard_cap, std::max<index_t>(2 * k + 10, 20));
    RowMat ubasis(m, cap), vbasis(n, cap);
    Eigen::VectorXd alpha(cap), beta(cap); // beta(d-1) couples v_d -> v_{d+1}
    audit::Charge basis_charge(static_cast<std::int64_t>(sizeof(double)) *
                               (ubasis.size() + vbasis.size() + alpha.size() + beta.size()));
    auto grow = [&](index_t newcap) {
        ubasis.conservativeResize(Eigen::NoChange, newcap);
        vbasis.conservativeResize(Eigen::NoChange, newcap);
        alpha.conservativeResize(newcap);
        beta.conservativeResize(newcap);
        cap = newcap;
        basis_charge.resize(static_cast<std::int64_t>(sizeof(double)) *
                            (ubasis.size() + vbasis.size() + alpha.size() + beta.size()));
    };

    UniformStream rng(seed);
    const double tiny = 1e-300;

    // Replacement direction when the recursion breaks down (invariant
    // subspace found): restart with a random vector orthogonal to the basis.
    auto fresh_direction = [&](const RowMat& basis, index_t j, Eigen::VectorXd& w) {
        for (int tries = 0; tries < 8; ++tries) {
            rng.fill(w);
            reorthogonalize(basis, j, w);
            const double nm = w.norm();
            if (nm > 1e-8) {
                w /= nm;
                return true;
            }
        }
        return false; // basis spans the whole space
    };

    Eigen::VectorXd v1(n);
    rng.fill(v1);
    v1 /= v1.norm();
    vbasis.col(0) = v1;

    Eigen::VectorXd u = op.right(vbasis.col(0));
    int steps = 1;
    double a0 = u.norm();
    double scale = std::max(a0, 1.0);
    if (a0 > tiny + 1e-14 * scale) {
        alpha(0) = a0;
        ubasis.col(0) = u / a0;
    } else {
        alpha(0) = 0;
        Eigen::VectorXd w(m);
        fresh_direction(ubasis, 0, w);
        ubasis.col(0) = w;
    }

    index_t dim = 1;
    double sigma1 = alpha(0);
    Eigen::JacobiSVD<Eigen::MatrixXd> small_svd;
    auto compute_small = [&](index_t d) {
        Eigen::MatrixXd bmat = Eigen::MatrixXd::Zero(d, d);
        for (index_t p = 0; p < d; ++p) {
            bmat(p, p) = alpha(p);
            if (p + 1 < d)
                bmat(p, p + 1) = beta(p);
        }
        small_svd.compute(bmat, Eigen::ComputeFullU | Eigen::ComputeFullV);
        if (small_svd.singularValues().size())
            sigma1 = small_svd.singularValues()(0);
    };

    bool exhausted = false;
    while (true) {
        // v-step for the next coupling coefficient beta(dim-1).
        Eigen::VectorXd w = op.left(ubasis.col(dim - 1));
        w.noalias() -= alpha(dim - 1) * vbasis.col(dim - 1);
        reorthogonalize(vbasis, dim, w);
        double bn = w.norm();
        bool v_breakdown = bn <= 1e-14 * std::max(sigma1, 1.0);
        beta(dim - 1) = v_breakdown ? 0.0 : bn;

        // Ritz residual of triplet p is beta(dim-1) * |last row of U_small|.
        if (dim >= k || v_breakdown) {
            compute_small(dim);
            const index_t kk = std::min(k, dim);
            bool ok = true;
            for (index_t p = 0; ok && p < kk; ++p)
                ok = std::abs(beta(dim - 1) * small_svd.matrixU()(dim - 1, p)) <=
                     tol * std::max(sigma1, tiny);
            if (ok && kk == k)
                break;
            if (dim == minmn)
                break;
        }
        if (steps >= max_inner) {
            exhausted = true;
            break;
        }
        if (dim >= cap)
            grow(std::min(hard_cap, 2 * cap));
        if (dim >= cap) { // hard cap reached
            exhausted = true;
            break;
        }

        if (v_breakdown) {
            if (!fresh_direction(vbasis, dim, w))
                break; // space exhausted; handled below
            vbasis.col(dim) = w;
        } else {
            vbasis.col(dim) = w / bn;
        }

        // u-step.
        Eigen::VectorXd z = op.right(vbasis.col(dim));
        ++steps;
        z.noalias() -= beta(dim - 1) * ubasis.col(dim - 1);
        reorthogonalize(ubasis, dim, z);
        double an = z.norm();
        if (an <= 1e-14 * std::max(sigma1, 1.0)) {
            alpha(dim) = 0.0;
            Eigen::VectorXd zz(m);
            if (!fresh_direction(ubasis, dim, zz))
                break;
            ubasis.col(dim) = zz;
        } else {
            alpha(dim) = an;
            ubasis.col(dim) = z / an;
        }
        ++dim;
    }
    compute_small(dim);

    const index_t have = std::min(k, dim);
    PartialSvd out;
    out.left = RowMat::Zero(m, k);
    out.right = RowMat::Zero(n, k);
    out.singvals = Eigen::VectorXd::Zero(k);
    if (dim > 0 && small_svd.rows() == dim) {
        out.left.leftCols(have) = ubasis.leftCols(dim) * small_svd.matrixU().leftCols(have);
        out.right.leftCols(have) = vbasis.leftCols(dim) * small_svd.matrixV().leftCols(have);
        out.singvals.head(have) = small_svd.singularValues().head(have);
    }
    // Zero-padding for rank-deficient operators keeps columns orthonormal.
    for (index_t c = have; c < k; ++c) {
        Eigen::VectorXd w(m);
        out.left.col(c) = fresh_direction(out.left, c, w) ? w : Eigen::VectorXd::Zero(m);
        Eigen::VectorXd w2(n);
        out.right.col(c) = fresh_direction(out.right, c, w2) ? w2 : Eigen::VectorXd::Zero(n);
    }
    out.converged = !exhausted;
    out.matvec_pairs = steps;
    return out;
}

PartialSvd power_svd(const SplrOperator& op, index_t k_request, int iters, std::uint64_t seed) {
    const index_t m = op.rows(), n = op.cols();
    const index_t k = std::min(k_request, std::min(m, n));
    UniformStream rng(seed);
    RowMat v(n, k);
    for (index_t c = 0; c < k; ++c)
        for (index_t r = 0; r < n; ++r)
            v(r, c) = rng.next();
    auto orth = [](RowMat& x) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
        x = qr.householderQ() * Eigen::MatrixXd::Identity(x.rows(), x.cols());
    };
    orth(v);
    RowMat u(m, k);
    for (int it = 0; it < iters; ++it) {
        for (index_t c = 0; c < k; ++c)
            u.col(c) = op.right(v.col(c));
        orth(u);
        for (index_t c = 0; c < k; ++c)
            v.col(c) = op.left(u.col(c));
        orth(v);
    }
    RowMat av(m, k);
    for (index_t c = 0; c < k; ++c)
        av.col(c) = op.right(v.col(c));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(av, Eigen::ComputeThinU | Eigen::ComputeThinV);
    PartialSvd out;
    out.left = svd.matrixU();
    out.singvals = svd.singularValues();
    out.right = v * svd.matrixV();
    out.converged = true;
    out.matvec_pairs = iters * static_cast<int>(k);
    return out;
}

} // namespace nort
