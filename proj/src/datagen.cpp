#include "nort/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "nort/dense_tensor.hpp"
#include "nort/rng.hpp"

namespace nort {

double CpFactors::element(const MultiIndex& idx) const {
    shape.check_index(idx);
    double v = 0;
    for (index_t r = 0; r < rank(); ++r) {
        double prod = weights(r);
        for (int d = 0; d < shape.order(); ++d)
            prod *= factors[static_cast<std::size_t>(d)](idx[static_cast<std::size_t>(d)] - 1, r);
        v += prod;
    }
    return v;
}

DenseTensor CpFactors::densify() const {
    DenseTensor t(shape);
    for (index_t off = 0; off < shape.numel(); ++off)
        t.data()[static_cast<std::size_t>(off)] = element(shape.index_at(off));
    return t;
}

index_t default_obs_count(const Shape& shape, index_t rank) {
    index_t min_dim = shape.dim(1);
    index_t sum_dims = 0;
    for (int d = 1; d <= shape.order(); ++d) {
        min_dim = std::min(min_dim, shape.dim(d));
        sum_dims += shape.dim(d);
    }
    const double n = static_cast<double>(min_dim) / static_cast<double>(rank) *
                     static_cast<double>(sum_dims) * std::log(static_cast<double>(shape.numel()));
    return std::min<index_t>(shape.numel(), static_cast<index_t>(std::llround(n)));
}

namespace {

CpFactors sample_truth(const SyntheticSpec& spec, Rng& rng) {
    const Shape& shape = spec.shape;
    for (int d = 1; d <= shape.order(); ++d)
        if (spec.rank > shape.dim(d))
            throw ConfigError("rank exceeds a tensor dimension");
    if (spec.rank < 1)
        throw ConfigError("rank must be >= 1");
    CpFactors truth;
    truth.shape = shape;
    truth.weights = Eigen::VectorXd(spec.rank);
    for (index_t r = 0; r < spec.rank; ++r)
        truth.weights(r) = rng.normal();
    for (int d = 1; d <= shape.order(); ++d) {
        RowMat f(shape.dim(d), spec.rank);
        for (index_t i = 0; i < f.rows(); ++i)
            for (index_t r = 0; r < spec.rank; ++r)
                f(i, r) = rng.normal();
        truth.factors.push_back(std::move(f));
    }
    // Optional smooth structure along mode 1 (three-point moving average).
    for (int pass = 0; pass < spec.smooth_mode1_passes; ++pass) {
        RowMat& f = truth.factors[0];
        RowMat g = f;
        for (index_t i = 0; i < f.rows(); ++i) {
            const index_t lo = std::max<index_t>(0, i - 1), hi = std::min<index_t>(f.rows() - 1, i + 1);
            g.row(i) = (f.row(lo) + f.row(i) + f.row(hi)) / static_cast<double>(hi - lo + 1);
        }
        f = std::move(g);
    }
    return truth;
}

SyntheticData sample_observations(const SyntheticSpec& spec, const std::vector<index_t>& hidden_slices) {
    Rng rng(spec.seed);
    CpFactors truth = sample_truth(spec, rng);
    const Shape& shape = spec.shape;

    std::vector<char> hidden(static_cast<std::size_t>(shape.dim(1)) + 1, 0);
    index_t allowed_cells = shape.numel();
    if (!hidden_slices.empty()) {
        for (index_t s : hidden_slices) {
            if (s < 1 || s > shape.dim(1))
                throw ConfigError("hidden slice index out of range");
            hidden[static_cast<std::size_t>(s)] = 1;
        }
        index_t hidden_count = 0;
        for (index_t s = 1; s <= shape.dim(1); ++s)
            hidden_count += hidden[static_cast<std::size_t>(s)];
        allowed_cells = (shape.dim(1) - hidden_count) * (shape.numel() / shape.dim(1));
    }

    const index_t n_obs = spec.n_obs ? *spec.n_obs : default_obs_count(shape, spec.rank);
    if (n_obs > allowed_cells)
        throw ConfigError("n_obs exceeds the number of observable cells");
    if (n_obs < 1)
        throw ConfigError("n_obs must be >= 1");

    std::unordered_set<index_t> taken;
    taken.reserve(static_cast<std::size_t>(n_obs) * 2);
    std::vector<index_t> indices;
    indices.reserve(static_cast<std::size_t>(n_obs * shape.order()));
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(n_obs));
    while (static_cast<index_t>(values.size()) < n_obs) {
        const index_t off = static_cast<index_t>(rng.uniform_below(static_cast<std::uint64_t>(shape.numel())));
        MultiIndex idx = shape.index_at(off);
        if (!hidden_slices.empty() && hidden[static_cast<std::size_t>(idx[0])])
            continue;
        if (!taken.insert(off).second)
            continue;
        indices.insert(indices.end(), idx.begin(), idx.end());
        double v = truth.element(idx);
        if (spec.noise_sigma > 0)
            v += spec.noise_sigma * rng.normal();
        values.push_back(v);
    }
    return {std::move(truth), SparseTensorCoo(shape, std::move(indices), std::move(values))};
}

} // namespace

SyntheticData synth_lowrank(const SyntheticSpec& spec) { return sample_observations(spec, {}); }

SyntheticData synth_lowrank_excluding_slices(const SyntheticSpec& spec,
                                             const std::vector<index_t>& hidden_mode1_slices) {
    return sample_observations(spec, hidden_mode1_slices);
}

SparseTensorCoo heldout_from_truth(const CpFactors& truth, const SparseTensorCoo& observed, double sigma,
                                   std::optional<index_t> max_entries, std::uint64_t seed) {
    const Shape& shape = truth.shape;
    if (observed.shape() != shape)
        throw ConfigError("observed support does not match the ground-truth shape");
    std::unordered_set<index_t> taken;
    taken.reserve(static_cast<std::size_t>(observed.nnz()) * 2);
    for (index_t e = 0; e < observed.nnz(); ++e)
        taken.insert(shape.linear_offset(observed.index_at_entry(e)));

    Rng rng(seed);
    const index_t unobserved = shape.numel() - observed.nnz();
    const index_t want = max_entries ? std::min(*max_entries, unobserved) : unobserved;

    std::vector<index_t> indices;
    std::vector<double> values;
    indices.reserve(static_cast<std::size_t>(want * shape.order()));
    values.reserve(static_cast<std::size_t>(want));
    auto emit = [&](index_t off) {
        MultiIndex idx = shape.index_at(off);
        indices.insert(indices.end(), idx.begin(), idx.end());
        double v = truth.element(idx);
        if (sigma > 0)
            v += sigma * rng.normal();
        values.push_back(v);
    };
    if (want == unobserved) {
        for (index_t off = 0; off < shape.numel(); ++off)
            if (!taken.count(off))
                emit(off);
    } else {
        std::unordered_set<index_t> chosen;
        chosen.reserve(static_cast<std::size_t>(want) * 2);
        while (static_cast<index_t>(values.size()) < want) {
            const index_t off = static_cast<index_t>(rng.uniform_below(static_cast<std::uint64_t>(shape.numel())));
            if (taken.count(off) || !chosen.insert(off).second)
                continue;
            emit(off);
        }
    }
    return SparseTensorCoo(shape, std::move(indices), std::move(values));
}

Split split(const SparseTensorCoo& obs, const std::vector<double>& fractions, std::uint64_t seed) {
    if (fractions.size() != 2 && fractions.size() != 3)
        throw ConfigError("split takes two or three fractions");
    double total = 0;
    for (double f : fractions) {
        if (f < 0)
            throw ConfigError("split fractions must be nonnegative");
        total += f;
    }
    if (total > 1.0 + 1e-12)
        throw ConfigError("split fractions must sum to at most 1");

    const index_t n = obs.nnz();
    std::vector<index_t> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    for (index_t i = n - 1; i > 0; --i)
        std::swap(perm[static_cast<std::size_t>(i)],
                  perm[static_cast<std::size_t>(rng.uniform_below(static_cast<std::uint64_t>(i + 1)))]);

    std::vector<index_t> counts;
    index_t assigned = 0;
    for (std::size_t s = 0; s + 1 < fractions.size(); ++s) {
        counts.push_back(static_cast<index_t>(std::floor(fractions[s] * static_cast<double>(n))));
        assigned += counts.back();
    }
    counts.push_back(total >= 1.0 - 1e-12
                         ? n - assigned // remainder to the last split
                         : std::min<index_t>(n - assigned,
                                             static_cast<index_t>(std::floor(fractions.back() * static_cast<double>(n)))));

    const int m = obs.shape().order();
    auto take = [&](index_t begin, index_t count) {
        std::vector<index_t> idx;
        std::vector<double> vals;
        idx.reserve(static_cast<std::size_t>(count * m));
        vals.reserve(static_cast<std::size_t>(count));
        for (index_t i = begin; i < begin + count; ++i) {
            auto row = obs.index_row(perm[static_cast<std::size_t>(i)]);
            idx.insert(idx.end(), row.begin(), row.end());
            vals.push_back(obs.value(perm[static_cast<std::size_t>(i)]));
        }
        return SparseTensorCoo(obs.shape(), std::move(idx), std::move(vals));
    };

    Split out;
    index_t at = 0;
    out.train = take(at, counts[0]);
    at += counts[0];
    out.validation = take(at, counts[1]);
    at += counts[1];
    out.test = fractions.size() == 3 ? take(at, counts[2]) : SparseTensorCoo(obs.shape(), {}, {});
    return out;
}

SparseTensorCoo add_outliers(const SparseTensorCoo& obs, double fraction, double magnitude_scale,
                             std::uint64_t seed) {
    if (fraction < 0 || fraction > 1)
        throw ConfigError("outlier fraction must lie in [0,1]");
    Rng rng(seed);
    const double peak = obs.max_abs();
    std::vector<double> vals = obs.values();
    for (double& v : vals)
        if (rng.uniform() < fraction)
            v += rng.uniform() * magnitude_scale * peak;
    SparseTensorCoo out = obs;
    out.set_values(std::move(vals));
    return out;
}

Eigen::MatrixXd laplacian_from_affinity(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols())
        throw ConfigError("affinity matrix must be square");
    if (!a.isApprox(a.transpose(), 1e-12))
        throw ConfigError("affinity matrix must be symmetric");
    if ((a.array() < 0).any())
        throw ConfigError("affinity matrix must be nonnegative");
    Eigen::MatrixXd g = -a;
    for (index_t i = 0; i < a.rows(); ++i)
        g(i, i) = a.row(i).sum() - a(i, i);
    return g;
}

Eigen::MatrixXd affinity_from_distances(const Eigen::MatrixXd& b) {
    Eigen::MatrixXd a = (-2.0 * b.array()).exp();
    for (index_t i = 0; i < a.rows() && i < a.cols(); ++i)
        a(i, i) = 0;
    return a;
}

double haversine_km(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg) {
    const double rad = 3.14159265358979323846 / 180.0;
    const double phi1 = lat1_deg * rad, phi2 = lat2_deg * rad;
    const double dphi = (lat2_deg - lat1_deg) * rad;
    const double dlam = (lon2_deg - lon1_deg) * rad;
    const double s1 = std::sin(dphi / 2), s2 = std::sin(dlam / 2);
    const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    const double earth_radius_km = 6371.0;
    return 2.0 * earth_radius_km * std::asin(std::min(1.0, std::sqrt(h)));
}

Eigen::MatrixXd matrix_read(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open '" + path + "'");
    std::string tok;
    in >> tok;
    if (tok != "matrix")
        throw DataError(path + ": expected 'matrix <rows> <cols>' header");
    index_t rows = 0, cols = 0;
    in >> rows >> cols;
    if (!in || rows < 1 || cols < 1)
        throw DataError(path + ": bad matrix header");
    Eigen::MatrixXd m(rows, cols);
    for (index_t r = 0; r < rows; ++r)
        for (index_t c = 0; c < cols; ++c)
            if (!(in >> m(r, c)))
                throw DataError(path + ": truncated matrix body");
    return m;
}

void matrix_write(const Eigen::MatrixXd& m, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write '" + path + "'");
    out << "matrix " << m.rows() << ' ' << m.cols() << '\n';
    for (index_t r = 0; r < m.rows(); ++r) {
        for (index_t c = 0; c < m.cols(); ++c)
            out << (c ? " " : "") << format_double(m(r, c));
        out << '\n';
    }
}

void cp_write(const CpFactors& f, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write '" + path + "'");
    out << "cpfactors " << f.shape.order() << ' ' << f.rank();
    for (index_t d : f.shape.dims())
        out << ' ' << d;
    out << "\nweights";
    for (index_t r = 0; r < f.rank(); ++r)
        out << ' ' << format_double(f.weights(r));
    out << '\n';
    for (int d = 1; d <= f.shape.order(); ++d) {
        out << "mode " << d << '\n';
        const RowMat& m = f.factors[static_cast<std::size_t>(d - 1)];
        for (index_t i = 0; i < m.rows(); ++i) {
            for (index_t r = 0; r < m.cols(); ++r)
                out << (r ? " " : "") << format_double(m(i, r));
            out << '\n';
        }
    }
}

CpFactors cp_read(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open '" + path + "'");
    std::string tok;
    in >> tok;
    if (tok != "cpfactors")
        throw DataError(path + ": expected 'cpfactors' header");
    int order = 0;
    index_t rank = 0;
    in >> order >> rank;
    if (!in || order < 2 || rank < 1)
        throw DataError(path + ": bad cpfactors header");
    std::vector<index_t> dims(static_cast<std::size_t>(order));
    for (auto& d : dims)
        in >> d;
    CpFactors f;
    f.shape = Shape(dims);
    in >> tok;
    if (tok != "weights")
        throw DataError(path + ": expected weights line");
    f.weights = Eigen::VectorXd(rank);
    for (index_t r = 0; r < rank; ++r)
        in >> f.weights(r);
    for (int d = 1; d <= order; ++d) {
        int got = 0;
        in >> tok >> got;
        if (tok != "mode" || got != d)
            throw DataError(path + ": expected 'mode " + std::to_string(d) + "'");
        RowMat m(f.shape.dim(d), rank);
        for (index_t i = 0; i < m.rows(); ++i)
            for (index_t r = 0; r < rank; ++r)
                in >> m(i, r);
        f.factors.push_back(std::move(m));
    }
    if (!in)
        throw DataError(path + ": truncated factor body");
    return f;
}

} // namespace nort
