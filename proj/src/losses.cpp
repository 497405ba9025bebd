#include "nort/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace nort {

namespace {

double sign(double a) { return a > 0 ? 1.0 : (a < 0 ? -1.0 : 0.0); }

// Derivative of the penalty base on t >= 0.
double base_deriv(const PenaltyKind& base, double t) {
    const double th = base.theta();
    switch (base.tag()) {
    case PenaltyKind::Tag::NuclearNorm:
        return 1.0;
    case PenaltyKind::Tag::Lsp:
        return 1.0 / (th + t);
    case PenaltyKind::Tag::Scad:
        if (t <= 1.0)
            return 1.0;
        if (t <= th)
            return (th - t) / (th - 1.0);
        return 0.0;
    case PenaltyKind::Tag::Mcp:
        return t <= th ? 1.0 - t / th : 0.0;
    default:
        throw ConfigError("robust base must have a smooth kappa");
    }
}

double huber(double t, double delta) { return t >= delta ? t : t * t / (2.0 * delta) + delta / 2.0; }

double huber_deriv(double a, double delta) { return std::abs(a) < delta ? a / delta : sign(a); }

void check_logistic_label(double o) {
    if (o != 1.0 && o != -1.0)
        throw std::domain_error("logistic loss requires labels in {-1, +1}");
}

} // namespace

LossKind LossKind::robust_smoothed(PenaltyKind base, double delta) {
    switch (base.tag()) {
    case PenaltyKind::Tag::NuclearNorm:
    case PenaltyKind::Tag::Lsp:
    case PenaltyKind::Tag::Scad:
    case PenaltyKind::Tag::Mcp:
        break;
    default:
        throw ConfigError("robust base must be one of nuclear, lsp, scad, mcp (smooth kappa)");
    }
    if (!(delta > 0 && delta < 1))
        throw ConfigError("robust smoothing delta must lie in (0,1)");
    return LossKind(Tag::RobustSmoothed, std::move(base), delta);
}

double loss_value(const LossKind& kind, double x, double o) {
    switch (kind.tag()) {
    case LossKind::Tag::Square: {
        const double r = x - o;
        return 0.5 * r * r;
    }
    case LossKind::Tag::Logistic: {
        check_logistic_label(o);
        const double z = -x * o;
        return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    }
    case LossKind::Tag::RobustSmoothed: {
        const double a = x - o, t = std::abs(a);
        const double k0 = kappa0(kind.base());
        return k0 * huber(t, kind.delta()) + (kappa(kind.base(), t) - k0 * t);
    }
    }
    return 0;
}

double loss_deriv(const LossKind& kind, double x, double o) {
    switch (kind.tag()) {
    case LossKind::Tag::Square:
        return x - o;
    case LossKind::Tag::Logistic: {
        check_logistic_label(o);
        const double z = -x * o;
        const double s = z > 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
        return -o * s;
    }
    case LossKind::Tag::RobustSmoothed: {
        const double a = x - o;
        const double k0 = kappa0(kind.base());
        return k0 * huber_deriv(a, kind.delta()) + sign(a) * (base_deriv(kind.base(), std::abs(a)) - k0);
    }
    }
    return 0;
}

double lipschitz_rho(const LossKind& kind) {
    switch (kind.tag()) {
    case LossKind::Tag::Square:
        return 1.0;
    case LossKind::Tag::Logistic:
        return 0.25;
    case LossKind::Tag::RobustSmoothed: {
        // Smooth remainder kappa(|a|) - kappa0*|a|: bound its curvature by a
        // finite-difference sweep, conservatively scaled.
        const PenaltyKind& base = kind.base();
        const double k0 = kappa0(base);
        const double w = std::max(3.0 * base.theta() + 2.0, 10.0);
        const int n = 8192;
        const double h = 2.0 * w / n;
        auto psi = [&](double a) {
            const double t = std::abs(a);
            return kappa(base, t) - k0 * t;
        };
        double curv = 0;
        for (int i = 1; i < n; ++i) {
            const double a = -w + i * h;
            const double second = std::abs(psi(a + h) - 2.0 * psi(a) + psi(a - h)) / (h * h);
            curv = std::max(curv, second);
        }
        return k0 / kind.delta() + 1.1 * curv;
    }
    }
    return 1.0;
}

ObservationSet::ObservationSet(SparseTensorCoo omega_o, const LossKind& loss) : omega_o_(std::move(omega_o)) {
    if (omega_o_.nnz() == 0)
        throw DataError("observation set is empty");
    if (loss.tag() == LossKind::Tag::Logistic)
        for (index_t i = 0; i < omega_o_.nnz(); ++i)
            check_logistic_label(omega_o_.value(i));
}

std::vector<double> factored_elements_on(const FactoredTensor& v, const ObservationSet& obs, Exec exec) {
    if (v.shape() != obs.shape())
        throw ConfigError("factored tensor and observations have different shapes");
    const Shape& shape = v.shape();
    const int m = shape.order();

    struct TermView {
        double coeff;
        const FactorPair* f;
        ModeUnfold mu;
    };
    std::vector<TermView> views;
    views.reserve(v.terms().size());
    for (const auto& t : v.terms())
        if (t.factor->rank() > 0)
            views.push_back({t.coeff, t.factor.get(), ModeUnfold(shape, t.factor->mode())});

    const index_t n = obs.count();
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    const index_t* idx = obs.coo().flat_indices().data();

    MultiIndex scratch(static_cast<std::size_t>(m));
#pragma omp parallel for schedule(static) firstprivate(scratch) if (exec == Exec::parallel)
    for (index_t i = 0; i < n; ++i) {
        const index_t* row = idx + i * m;
        std::copy_n(row, m, scratch.begin());
        double acc = 0;
        for (const TermView& tv : views) {
            const index_t r0 = row[tv.f->mode() - 1] - 1;
            const index_t c0 = tv.mu.col0_of(scratch);
            const FactorPair& f = *tv.f;
            const index_t k = f.rank();
            double dot = 0;
            for (index_t p = 0; p < k; ++p)
                dot += f.left()(r0, p) * f.sigma(p) * f.right()(c0, p);
            acc += tv.coeff * dot;
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

SparseTensorCoo sparse_gradient(const FactoredTensor& v, const ObservationSet& obs, const LossKind& kind,
                                Exec exec) {
    return sparse_gradient_from_elements(factored_elements_on(v, obs, exec), obs, kind, exec);
}

SparseTensorCoo sparse_gradient_from_elements(const std::vector<double>& elements, const ObservationSet& obs,
                                              const LossKind& kind, Exec exec) {
    const index_t n = obs.count();
    if (static_cast<index_t>(elements.size()) != n)
        throw ConfigError("element count does not match the observation count");
    std::vector<double> g(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
    for (index_t i = 0; i < n; ++i)
        g[static_cast<std::size_t>(i)] =
            loss_deriv(kind, elements[static_cast<std::size_t>(i)], obs.coo().value(i));
    SparseTensorCoo out = obs.coo();
    out.set_values(std::move(g));
    return out;
}

} // namespace nort
