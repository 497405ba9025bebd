#include "nort/penalties.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace nort {

PenaltyKind PenaltyKind::capped_l1(double theta) {
    if (!(theta > 0))
        throw ConfigError("capped-l1 requires theta > 0");
    return PenaltyKind(Tag::CappedL1, theta);
}

PenaltyKind PenaltyKind::lsp(double theta) {
    if (!(theta > 0))
        throw ConfigError("LSP requires theta > 0");
    return PenaltyKind(Tag::Lsp, theta);
}

PenaltyKind PenaltyKind::tnn(long theta) {
    if (theta < 0)
        throw ConfigError("TNN requires a nonnegative integer theta");
    return PenaltyKind(Tag::Tnn, static_cast<double>(theta));
}

PenaltyKind PenaltyKind::scad(double theta) {
    if (!(theta > 2))
        throw ConfigError("SCAD requires theta > 2");
    return PenaltyKind(Tag::Scad, theta);
}

PenaltyKind PenaltyKind::mcp(double theta) {
    if (!(theta > 0))
        throw ConfigError("MCP requires theta > 0");
    return PenaltyKind(Tag::Mcp, theta);
}

PenaltyKind PenaltyKind::parse(const std::string& name, double theta) {
    if (name == "nuclear")
        return nuclear_norm();
    if (name == "capped-l1" || name == "capped_l1")
        return capped_l1(theta);
    if (name == "lsp")
        return lsp(theta);
    if (name == "tnn")
        return tnn(static_cast<long>(theta));
    if (name == "scad")
        return scad(theta);
    if (name == "mcp")
        return mcp(theta);
    throw ConfigError("unknown penalty '" + name + "'");
}

std::string PenaltyKind::name() const {
    switch (tag_) {
    case Tag::NuclearNorm: return "nuclear";
    case Tag::CappedL1: return "capped-l1";
    case Tag::Lsp: return "lsp";
    case Tag::Tnn: return "tnn";
    case Tag::Scad: return "scad";
    case Tag::Mcp: return "mcp";
    }
    return "?";
}

double kappa(const PenaltyKind& kind, double alpha, index_t position) {
    if (alpha < 0)
        throw std::domain_error("kappa is defined on alpha >= 0");
    const double th = kind.theta();
    switch (kind.tag()) {
    case PenaltyKind::Tag::NuclearNorm:
        return alpha;
    case PenaltyKind::Tag::CappedL1:
        return std::min(alpha, th);
    case PenaltyKind::Tag::Lsp:
        return std::log1p(alpha / th);
    case PenaltyKind::Tag::Tnn:
        return static_cast<double>(position) > th ? alpha : 0.0;
    case PenaltyKind::Tag::Scad:
        if (alpha <= 1.0)
            return alpha;
        if (alpha <= th)
            return (2.0 * th * alpha - alpha * alpha - 1.0) / (2.0 * (th - 1.0));
        return (th + 1.0) / 2.0;
    case PenaltyKind::Tag::Mcp:
        if (alpha <= th)
            return alpha - alpha * alpha / (2.0 * th);
        return th / 2.0;
    }
    return 0;
}

double kappa0(const PenaltyKind& kind) {
    return kind.tag() == PenaltyKind::Tag::Lsp ? 1.0 / kind.theta() : 1.0;
}

namespace {

// Candidate comparison for the 1-D prox; equal objectives resolve to the
// larger y so shrinkage never discards signal it does not have to.
struct ProxBest {
    double y = 0;
    double h = std::numeric_limits<double>::infinity();

    void offer(double cand_y, double cand_h) {
        const double tol = 1e-12 * std::max(1.0, std::abs(h));
        if (cand_h < h - tol || (std::abs(cand_h - h) <= tol && cand_y > y)) {
            y = cand_y;
            h = cand_h;
        }
    }
};

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

} // namespace

double scalar_prox(const PenaltyKind& kind, double sigma, double lambda, index_t position) {
    if (sigma < 0 || lambda < 0)
        throw std::domain_error("scalar_prox requires sigma >= 0 and lambda >= 0");
    if (lambda == 0)
        return sigma;

    const double th = kind.theta();
    auto h = [&](double y) { return 0.5 * (y - sigma) * (y - sigma) + lambda * kappa(kind, y, position); };

    switch (kind.tag()) {
    case PenaltyKind::Tag::NuclearNorm:
        return std::max(sigma - lambda, 0.0);
    case PenaltyKind::Tag::Tnn:
        return static_cast<double>(position) > th ? std::max(sigma - lambda, 0.0) : sigma;
    case PenaltyKind::Tag::CappedL1: {
        ProxBest best;
        double y1 = clamp(sigma - lambda, 0.0, th); // kappa linear below the cap
        best.offer(y1, h(y1));
        double y2 = std::max(sigma, th); // kappa constant above the cap
        best.offer(y2, h(y2));
        return best.y;
    }
    case PenaltyKind::Tag::Lsp: {
        // Stationary points solve y^2 + (th - sigma) y + (lambda - sigma*th) = 0.
        ProxBest best;
        best.offer(0.0, h(0.0));
        double disc = (sigma + th) * (sigma + th) - 4.0 * lambda;
        if (disc >= 0) {
            double sq = std::sqrt(disc);
            for (double root : {0.5 * ((sigma - th) + sq), 0.5 * ((sigma - th) - sq)})
                if (root > 0)
                    best.offer(root, h(root));
        }
        return best.y;
    }
    case PenaltyKind::Tag::Scad: {
        ProxBest best;
        double ya = clamp(sigma - lambda, 0.0, 1.0); // linear piece
        best.offer(ya, h(ya));
        best.offer(1.0, h(1.0));
        double denom = th - 1.0 - lambda; // quadratic piece stationary point
        if (denom > 0) {
            double yb = clamp((sigma * (th - 1.0) - lambda * th) / denom, 1.0, th);
            best.offer(yb, h(yb));
        }
        best.offer(th, h(th));
        double yc = std::max(sigma, th); // constant piece
        best.offer(yc, h(yc));
        return best.y;
    }
    case PenaltyKind::Tag::Mcp: {
        ProxBest best;
        best.offer(0.0, h(0.0));
        if (th > lambda) {
            double ym = clamp(th * (sigma - lambda) / (th - lambda), 0.0, th);
            best.offer(ym, h(ym));
        }
        best.offer(th, h(th));
        double yc = std::max(sigma, th);
        best.offer(yc, h(yc));
        return best.y;
    }
    }
    return sigma;
}

FactorPair gsvt(int mode, const RowMat& left, const Eigen::VectorXd& singvals, const RowMat& right,
                const PenaltySpec& spec, double stepscale) {
    const index_t k = singvals.size();
    const double lam = spec.lambda * stepscale;
    std::vector<double> y(static_cast<std::size_t>(k));
    std::vector<index_t> keep;
    for (index_t p = 0; p < k; ++p) {
        y[static_cast<std::size_t>(p)] = scalar_prox(spec.kind, singvals(p), lam, p + 1);
        if (y[static_cast<std::size_t>(p)] > 0)
            keep.push_back(p);
    }
    // Nonmonotone proxes (capped-l1 near the cap) can reorder values; restore
    // the nonincreasing convention by sorting kept triplets.
    std::stable_sort(keep.begin(), keep.end(), [&](index_t a, index_t b) {
        return y[static_cast<std::size_t>(a)] > y[static_cast<std::size_t>(b)];
    });

    const index_t r = static_cast<index_t>(keep.size());
    RowMat u(left.rows(), r), v(right.rows(), r);
    Eigen::VectorXd s(r);
    for (index_t q = 0; q < r; ++q) {
        u.col(q) = left.col(keep[static_cast<std::size_t>(q)]);
        v.col(q) = right.col(keep[static_cast<std::size_t>(q)]);
        s(q) = y[static_cast<std::size_t>(keep[static_cast<std::size_t>(q)])];
    }
    return FactorPair(mode, std::move(u), std::move(v), std::move(s));
}

} // namespace nort
