#pragma once

#include <Eigen/Core>
#include <string>

#include "nort/factored.hpp"

namespace nort {

// Concave spectral penalty applied per singular value. theta ranges:
// capped-l1, LSP, MCP require theta > 0; SCAD theta > 2; TNN theta is a
// nonnegative integer (0 coincides with the nuclear norm).
class PenaltyKind {
  public:
    enum class Tag { NuclearNorm, CappedL1, Lsp, Tnn, Scad, Mcp };

    static PenaltyKind nuclear_norm() { return PenaltyKind(Tag::NuclearNorm, 0); }
    static PenaltyKind capped_l1(double theta);
    static PenaltyKind lsp(double theta);
    static PenaltyKind tnn(long theta);
    static PenaltyKind scad(double theta);
    static PenaltyKind mcp(double theta);

    static PenaltyKind parse(const std::string& name, double theta); // CLI names: "nuclear", "capped-l1", ...

    Tag tag() const { return tag_; }
    double theta() const { return theta_; }
    std::string name() const;

  private:
    PenaltyKind(Tag tag, double theta) : tag_(tag), theta_(theta) {}
    Tag tag_;
    double theta_;
};

// One regularized mode: lambda * sum_p kappa(sigma_p).
struct PenaltySpec {
    PenaltyKind kind;
    double lambda = 0; // >= 0
};

// kappa(alpha) at singular-value position (1-based; only TNN reads it).
// kappa(0) = 0 for every kind.
double kappa(const PenaltyKind& kind, double alpha, index_t position = 1);

// Right derivative of kappa at 0+ (Assumption: kappa concave, nondecreasing).
double kappa0(const PenaltyKind& kind);

// Global minimizer of  0.5*(y - sigma)^2 + lambda*kappa(y)  over y >= 0,
// ties broken toward the larger y.
double scalar_prox(const PenaltyKind& kind, double sigma, double lambda, index_t position = 1);

// Generalized singular value thresholding: shrink each singular value by
// scalar_prox with effective weight spec.lambda * stepscale, keep the
// triplets whose shrunk value stays positive. left/right columns must be
// orthonormal with nonincreasing singvals.
FactorPair gsvt(int mode, const RowMat& left, const Eigen::VectorXd& singvals, const RowMat& right,
                const PenaltySpec& spec, double stepscale);

} // namespace nort
