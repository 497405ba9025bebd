#pragma once

#include <optional>

#include "nort/factored.hpp"
#include "nort/parallel.hpp"
#include "nort/penalties.hpp"
#include "nort/sparse_tensor.hpp"

namespace nort {

// Element-wise loss ell(x, o). RobustSmoothed is the Huber-smoothed concave
// loss kappa_l(|x - o|) built from a smooth penalty base (LSP, SCAD or MCP):
//   kappa0 * huber(|a|; delta) + (kappa_l(|a|) - kappa0 * |a|).
class LossKind {
  public:
    enum class Tag { Square, Logistic, RobustSmoothed };

    static LossKind square() { return LossKind(Tag::Square, std::nullopt, 0); }
    static LossKind logistic() { return LossKind(Tag::Logistic, std::nullopt, 0); }
    static LossKind robust_smoothed(PenaltyKind base, double delta);

    Tag tag() const { return tag_; }
    const PenaltyKind& base() const { return *base_; }
    double delta() const { return delta_; }

    // Same base, different smoothing parameter (outer smoothing loop).
    LossKind with_delta(double delta) const { return robust_smoothed(*base_, delta); }

  private:
    LossKind(Tag tag, std::optional<PenaltyKind> base, double delta)
        : tag_(tag), base_(std::move(base)), delta_(delta) {}
    Tag tag_;
    std::optional<PenaltyKind> base_;
    double delta_;
};

double loss_value(const LossKind& kind, double x, double o);
double loss_deriv(const LossKind& kind, double x, double o); // d/dx

// Smoothness constant rho of the total loss: square 1, logistic 1/4,
// robust-smoothed kappa0/delta plus a numerically bounded constant for the
// smooth remainder.
double lipschitz_rho(const LossKind& kind);

// Observed entries: values are O on the support Omega.
class ObservationSet {
  public:
    ObservationSet(SparseTensorCoo omega_o, const LossKind& loss);

    const SparseTensorCoo& coo() const { return omega_o_; }
    const Shape& shape() const { return omega_o_.shape(); }
    index_t count() const { return omega_o_.nnz(); }

  private:
    SparseTensorCoo omega_o_;
};

// Evaluate the factored tensor at every observed index. One value per entry,
// in canonical entry order.
std::vector<double> factored_elements_on(const FactoredTensor& v, const ObservationSet& obs,
                                         Exec exec = Exec::parallel);

// Gradient tensor of the loss part: support exactly Omega, entry
// loss_deriv(kind, v_idx, o_idx).
SparseTensorCoo sparse_gradient(const FactoredTensor& v, const ObservationSet& obs, const LossKind& kind,
                                Exec exec = Exec::parallel);

// Same, reusing element values already computed by factored_elements_on.
SparseTensorCoo sparse_gradient_from_elements(const std::vector<double>& elements, const ObservationSet& obs,
                                              const LossKind& kind, Exec exec = Exec::parallel);

} // namespace nort
