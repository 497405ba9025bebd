#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nort/lanczos.hpp"
#include "nort/losses.hpp"
#include "nort/penalties.hpp"
#include "nort/splr.hpp"

namespace nort {

struct LaplacianReg {
    double mu = 0;
    Eigen::MatrixXd g; // symmetric I^1 x I^1
};

struct SmoothingSchedule {
    double delta0 = 0.9; // in (0,1); stage s solves with delta = delta0^s
    int outer_iters = 5;
};

struct SolverConfig {
    std::vector<PenaltySpec> penalties; // one per regularized mode d = 1..D
    LossKind loss = LossKind::square();
    double tau_multiplier = 1.01; // tau = multiplier * (rho + D * kappa0)
    double gamma1 = 0.1;          // initial momentum, in (0,1]
    double p = 0.5;               // momentum decay, in (0,1]
    int max_iter = 2000;
    double rel_tol = 1e-4; // on |F_t - F_{t+1}| / |F_t|
    std::optional<LaplacianReg> laplacian;
    std::optional<SmoothingSchedule> smoothing;
    std::uint64_t seed = 0;

    // Numerics
    double svd_tol = 1e-8;
    int svd_max_inner = 1000;
    int rank_step = 5;        // proximal SVD requests rank(X_t^i) + rank_step
    bool init_random = false; // rank-1 random X_0 = X_1 instead of zero
    Exec exec = Exec::parallel;

    int regularized_modes() const { return static_cast<int>(penalties.size()); }
};

// Derived stepsize quantities shared by the solver and its tests.
struct StepSizes {
    double rho;    // loss smoothness constant
    double kappa0; // max over regularized penalties
    double tau;    // tau_multiplier * (rho + D * kappa0)
    double eta;    // tau - rho - D * kappa0
};
StepSizes step_sizes(const SolverConfig& cfg);

struct SolverState {
    Shape shape;
    std::vector<std::shared_ptr<const FactorPair>> current;  // X_t, one per mode 1..D
    std::vector<std::shared_ptr<const FactorPair>> previous; // X_{t-1}
    double gamma_t = 0.1;
    int t = 1;

    std::vector<double> objective_trace; // [0] = F(X_1), then F(X_{t+1}) per step
    std::vector<double> residual_trace;  // ||X_{t+1} - V_t||_F per step
    std::vector<std::vector<index_t>> rank_trace;
    std::vector<double> gamma_trace; // gamma_t used by each step
    std::vector<char> accepted_trace;
    std::vector<double> time_trace; // seconds per step

    // Cached evaluation of X_t on the observation support.
    std::vector<double> cur_elements;
    double cur_loss = 0;
    double cur_objective = 0;

    index_t max_rank_seen = 0;
    bool svd_clean = true; // false if any inner SVD hit its budget
};

struct SolveResult {
    std::vector<std::shared_ptr<const FactorPair>> factors;
    std::vector<double> objective_trace;
    std::vector<double> residual_trace;
    std::vector<std::vector<index_t>> rank_trace;
    std::vector<double> gamma_trace;
    std::vector<char> accepted_trace;
    std::vector<double> time_trace;
    std::vector<double> delta_schedule; // smoothing stages only
    bool converged = false;
    bool svd_clean = true;
    double final_objective = 0;
    index_t max_rank_seen = 0;
    int iterations = 0;

    FactoredTensor factored(const Shape& shape) const;
};

// Loss on the observed support plus sum_d lambda_d sum_p kappa(sv_d[p], p),
// with the loss part evaluated through factored_element.
double objective(const FactoredTensor& x, const std::vector<Eigen::VectorXd>& mode_singvals,
                 const ObservationSet& obs, const SolverConfig& cfg);

// Combined pair representing (1+gamma)*cur - gamma*prev with fresh singular
// values from a small SVD of the concatenated (<= 2k column) factors.
FactorPair extrapolation_singvals(const FactorPair& cur, const FactorPair& prev, double gamma);

SolverState make_initial_state(const ObservationSet& obs, const SolverConfig& cfg);

// One full iteration: extrapolate, accept/reject on the objective, update
// momentum, gradient step as an implicit sparse-plus-low-rank operator, one
// proximal SVD per regularized mode, trace bookkeeping.
void nort_step(SolverState& state, const ObservationSet& obs, const SolverConfig& cfg);

// Iterate nort_step until the relative objective change drops below
// cfg.rel_tol or max_iter is reached. Deterministic given cfg.seed.
SolveResult nort_solve(const ObservationSet& obs, const SolverConfig& cfg);

// Same, warm-started from given factors (one per regularized mode).
SolveResult nort_solve_from(const ObservationSet& obs, const SolverConfig& cfg,
                            const std::vector<std::shared_ptr<const FactorPair>>& init);

// Outer smoothing loop for the robust loss: stage s solves the smoothed
// problem at delta = delta0^s, warm-starting from the previous stage.
SolveResult smoothing_nort(const ObservationSet& obs, const SolverConfig& cfg);

} // namespace nort
