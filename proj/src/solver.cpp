#include "nort/solver.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <chrono>
#include <cmath>

namespace nort {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (a + 1) + 0x85ebca77c2b2ae63ULL * (b + 1) +
                      0xc2b2ae3d27d4eb4fULL * (c + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void validate(const ObservationSet& obs, const SolverConfig& cfg) {
    const Shape& shape = obs.shape();
    const int d = cfg.regularized_modes();
    if (d < 1)
        throw ConfigError("at least one regularized mode is required");
    if (d > shape.order())
        throw ConfigError("more penalties than tensor modes");
    for (int i = 1; i <= d; ++i) {
        if (cfg.penalties[static_cast<std::size_t>(i - 1)].lambda < 0)
            throw ConfigError("penalty weights must be nonnegative");
        if (shape.dim(i) == 1)
            throw ConfigError("mode " + std::to_string(i) + " has extent 1 and cannot be low-rank regularized");
    }
    if (!(cfg.tau_multiplier > 1))
        throw ConfigError("tau_multiplier must be > 1");
    if (!(cfg.gamma1 > 0 && cfg.gamma1 <= 1))
        throw ConfigError("gamma1 must lie in (0,1]");
    if (!(cfg.p > 0 && cfg.p <= 1))
        throw ConfigError("p must lie in (0,1]");
    if (cfg.max_iter < 1)
        throw ConfigError("max_iter must be >= 1");
}

double penalty_sum(const Eigen::VectorXd& sv, const PenaltySpec& spec) {
    double s = 0;
    for (index_t p = 0; p < sv.size(); ++p)
        s += kappa(spec.kind, sv(p), p + 1);
    return s * spec.lambda;
}

double loss_sum(const std::vector<double>& elements, const ObservationSet& obs, const LossKind& kind) {
    double s = 0;
    for (index_t i = 0; i < obs.count(); ++i)
        s += loss_value(kind, elements[static_cast<std::size_t>(i)], obs.coo().value(i));
    return s;
}

FactoredTensor tensor_of(const Shape& shape, const std::vector<std::shared_ptr<const FactorPair>>& pairs) {
    FactoredTensor x(shape);
    for (const auto& p : pairs)
        x.add_term(1.0, p);
    return x;
}

} // namespace

StepSizes step_sizes(const SolverConfig& cfg) {
    StepSizes s{};
    s.rho = lipschitz_rho(cfg.loss);
    s.kappa0 = 0;
    for (const auto& spec : cfg.penalties)
        s.kappa0 = std::max(s.kappa0, kappa0(spec.kind));
    const double d = static_cast<double>(cfg.regularized_modes());
    s.tau = cfg.tau_multiplier * (s.rho + d * s.kappa0);
    s.eta = s.tau - s.rho - d * s.kappa0;
    return s;
}

FactoredTensor SolveResult::factored(const Shape& shape) const { return tensor_of(shape, factors); }

double objective(const FactoredTensor& x, const std::vector<Eigen::VectorXd>& mode_singvals,
                 const ObservationSet& obs, const SolverConfig& cfg) {
    if (static_cast<int>(mode_singvals.size()) != cfg.regularized_modes())
        throw ConfigError("one singular value vector per regularized mode is required");
    auto elements = factored_elements_on(x, obs, cfg.exec);
    double f = loss_sum(elements, obs, cfg.loss);
    for (int d = 0; d < cfg.regularized_modes(); ++d)
        f += penalty_sum(mode_singvals[static_cast<std::size_t>(d)], cfg.penalties[static_cast<std::size_t>(d)]);
    return f;
}

FactorPair extrapolation_singvals(const FactorPair& cur, const FactorPair& prev, double gamma) {
    if (cur.mode() != prev.mode())
        throw ConfigError("extrapolation requires factors of the same mode");
    if (gamma == 0)
        return cur;
    const index_t kc = cur.rank(), kp = prev.rank();
    const index_t kk = kc + kp;
    if (kk == 0)
        return cur;

    // value = (1+gamma) * cur - gamma * prev = A * B^T with stacked columns.
    Eigen::MatrixXd a(cur.left().rows(), kk), b(cur.right().rows(), kk);
    for (index_t p = 0; p < kc; ++p) {
        a.col(p) = cur.left().col(p);
        b.col(p) = cur.right().col(p) * ((1.0 + gamma) * cur.sigma(p));
    }
    for (index_t p = 0; p < kp; ++p) {
        a.col(kc + p) = prev.left().col(p);
        b.col(kc + p) = prev.right().col(p) * (-gamma * prev.sigma(p));
    }
    audit::Charge charge(static_cast<std::int64_t>(sizeof(double)) * (a.size() + b.size()));

    Eigen::HouseholderQR<Eigen::MatrixXd> qra(a), qrb(b);
    Eigen::MatrixXd ra = qra.matrixQR().topRows(kk).triangularView<Eigen::Upper>();
    Eigen::MatrixXd rb = qrb.matrixQR().topRows(kk).triangularView<Eigen::Upper>();
    Eigen::MatrixXd core = ra * rb.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(core, Eigen::ComputeFullU | Eigen::ComputeFullV);

    Eigen::MatrixXd qa = qra.householderQ() * Eigen::MatrixXd::Identity(a.rows(), kk);
    Eigen::MatrixXd qb = qrb.householderQ() * Eigen::MatrixXd::Identity(b.rows(), kk);
    RowMat left = qa * svd.matrixU();
    RowMat right = qb * svd.matrixV();
    return FactorPair(cur.mode(), std::move(left), std::move(right), Eigen::VectorXd(svd.singularValues()));
}

SolverState make_initial_state(const ObservationSet& obs, const SolverConfig& cfg) {
    validate(obs, cfg);
    const Shape& shape = obs.shape();
    SolverState st;
    st.shape = shape;
    st.gamma_t = cfg.gamma1;
    st.t = 1;
    const int d = cfg.regularized_modes();
    for (int i = 1; i <= d; ++i) {
        if (cfg.init_random) {
            // Rank-1 random factors, normalized through a tiny SVD so the
            // stored pair keeps the orthonormal-with-singvals convention.
            std::uint64_t s1 = mix_seed(cfg.seed, 0xa11, static_cast<std::uint64_t>(i), 1);
            std::uint64_t s2 = mix_seed(cfg.seed, 0xa11, static_cast<std::uint64_t>(i), 2);
            RowMat u(shape.unfold_rows(i), 1), v(shape.unfold_cols(i), 1);
            auto fill = [](RowMat& mat, std::uint64_t seed) {
                std::uint64_t state = seed;
                for (index_t r = 0; r < mat.rows(); ++r) {
                    state += 0x9e3779b97f4a7c15ULL;
                    std::uint64_t z = state;
                    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
                    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
                    z = z ^ (z >> 31);
                    mat(r, 0) = 2.0 * (static_cast<double>(z >> 11) * 0x1.0p-53) - 1.0;
                }
            };
            fill(u, s1);
            fill(v, s2);
            const double nu = u.norm(), nv = v.norm();
            Eigen::VectorXd sv(1);
            sv(0) = nu * nv;
            u /= nu;
            v /= nv;
            st.current.push_back(std::make_shared<FactorPair>(i, std::move(u), std::move(v), std::move(sv)));
        } else {
            st.current.push_back(std::make_shared<FactorPair>(FactorPair::zero(shape, i)));
        }
    }
    st.previous = st.current;

    FactoredTensor x = tensor_of(shape, st.current);
    st.cur_elements = factored_elements_on(x, obs, cfg.exec);
    st.cur_loss = loss_sum(st.cur_elements, obs, cfg.loss);
    st.cur_objective = st.cur_loss;
    for (int i = 0; i < d; ++i)
        st.cur_objective +=
            penalty_sum(st.current[static_cast<std::size_t>(i)]->singvals(), cfg.penalties[static_cast<std::size_t>(i)]);
    st.objective_trace.push_back(st.cur_objective);
    for (const auto& f : st.current)
        st.max_rank_seen = std::max(st.max_rank_seen, f->rank());
    return st;
}

void nort_step(SolverState& state, const ObservationSet& obs, const SolverConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const Shape& shape = state.shape;
    const int d = cfg.regularized_modes();
    const StepSizes sz = step_sizes(cfg);
    const double gamma = state.gamma_t;

    // Extrapolation X_bar = X_t + gamma (X_t - X_{t-1}), mode by mode.
    std::vector<std::shared_ptr<const FactorPair>> bar;
    bar.reserve(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i)
        bar.push_back(std::make_shared<FactorPair>(extrapolation_singvals(
            *state.current[static_cast<std::size_t>(i)], *state.previous[static_cast<std::size_t>(i)], gamma)));

    FactoredTensor xbar = tensor_of(shape, bar);
    std::vector<double> bar_elements = factored_elements_on(xbar, obs, cfg.exec);
    double bar_obj = loss_sum(bar_elements, obs, cfg.loss);
    for (int i = 0; i < d; ++i)
        bar_obj += penalty_sum(bar[static_cast<std::size_t>(i)]->singvals(), cfg.penalties[static_cast<std::size_t>(i)]);

    const bool accepted = bar_obj <= state.cur_objective;
    std::vector<std::shared_ptr<const FactorPair>> vterms;
    const std::vector<double>* v_elements;
    double next_gamma;
    if (accepted) {
        vterms = std::move(bar);
        v_elements = &bar_elements;
        next_gamma = std::min(gamma / cfg.p, 1.0);
    } else {
        vterms = state.current;
        v_elements = &state.cur_elements;
        next_gamma = cfg.p * gamma;
    }

    // Gradient tensor on the observed support.
    auto xi_vals = std::make_shared<std::vector<double>>(static_cast<std::size_t>(obs.count()));
    {
        std::vector<double>& g = *xi_vals;
        const std::vector<double>& el = *v_elements;
#pragma omp parallel for schedule(static) if (cfg.exec == Exec::parallel)
        for (index_t i = 0; i < obs.count(); ++i)
            g[static_cast<std::size_t>(i)] = loss_deriv(cfg.loss, el[static_cast<std::size_t>(i)], obs.coo().value(i));
    }

    std::vector<SplrOperator::LowRankTerm> lr;
    lr.reserve(vterms.size());
    for (const auto& f : vterms)
        lr.push_back({1.0, f});
    if (cfg.laplacian && cfg.laplacian->mu != 0)
        lr = laplacian_premultiply(shape, lr, cfg.laplacian->mu, cfg.laplacian->g);

    auto obs_ptr = std::shared_ptr<const SparseTensorCoo>(&obs.coo(), [](const SparseTensorCoo*) {});

    // Per-mode proximal step through the implicit operator.
    std::vector<std::shared_ptr<const FactorPair>> next;
    next.reserve(static_cast<std::size_t>(d));
    for (int i = 1; i <= d; ++i) {
        SplrOperator op(shape, i, lr, SplrOperator::SparseTerm{-1.0 / sz.tau, obs_ptr, xi_vals}, std::nullopt,
                        cfg.exec);
        const index_t minmn = std::min(op.rows(), op.cols());
        index_t k_prev = state.current[static_cast<std::size_t>(i - 1)]->rank();
        index_t k_req = std::min<index_t>(minmn, std::max<index_t>(1, k_prev + cfg.rank_step));
        FactorPair prox = FactorPair::zero(shape, i);
        for (std::uint64_t attempt = 0;; ++attempt) {
            PartialSvd svd = lanczos_svd(op, k_req, cfg.svd_tol, cfg.svd_max_inner,
                                         mix_seed(cfg.seed, static_cast<std::uint64_t>(state.t),
                                                  static_cast<std::uint64_t>(i), attempt));
            if (!svd.converged)
                state.svd_clean = false;
            state.max_rank_seen = std::max(state.max_rank_seen, k_req);
            prox = gsvt(i, svd.left, svd.singvals, svd.right, cfg.penalties[static_cast<std::size_t>(i - 1)],
                        1.0 / sz.tau);
            if (prox.rank() < k_req || k_req >= minmn)
                break;
            k_req = std::min(minmn, 2 * k_req); // everything survived; look deeper
        }
        next.push_back(std::make_shared<FactorPair>(std::move(prox)));
    }

    // Residual ||X_{t+1} - V_t||_F from the factored representations.
    FactoredTensor diff(shape);
    for (const auto& f : next)
        diff.add_term(1.0, f);
    for (const auto& f : vterms)
        diff.add_term(-1.0, f);
    const double residual = factored_norm(diff, cfg.exec);

    // Bookkeeping for X_{t+1}.
    FactoredTensor xnext = tensor_of(shape, next);
    std::vector<double> next_elements = factored_elements_on(xnext, obs, cfg.exec);
    double next_loss = loss_sum(next_elements, obs, cfg.loss);
    double next_obj = next_loss;
    std::vector<index_t> ranks;
    for (int i = 0; i < d; ++i) {
        next_obj += penalty_sum(next[static_cast<std::size_t>(i)]->singvals(), cfg.penalties[static_cast<std::size_t>(i)]);
        ranks.push_back(next[static_cast<std::size_t>(i)]->rank());
    }

    state.previous = std::move(state.current);
    state.current = std::move(next);
    state.gamma_trace.push_back(gamma);
    state.gamma_t = next_gamma;
    state.accepted_trace.push_back(accepted ? 1 : 0);
    state.objective_trace.push_back(next_obj);
    state.residual_trace.push_back(residual);
    state.rank_trace.push_back(std::move(ranks));
    state.cur_elements = std::move(next_elements);
    state.cur_loss = next_loss;
    state.cur_objective = next_obj;
    state.t += 1;
    state.time_trace.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

namespace {

SolveResult run_solve(const ObservationSet& obs, const SolverConfig& cfg,
                      const std::vector<std::shared_ptr<const FactorPair>>* init) {
    SolverState st = make_initial_state(obs, cfg);
    if (init) {
        if (static_cast<int>(init->size()) != cfg.regularized_modes())
            throw ConfigError("warm start requires one factor pair per regularized mode");
        st.current = *init;
        st.previous = *init;
        FactoredTensor x = tensor_of(st.shape, st.current);
        st.cur_elements = factored_elements_on(x, obs, cfg.exec);
        st.cur_loss = loss_sum(st.cur_elements, obs, cfg.loss);
        st.cur_objective = st.cur_loss;
        for (int i = 0; i < cfg.regularized_modes(); ++i)
            st.cur_objective += penalty_sum(st.current[static_cast<std::size_t>(i)]->singvals(),
                                            cfg.penalties[static_cast<std::size_t>(i)]);
        st.objective_trace.back() = st.cur_objective;
        st.max_rank_seen = 0;
        for (const auto& f : st.current)
            st.max_rank_seen = std::max(st.max_rank_seen, f->rank());
    }
    SolveResult res;
    bool converged = false;
    while (st.t <= cfg.max_iter) {
        const double prev_obj = st.cur_objective;
        nort_step(st, obs, cfg);
        const double change = std::abs(prev_obj - st.cur_objective) / std::max(std::abs(prev_obj), 1e-12);
        if (change < cfg.rel_tol) {
            converged = true;
            break;
        }
    }
    res.factors = st.current;
    res.objective_trace = std::move(st.objective_trace);
    res.residual_trace = std::move(st.residual_trace);
    res.rank_trace = std::move(st.rank_trace);
    res.gamma_trace = std::move(st.gamma_trace);
    res.accepted_trace = std::move(st.accepted_trace);
    res.time_trace = std::move(st.time_trace);
    res.converged = converged;
    res.svd_clean = st.svd_clean;
    res.final_objective = st.cur_objective;
    res.max_rank_seen = st.max_rank_seen;
    res.iterations = st.t - 1;
    return res;
}

} // namespace

SolveResult nort_solve(const ObservationSet& obs, const SolverConfig& cfg) { return run_solve(obs, cfg, nullptr); }

SolveResult nort_solve_from(const ObservationSet& obs, const SolverConfig& cfg,
                            const std::vector<std::shared_ptr<const FactorPair>>& init) {
    return run_solve(obs, cfg, &init);
}

SolveResult smoothing_nort(const ObservationSet& obs, const SolverConfig& cfg) {
    if (!cfg.smoothing)
        throw ConfigError("smoothing_nort requires a smoothing schedule");
    if (cfg.loss.tag() != LossKind::Tag::RobustSmoothed)
        throw ConfigError("smoothing_nort requires the robust smoothed loss");
    const SmoothingSchedule& sched = *cfg.smoothing;
    if (!(sched.delta0 > 0 && sched.delta0 < 1))
        throw ConfigError("delta0 must lie in (0,1)");
    if (sched.outer_iters < 1)
        throw ConfigError("outer_iters must be >= 1");

    SolveResult total;
    std::vector<std::shared_ptr<const FactorPair>> warm;
    double delta = 1.0;
    for (int s = 1; s <= sched.outer_iters; ++s) {
        delta *= sched.delta0; // delta0^s
        SolverConfig stage = cfg;
        stage.loss = cfg.loss.with_delta(delta);
        stage.smoothing.reset();
        SolveResult r = warm.empty() ? nort_solve(obs, stage) : nort_solve_from(obs, stage, warm);
        warm = r.factors;
        total.delta_schedule.push_back(delta);
        auto append = [](auto& dst, auto& src) { dst.insert(dst.end(), src.begin(), src.end()); };
        append(total.objective_trace, r.objective_trace);
        append(total.residual_trace, r.residual_trace);
        append(total.rank_trace, r.rank_trace);
        append(total.gamma_trace, r.gamma_trace);
        append(total.accepted_trace, r.accepted_trace);
        append(total.time_trace, r.time_trace);
        total.converged = r.converged;
        total.svd_clean = total.svd_clean && r.svd_clean;
        total.final_objective = r.final_objective;
        total.max_rank_seen = std::max(total.max_rank_seen, r.max_rank_seen);
        total.iterations += r.iterations;
        total.factors = std::move(r.factors);
    }
    return total;
}

} // namespace nort
