#pragma once
// Dynamic BLP inner loops for perfectly durable goods: value-function
// mapping under perfect foresight, the inclusive-value-sufficiency
// variant, and the traditional joint/nested (δ, V) algorithms.
//
// Conventions: V is I x T, δ is J x T, Pr0 is I x T. Observed shares are
// conditional on consumers still in the market, so the active-consumer
// weights are ŵ_it = w_i Pr0_it / Σ_k w_k Pr0_kt.

#include "blpinner/accel.hpp"
#include "blpinner/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace blp {

struct DurableMarket {
    Index T = 0;
    double beta = 0.0;
    Matrix shares;           // J x T
    Vector outside_shares;   // T
    std::vector<Matrix> mu;  // T entries, each I x J
    Vector weights;          // I
    Vector pr0_init;         // I

    Index products() const { return shares.rows(); }
    Index types() const { return weights.size(); }

    void validate() const {
        if (T < 1 || shares.cols() != T || outside_shares.size() != T || static_cast<Index>(mu.size()) != T)
            throw std::invalid_argument("DurableMarket: inconsistent horizon");
        if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("DurableMarket: beta must lie in [0,1)");
        for (const auto& m : mu)
            if (m.rows() != types() || m.cols() != products() || !m.allFinite())
                throw std::invalid_argument("DurableMarket: mu_t must be finite I x J");
        if (!(shares.array() > 0.0).all() || !(outside_shares.array() > 0.0).all())
            throw std::invalid_argument("DurableMarket: shares must be positive");
        for (Index t = 0; t < T; ++t)
            if (std::abs(shares.col(t).sum() + outside_shares[t] - 1.0) > 1e-12)
                throw std::invalid_argument("DurableMarket: per-period shares must sum to one");
        if (!(weights.array() > 0.0).all() || std::abs(weights.sum() - 1.0) > 1e-12)
            throw std::invalid_argument("DurableMarket: weights must be positive and sum to one");
        if (pr0_init.size() != types() || !(pr0_init.array() >= 0.0).all() || !(pr0_init.array() <= 1.0).all())
            throw std::invalid_argument("DurableMarket: pr0_init must lie in [0,1]");
    }
};

struct DurableSolution {
    Matrix V;                 // I x T
    Matrix delta;             // J x T
    Matrix pr0;               // I x T
    std::vector<Matrix> ccp;  // T entries, I x J
};

struct ForwardPass {
    Matrix delta;             // J x T
    Matrix pr0;               // I x T
    Matrix active;            // ŵ, I x T
    Matrix omega;             // ω, I x T
    std::vector<Matrix> ccp;  // T entries, I x J
};

namespace detail {

inline Vector active_weights(const Vector& w, const Vector& pr0) {
    const Vector a = w.cwiseProduct(pr0);
    return a / a.sum();
}

// exp(δ_jt + μ_ijt − V_it) together with ω_it = log Σ_j exp(δ_jt + μ_ijt).
inline Matrix ccp_and_omega(const Matrix& mu_t, const Eigen::Ref<const Vector>& delta_t,
                            const Eigen::Ref<const Vector>& V_t, Eigen::Ref<Vector> omega_t) {
    Eigen::ArrayXXd E;
    Eigen::ArrayXd shift, omega;
    row_logits(mu_t, delta_t, E, shift, omega);
    omega_t = omega.matrix();
    const Eigen::ArrayXd scale = (shift - V_t.array()).exp();
    for (Index j = 0; j < E.cols(); ++j) E.col(j) *= scale;
    return E.matrix();
}

}  // namespace detail

// Forward pass given V: for each t, δ_t from ι_{V→δ} with active weights,
// then CCPs and the ownership-free fractions for t+1.
inline ForwardPass pf_forward_pass(const Matrix& V, const DurableMarket& mkt) {
    const Index I = mkt.types(), J = mkt.products(), T = mkt.T;
    if (V.rows() != I || V.cols() != T) throw std::invalid_argument("pf_forward_pass: V must be I x T");
    ForwardPass fp;
    fp.delta.resize(J, T);
    fp.pr0.resize(I, T);
    fp.active.resize(I, T);
    fp.omega.resize(I, T);
    fp.ccp.resize(static_cast<std::size_t>(T));
    Vector pr0 = mkt.pr0_init;
    Vector omega(I);
    for (Index t = 0; t < T; ++t) {
        fp.pr0.col(t) = pr0;
        const Vector a = detail::active_weights(mkt.weights, pr0);
        fp.active.col(t) = a;
        const Eigen::ArrayXd la = a.array().log() - V.col(t).array();
        fp.delta.col(t) = (mkt.shares.col(t).array().log() - detail::column_lse(la, mkt.mu[t]).array()).matrix();
        fp.ccp[t] = detail::ccp_and_omega(mkt.mu[t], fp.delta.col(t), V.col(t), omega);
        fp.omega.col(t) = omega;
        const Eigen::ArrayXd stay = (1.0 - fp.ccp[t].rowwise().sum().array()).max(0.0).min(1.0);
        pr0 = (pr0.array() * stay).matrix();
    }
    return fp;
}

// ω_it = log Σ_j exp(δ_jt + μ_ijt)
inline Matrix inclusive_values(const Matrix& delta, const DurableMarket& mkt) {
    Matrix omega(mkt.types(), mkt.T);
    Eigen::ArrayXXd E;
    Eigen::ArrayXd shift, om;
    for (Index t = 0; t < mkt.T; ++t) {
        detail::row_logits(mkt.mu[t], delta.col(t), E, shift, om);
        omega.col(t) = om.matrix();
    }
    return omega;
}

// Perfect-foresight continuation βV_{i,t+1}, with V_{T+1} = V_T.
inline Matrix pf_continuation(const Matrix& V, double beta) {
    Matrix C(V.rows(), V.cols());
    for (Index t = 0; t < V.cols(); ++t) C.col(t) = beta * V.col(std::min(t + 1, V.cols() - 1));
    return C;
}

// Ψ^γ: V_it ← log(exp(C_it) + exp(ω_it)·(s_0t/S_0t)^γ), s_0t = Σ_i ŵ_it exp(C_it − V_it).
inline Matrix value_update(const Matrix& V, const Matrix& C, const Matrix& omega, const Matrix& active, double gamma,
                           const DurableMarket& mkt) {
    Matrix out(V.rows(), V.cols());
    for (Index t = 0; t < V.cols(); ++t) {
        double corr = 0.0;
        if (gamma != 0.0) {
            const Eigen::ArrayXd a = active.col(t).array().log() + C.col(t).array() - V.col(t).array();
            corr = gamma * (log_sum_exp(a) - std::log(mkt.outside_shares[t]));
        }
        for (Index i = 0; i < V.rows(); ++i) out(i, t) = log_add_exp(C(i, t), omega(i, t) + corr);
    }
    return out;
}

// Ownership path implied by δ and continuation C. Non-purchase
// probability exp(C)/(exp(C) + exp(ω)); equals 1 − Σ_j ccp whenever V is
// Bellman-consistent, and stays in (0,1) for arbitrary iterates.
inline Matrix propagate_pr0(const Matrix& delta, const Matrix& C, const DurableMarket& mkt) {
    const Matrix omega = inclusive_values(delta, mkt);
    Matrix pr0(mkt.types(), mkt.T);
    Vector p = mkt.pr0_init;
    for (Index t = 0; t < mkt.T; ++t) {
        pr0.col(t) = p;
        for (Index i = 0; i < p.size(); ++i) p[i] *= std::exp(C(i, t) - log_add_exp(C(i, t), omega(i, t)));
    }
    return pr0;
}

inline Matrix active_from_pr0(const Matrix& pr0, const Vector& w) {
    Matrix a(pr0.rows(), pr0.cols());
    for (Index t = 0; t < pr0.cols(); ++t) a.col(t) = detail::active_weights(w, pr0.col(t));
    return a;
}

inline Matrix pf_value_update(const Matrix& V, const Matrix& delta, const Matrix& pr0, double gamma,
                              const DurableMarket& mkt) {
    return value_update(V, pf_continuation(V, mkt.beta), inclusive_values(delta, mkt), active_from_pr0(pr0, mkt.weights),
                        gamma, mkt);
}

inline Matrix pf_value_update(const Matrix& V, const Matrix& delta, double gamma, const DurableMarket& mkt) {
    return pf_value_update(V, delta, propagate_pr0(delta, pf_continuation(V, mkt.beta), mkt), gamma, mkt);
}

// Audit given δ and a continuation matrix C: one exact Bellman step
// V' = log(exp(C) + exp(ω)), model-consistent CCPs and outside
// probabilities exp(C − V'), ownership propagated forward, then
// DIST = ‖log S − log s‖∞ over (j, t).
inline double dynamic_dist(const Matrix& delta, const Matrix& C, const DurableMarket& mkt) {
    if (!delta.allFinite() || !C.allFinite()) return std::numeric_limits<double>::quiet_NaN();
    const Matrix omega = inclusive_values(delta, mkt);
    Vector p = mkt.pr0_init;
    double d = 0.0;
    Vector om(mkt.types());
    for (Index t = 0; t < mkt.T; ++t) {
        Vector Vp(mkt.types());
        for (Index i = 0; i < Vp.size(); ++i) Vp[i] = log_add_exp(C(i, t), omega(i, t));
        const Vector a = detail::active_weights(mkt.weights, p);
        const Matrix ccp = detail::ccp_and_omega(mkt.mu[t], delta.col(t), Vp, om);
        const Vector s = ccp.transpose() * a;
        d = std::max(d, (mkt.shares.col(t).array().log() - s.array().log()).abs().maxCoeff());
        p = (p.array() * (C.col(t) - Vp).array().exp()).matrix();
    }
    return std::isfinite(d) ? d : std::numeric_limits<double>::quiet_NaN();
}

// sup |V − Ψ^0(V, δ)| for a continuation matrix C built from V.
inline double bellman_residual(const Matrix& V, const Matrix& delta, const Matrix& C, const DurableMarket& mkt) {
    const Matrix omega = inclusive_values(delta, mkt);
    double r = 0.0;
    for (Index t = 0; t < V.cols(); ++t)
        for (Index i = 0; i < V.rows(); ++i) r = std::max(r, std::abs(V(i, t) - log_add_exp(C(i, t), omega(i, t))));
    return r;
}

inline double bellman_residual(const DurableSolution& sol, const DurableMarket& mkt) {
    return bellman_residual(sol.V, sol.delta, pf_continuation(sol.V, mkt.beta), mkt);
}

struct DynamicOptions {
    double gamma = 1.0;
    double phi = 1.0;  // δ dampening in the traditional algorithms
    double dist_tolerance = 1e-12;
};

struct DynamicResult {
    DurableSolution solution;
    accel::SolveOutcome outcome;
    double dist = std::numeric_limits<double>::quiet_NaN();
    double bellman_residual = std::numeric_limits<double>::quiet_NaN();
    bool dist_verified = false;  // converged and DIST below dist_tolerance
    long psi_evaluations = 0;
    long delta_evaluations = 0;
};

namespace detail {

inline Vector flatten(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }
inline Matrix unflatten(const Eigen::Ref<const Vector>& v, Index rows, Index cols) {
    return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

inline accel::Blocks period_blocks(Index rows, Index T, Index offset = 0) {
    accel::Blocks b(static_cast<std::size_t>(T));
    for (Index t = 0; t < T; ++t)
        for (Index i = 0; i < rows; ++i) b[t].push_back(offset + t * rows + i);
    return b;
}

inline DurableSolution assemble(const Matrix& V, const Matrix& delta, const Matrix& C, const DurableMarket& mkt) {
    DurableSolution s;
    s.V = V;
    s.delta = delta;
    s.pr0 = propagate_pr0(delta, C, mkt);
    s.ccp.resize(static_cast<std::size_t>(mkt.T));
    Vector om(mkt.types());
    for (Index t = 0; t < mkt.T; ++t) s.ccp[t] = ccp_and_omega(mkt.mu[t], delta.col(t), V.col(t), om);
    return s;
}

inline Matrix myopic_delta(const DurableMarket& mkt) {
    Matrix d(mkt.products(), mkt.T);
    for (Index t = 0; t < mkt.T; ++t)
        d.col(t) = (mkt.shares.col(t).array().log() - std::log(mkt.outside_shares[t])).matrix();
    return d;
}

inline void finish(DynamicResult& res, const Matrix& C, const DurableMarket& mkt, const DynamicOptions& opt) {
    res.dist = dynamic_dist(res.solution.delta, C, mkt);
    res.bellman_residual = res.solution.V.allFinite() && res.solution.delta.allFinite()
                               ? bellman_residual(res.solution.V, res.solution.delta, C, mkt)
                               : std::numeric_limits<double>::quiet_NaN();
    res.dist_verified = res.outcome.converged && res.dist < opt.dist_tolerance;
}

// δ step of the traditional algorithms given (δ, V) and continuation C.
inline Matrix delta_step(const Matrix& delta, const Matrix& V, const Matrix& C, const DurableMarket& mkt,
                         const DynamicOptions& opt) {
    const Matrix pr0 = propagate_pr0(delta, C, mkt);
    Matrix next(delta.rows(), delta.cols());
    Vector om(mkt.types());
    for (Index t = 0; t < mkt.T; ++t) {
        const Vector a = active_weights(mkt.weights, pr0.col(t));
        const Matrix ccp = ccp_and_omega(mkt.mu[t], delta.col(t), V.col(t), om);
        const Vector s = ccp.transpose() * a;
        const double ls0 = log_sum_exp((a.array().log() + C.col(t).array() - V.col(t).array()).eval());
        const double corr = opt.gamma * (std::log(mkt.outside_shares[t]) - ls0);
        next.col(t) = (delta.col(t).array() +
                       opt.phi * (mkt.shares.col(t).array().log() - s.array().log() - corr))
                          .matrix();
    }
    return next;
}

}  // namespace detail

// Proposed algorithm: iterate V ↦ Ψ^γ(V, ι_{V→δ}(V)) from V = 0.
inline DynamicResult pf_solve(const DurableMarket& mkt, const DynamicOptions& opt, const accel::AccelConfig& cfg) {
    mkt.validate();
    const Index I = mkt.types(), T = mkt.T;
    accel::FixedPointMap map;
    map.dimension = I * T;
    map.blocks = detail::period_blocks(I, T);
    map.evaluate = [&](const Vector& x) {
        const Matrix V = detail::unflatten(x, I, T);
        const ForwardPass fp = pf_forward_pass(V, mkt);
        const Matrix next = value_update(V, pf_continuation(V, mkt.beta), fp.omega, fp.active,
                                         opt.gamma, mkt);
        return detail::flatten(next);
    };
    DynamicResult res;
    res.outcome = accel::solve(map, Vector::Zero(I * T), cfg);
    res.psi_evaluations = res.outcome.evaluations;
    const Matrix V = detail::unflatten(res.outcome.point, I, T);
    const ForwardPass fp = pf_forward_pass(V, mkt);
    res.solution = DurableSolution{V, fp.delta, fp.pr0, fp.ccp};
    detail::finish(res, pf_continuation(V, mkt.beta), mkt, opt);
    return res;
}

// One-loop traditional algorithm over the stacked state (δ, V).
inline DynamicResult traditional_joint_solve(const DurableMarket& mkt, const DynamicOptions& opt,
                                             const accel::AccelConfig& cfg) {
    mkt.validate();
    const Index I = mkt.types(), J = mkt.products(), T = mkt.T;
    const Index nd = J * T;
    accel::FixedPointMap map;
    map.dimension = nd + I * T;
    map.blocks = detail::period_blocks(J, T);
    for (auto& b : detail::period_blocks(I, T, nd)) map.blocks.push_back(std::move(b));
    map.evaluate = [&](const Vector& x) {
        const Matrix delta = detail::unflatten(x.head(nd), J, T);
        const Matrix V = detail::unflatten(x.tail(I * T), I, T);
        const Matrix C = pf_continuation(V, mkt.beta);
        Vector out(x.size());
        out.head(nd) = detail::flatten(detail::delta_step(delta, V, C, mkt, opt));
        out.tail(I * T) = detail::flatten(value_update(V, C, inclusive_values(delta, mkt), Matrix::Ones(I, T), 0.0, mkt));
        return out;
    };
    Vector x0(map.dimension);
    x0.head(nd) = detail::flatten(detail::myopic_delta(mkt));
    x0.tail(I * T).setZero();
    DynamicResult res;
    res.outcome = accel::solve(map, x0, cfg);
    res.psi_evaluations = res.delta_evaluations = res.outcome.evaluations;
    const Matrix delta = detail::unflatten(res.outcome.point.head(nd), J, T);
    const Matrix V = detail::unflatten(res.outcome.point.tail(I * T), I, T);
    const Matrix C = pf_continuation(V, mkt.beta);
    res.solution = detail::assemble(V, delta, C, mkt);
    detail::finish(res, C, mkt, opt);
    return res;
}

// Nested traditional algorithm: inner Bellman iteration for V given δ
// (hot-started from the previous inner solution), outer δ update.
inline DynamicResult traditional_nested_solve(const DurableMarket& mkt, const DynamicOptions& opt,
                                              const accel::AccelConfig& inner_cfg,
                                              const accel::AccelConfig& outer_cfg, bool hot_start = true) {
    mkt.validate();
    const Index I = mkt.types(), J = mkt.products(), T = mkt.T;
    Vector V_hot = Vector::Zero(I * T);
    long psi = 0;
    auto inner = [&](const Matrix& delta) {
        const Matrix omega = inclusive_values(delta, mkt);
        const Matrix ones = Matrix::Ones(I, T);
        accel::FixedPointMap m;
        m.dimension = I * T;
        m.blocks = detail::period_blocks(I, T);
        m.evaluate = [&](const Vector& v) {
            const Matrix V = detail::unflatten(v, I, T);
            return detail::flatten(value_update(V, pf_continuation(V, mkt.beta), omega, ones, 0.0, mkt));
        };
        const Vector start = hot_start ? V_hot : Vector::Zero(I * T);
        accel::SolveOutcome o = accel::solve(m, start, inner_cfg);
        psi += o.evaluations;
        if (all_finite(o.point)) V_hot = o.point;
        return detail::unflatten(o.point, I, T);
    };
    accel::FixedPointMap outer;
    outer.dimension = J * T;
    outer.blocks = detail::period_blocks(J, T);
    outer.evaluate = [&](const Vector& x) {
        const Matrix delta = detail::unflatten(x, J, T);
        const Matrix V = inner(delta);
        return detail::flatten(detail::delta_step(delta, V, pf_continuation(V, mkt.beta), mkt, opt));
    };
    DynamicResult res;
    res.outcome = accel::solve(outer, detail::flatten(detail::myopic_delta(mkt)), outer_cfg);
    res.delta_evaluations = res.outcome.evaluations;
    const Matrix delta = detail::unflatten(res.outcome.point, J, T);
    const Matrix V = inner(delta);
    res.psi_evaluations = psi;
    const Matrix C = pf_continuation(V, mkt.beta);
    res.solution = detail::assemble(V, delta, C, mkt);
    detail::finish(res, C, mkt, opt);
    return res;
}

// ---- inclusive value sufficiency ----

struct IvsGrid {
    int points = 10;
    double lo = -20.0;
    double hi = 10.0;
    int quadrature_order = 5;
};

struct IvsResult : DynamicResult {
    Vector grid;                 // ω nodes, ascending
    Matrix grid_values;          // I x N
    std::vector<Ar1Fit> ar1;     // per type
};

namespace detail {

struct IvsExpectation {
    Matrix data;  // E[V_i(ω')|ω_it], I x T
    Matrix grid;  // E[V_i(ω')|ω_h], I x N
    std::vector<Ar1Fit> ar1;
};

inline IvsExpectation ivs_expectation(const Matrix& omega, const Matrix& Vgrid, const Vector& nodes,
                                      const Quadrature& q, const IvsGrid& g) {
    const Index I = omega.rows(), T = omega.cols(), N = nodes.size();
    IvsExpectation e;
    e.data.resize(I, T);
    e.grid.resize(I, N);
    e.ar1.resize(static_cast<std::size_t>(I));
    std::vector<double> row(static_cast<std::size_t>(T));
    for (Index i = 0; i < I; ++i) {
        for (Index t = 0; t < T; ++t) row[t] = omega(i, t);
        const Ar1Fit f = ols_ar1(row.data(), T);
        e.ar1[i] = f;
        const ChebyshevInterpolant v = ChebyshevInterpolant::fit(Vgrid.row(i).transpose(), g.lo, g.hi);
        auto ev = [&](double w) { return normal_expectation(q, f.intercept + f.slope * w, f.sigma, v); };
        for (Index t = 0; t < T; ++t) e.data(i, t) = ev(omega(i, t));
        for (Index h = 0; h < N; ++h) e.grid(i, h) = ev(nodes[h]);
    }
    return e;
}

inline Matrix ivs_grid_update(const IvsExpectation& e, const Vector& nodes, double beta) {
    Matrix out(e.grid.rows(), e.grid.cols());
    for (Index h = 0; h < nodes.size(); ++h)
        for (Index i = 0; i < out.rows(); ++i) out(i, h) = log_add_exp(beta * e.grid(i, h), nodes[h]);
    return out;
}

}  // namespace detail

// Proposed algorithm under inclusive value sufficiency. State: V on data
// points (I x T) stacked with V on the Chebyshev grid (I x N); a single
// scalar step size is used by spectral/SQUAREM.
inline IvsResult ivs_solve(const DurableMarket& mkt, const DynamicOptions& opt, const IvsGrid& g,
                           const accel::AccelConfig& cfg) {
    mkt.validate();
    if (mkt.T < 3) throw std::invalid_argument("ivs_solve: T >= 3 required for the AR(1) fit");
    const Index I = mkt.types(), T = mkt.T, N = g.points;
    const Vector nodes = chebyshev_nodes(g.points, g.lo, g.hi);
    const Quadrature q = gauss_hermite(g.quadrature_order);
    accel::FixedPointMap map;
    map.dimension = I * T + I * N;
    map.evaluate = [&](const Vector& x) {
        const Matrix V = detail::unflatten(x.head(I * T), I, T);
        const Matrix Vg = detail::unflatten(x.tail(I * N), I, N);
        const ForwardPass fp = pf_forward_pass(V, mkt);
        const Matrix& omega = fp.omega;
        const detail::IvsExpectation e = detail::ivs_expectation(omega, Vg, nodes, q, g);
        Vector out(x.size());
        out.head(I * T) = detail::flatten(value_update(V, mkt.beta * e.data, omega, fp.active, opt.gamma, mkt));
        out.tail(I * N) = detail::flatten(detail::ivs_grid_update(e, nodes, mkt.beta));
        return out;
    };
    IvsResult res;
    res.outcome = accel::solve(map, Vector::Zero(map.dimension), cfg);
    res.psi_evaluations = res.outcome.evaluations;
    const Matrix V = detail::unflatten(res.outcome.point.head(I * T), I, T);
    const Matrix Vg = detail::unflatten(res.outcome.point.tail(I * N), I, N);
    const ForwardPass fp = pf_forward_pass(V, mkt);
    res.solution = DurableSolution{V, fp.delta, fp.pr0, fp.ccp};
    res.grid = nodes;
    res.grid_values = Vg;
    const detail::IvsExpectation e = detail::ivs_expectation(inclusive_values(fp.delta, mkt), Vg, nodes, q, g);
    res.ar1 = e.ar1;
    detail::finish(res, mkt.beta * e.data, mkt, opt);
    return res;
}

// Traditional one-loop algorithm under inclusive value sufficiency over
// the stacked state (δ, V on data points, V on grid).
inline IvsResult ivs_joint_solve(const DurableMarket& mkt, const DynamicOptions& opt, const IvsGrid& g,
                                 const accel::AccelConfig& cfg) {
    mkt.validate();
    if (mkt.T < 3) throw std::invalid_argument("ivs_joint_solve: T >= 3 required for the AR(1) fit");
    const Index I = mkt.types(), J = mkt.products(), T = mkt.T, N = g.points;
    const Index nd = J * T;
    const Vector nodes = chebyshev_nodes(g.points, g.lo, g.hi);
    const Quadrature q = gauss_hermite(g.quadrature_order);
    accel::FixedPointMap map;
    map.dimension = nd + I * T + I * N;
    map.evaluate = [&](const Vector& x) {
        const Matrix delta = detail::unflatten(x.head(nd), J, T);
        const Matrix V = detail::unflatten(x.segment(nd, I * T), I, T);
        const Matrix Vg = detail::unflatten(x.tail(I * N), I, N);
        const Matrix omega = inclusive_values(delta, mkt);
        const detail::IvsExpectation e = detail::ivs_expectation(omega, Vg, nodes, q, g);
        const Matrix C = mkt.beta * e.data;
        Vector out(x.size());
        out.head(nd) = detail::flatten(detail::delta_step(delta, V, C, mkt, opt));
        out.segment(nd, I * T) = detail::flatten(value_update(V, C, omega, Matrix::Ones(I, T), 0.0, mkt));
        out.tail(I * N) = detail::flatten(detail::ivs_grid_update(e, nodes, mkt.beta));
        return out;
    };
    Vector x0 = Vector::Zero(map.dimension);
    x0.head(nd) = detail::flatten(detail::myopic_delta(mkt));
    IvsResult res;
    res.outcome = accel::solve(map, x0, cfg);
    res.psi_evaluations = res.delta_evaluations = res.outcome.evaluations;
    const Matrix delta = detail::unflatten(res.outcome.point.head(nd), J, T);
    const Matrix V = detail::unflatten(res.outcome.point.segment(nd, I * T), I, T);
    const Matrix Vg = detail::unflatten(res.outcome.point.tail(I * N), I, N);
    const detail::IvsExpectation e = detail::ivs_expectation(inclusive_values(delta, mkt), Vg, nodes, q, g);
    res.solution = detail::assemble(V, delta, mkt.beta * e.data, mkt);
    res.grid = nodes;
    res.grid_values = Vg;
    res.ar1 = e.ar1;
    detail::finish(res, mkt.beta * e.data, mkt, opt);
    return res;
}

}  // namespace blp
