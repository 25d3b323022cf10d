#pragma once
// Static random-coefficients logit: shares, the δ and V mappings with the
// outside-share correction γ, the ι conversions, inner-loop solvers and
// Kalouptsidi's r-mappings.

#include "blpinner/accel.hpp"
#include "blpinner/numerics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace blp {

using Delta = Vector;  // δ_j, one entry per product
using Value = Vector;  // V_i, one entry per consumer type

struct StaticMarket {
    Vector shares;          // S_j
    double outside_share;   // S_0
    Matrix mu;              // I x J
    Vector weights;         // w_i

    Index products() const { return mu.cols(); }
    Index types() const { return mu.rows(); }

    void validate() const {
        if (mu.rows() != weights.size() || mu.cols() != shares.size())
            throw std::invalid_argument("StaticMarket: mu must be I x J");
        if (shares.size() == 0 || weights.size() == 0) throw std::invalid_argument("StaticMarket: empty");
        if (!(shares.array() > 0.0).all() || !(outside_share > 0.0))
            throw std::invalid_argument("StaticMarket: shares must be positive");
        if (std::abs(shares.sum() + outside_share - 1.0) > 1e-12)
            throw std::invalid_argument("StaticMarket: shares must sum to one");
        if (!(weights.array() > 0.0).all() || std::abs(weights.sum() - 1.0) > 1e-12)
            throw std::invalid_argument("StaticMarket: weights must be positive and sum to one");
        if (!mu.allFinite()) throw std::invalid_argument("StaticMarket: mu must be finite");
    }
};

struct SharePrediction {
    Vector product;          // s_j
    double outside = 0.0;    // s_0
    Matrix by_type;          // s_ij, I x J
    Vector outside_by_type;  // s_i0
    Vector value;            // V_i = log(1 + Σ_j exp(δ_j + μ_ij))
};

namespace detail {

// Per-type shift m_i = max(0, max_j δ_j + μ_ij) and E_ij = exp(δ_j + μ_ij − m_i).
// Column loops keep memory access contiguous.
struct TypeLogits {
    Eigen::ArrayXd shift;
    Eigen::ArrayXXd expu;
    Eigen::ArrayXd denom;  // exp(−m_i) + Σ_j E_ij
};

inline TypeLogits type_logits(const Delta& delta, const Matrix& mu) {
    const Index I = mu.rows(), J = mu.cols();
    TypeLogits t;
    t.shift = Eigen::ArrayXd::Zero(I);
    for (Index j = 0; j < J; ++j) t.shift = t.shift.max(mu.col(j).array() + delta[j]);
    t.expu.resize(I, J);
    t.denom = (-t.shift).exp();
    for (Index j = 0; j < J; ++j) {
        t.expu.col(j) = (mu.col(j).array() + delta[j] - t.shift).exp();
        t.denom += t.expu.col(j);
    }
    return t;
}

}  // namespace detail

inline SharePrediction predict_shares(const Delta& delta, const StaticMarket& mkt) {
    if (delta.size() != mkt.products()) throw std::invalid_argument("predict_shares: size mismatch");
    detail::TypeLogits t = detail::type_logits(delta, mkt.mu);
    SharePrediction p;
    p.value = (t.shift + t.denom.log()).matrix();
    for (Index j = 0; j < t.expu.cols(); ++j) t.expu.col(j) /= t.denom;
    p.by_type = std::move(t.expu).matrix();
    p.outside_by_type = (-p.value.array()).exp().matrix();
    p.product = p.by_type.transpose() * mkt.weights;
    p.outside = mkt.weights.dot(p.outside_by_type);
    return p;
}

namespace detail {
// Product and outside shares only.
inline void product_shares(const Delta& delta, const StaticMarket& mkt, Vector& s, double& s0) {
    const TypeLogits t = type_logits(delta, mkt.mu);
    const Vector wd = (mkt.weights.array() / t.denom).matrix();
    s = t.expu.matrix().transpose() * wd;
    s0 = mkt.weights.dot((-(t.shift + t.denom.log())).exp().matrix());
}
}  // namespace detail

// Φ^{δ,γ}(δ)_j = δ_j + [log S_j − log s_j] − γ[log S_0 − log s_0]
inline Delta phi_delta(const Delta& delta, double gamma, const StaticMarket& mkt) {
    if (delta.size() != mkt.products()) throw std::invalid_argument("phi_delta: size mismatch");
    Vector s;
    double s0;
    detail::product_shares(delta, mkt, s, s0);
    const double corr = gamma * (std::log(mkt.outside_share) - std::log(s0));
    return (delta.array() + mkt.shares.array().log() - s.array().log() - corr).matrix();
}

inline Value iota_delta_to_V(const Delta& delta, const StaticMarket& mkt) {
    if (delta.size() != mkt.products()) throw std::invalid_argument("iota_delta_to_V: size mismatch");
    const Index I = mkt.types(), J = mkt.products();
    Eigen::ArrayXd m = Eigen::ArrayXd::Zero(I);
    for (Index j = 0; j < J; ++j) m = m.max(mkt.mu.col(j).array() + delta[j]);
    Eigen::ArrayXd inside = Eigen::ArrayXd::Zero(I);
    for (Index j = 0; j < J; ++j) inside += (mkt.mu.col(j).array() + delta[j] - m).exp();
    Value V(I);
    // log1p keeps V_i > 0 when every inside utility is very negative
    for (Index i = 0; i < I; ++i) V[i] = m[i] == 0.0 ? std::log1p(inside[i]) : m[i] + std::log(std::exp(-m[i]) + inside[i]);
    return V;
}

// ι^γ_{V→δ}(V)_j = log S_j − log Σ_i w_i exp(μ_ij − V_i) − γ log(S_0 / Σ_i w_i exp(−V_i))
inline Delta iota_V_to_delta(const Value& V, double gamma, const StaticMarket& mkt) {
    if (V.size() != mkt.types()) throw std::invalid_argument("iota_V_to_delta: size mismatch");
    const Eigen::ArrayXd a = mkt.weights.array().log() - V.array();
    const Vector lse = detail::column_lse(a, mkt.mu);
    const double lse0 = log_sum_exp(a);
    return (mkt.shares.array().log() - lse.array() - gamma * (std::log(mkt.outside_share) - lse0)).matrix();
}

inline Value phi_V(const Value& V, double gamma, const StaticMarket& mkt) {
    return iota_delta_to_V(iota_V_to_delta(V, gamma, mkt), mkt);
}

// ‖log S − log s(δ)‖∞ over products.
inline double dist_metric(const Delta& delta, const StaticMarket& mkt) {
    if (!all_finite(delta)) return std::numeric_limits<double>::quiet_NaN();
    Vector s;
    double s0;
    detail::product_shares(delta, mkt, s, s0);
    const double d = (mkt.shares.array().log() - s.array().log()).abs().maxCoeff();
    return std::isfinite(d) ? d : std::numeric_limits<double>::quiet_NaN();
}

// ---- Kalouptsidi r-mappings, r_i = log(w_i s_i0) ----

namespace detail {
// D_i(r) = Σ_j S_j exp(μ_ij + r_i)/Σ_k exp(μ_kj + r_k) + S_0 exp(r_i)/Σ_k exp(r_k)
inline Vector kalouptsidi_D(const Vector& r, const StaticMarket& mkt) {
    Eigen::ArrayXXd u = mkt.mu.array().colwise() + r.array();
    const Eigen::ArrayXd m = u.colwise().maxCoeff().transpose();
    u = (u.rowwise() - m.transpose()).exp();
    const Eigen::ArrayXd colsum = u.colwise().sum().transpose();
    const Eigen::ArrayXd weight = mkt.shares.array() / colsum;
    Vector D = (u.matrix() * weight.matrix());
    const double lse = log_sum_exp(r);
    D.array() += mkt.outside_share * (r.array() - lse).exp();
    return D;
}
}  // namespace detail

// F: R^I -> R^I. The last entry is NaN when S_0 − Σ_{i<I} exp(F_i) ≤ 0.
inline Vector kalouptsidi_F(const Vector& r, const StaticMarket& mkt) {
    const Index I = mkt.types();
    if (r.size() != I) throw std::invalid_argument("kalouptsidi_F: size mismatch");
    const Vector D = detail::kalouptsidi_D(r, mkt);
    Vector out(I);
    double used = 0.0;
    for (Index i = 0; i + 1 < I; ++i) {
        out[i] = r[i] + std::log(mkt.weights[i]) - std::log(D[i]);
        used += std::exp(out[i]);
    }
    const double rest = mkt.outside_share - used;
    out[I - 1] = rest > 0.0 ? std::log(rest) : std::numeric_limits<double>::quiet_NaN();
    return out;
}

// F̃: R^{I-1} -> R^{I-1} with the last type's r̃ pinned at 0.
inline Vector kalouptsidi_Ftilde(const Vector& rt, const StaticMarket& mkt) {
    const Index I = mkt.types();
    if (I < 2 || rt.size() != I - 1) throw std::invalid_argument("kalouptsidi_Ftilde: needs I >= 2");
    Vector r(I);
    r.head(I - 1) = rt;
    r[I - 1] = 0.0;
    const Vector D = detail::kalouptsidi_D(r, mkt);
    return (rt.array() + mkt.weights.head(I - 1).array().log() - D.head(I - 1).array().log()).matrix();
}

inline Vector kalouptsidi_r_from_tilde(const Vector& rt, const StaticMarket& mkt) {
    Vector r(rt.size() + 1);
    r.head(rt.size()) = rt;
    r[rt.size()] = 0.0;
    return (r.array() + std::log(mkt.outside_share) - log_sum_exp(r)).matrix();
}

// δ_j = log S_j − log Σ_i exp(μ_ij + r_i)  (r_i already carries log w_i)
inline Delta kalouptsidi_delta(const Vector& r, const StaticMarket& mkt) {
    return (mkt.shares.array().log() - detail::column_lse(r.array(), mkt.mu).array()).matrix();
}

struct InnerSolution {
    Delta delta;
    accel::SolveOutcome outcome;
    double dist = std::numeric_limits<double>::quiet_NaN();
};

inline InnerSolution kalouptsidi_tilde_solve(const StaticMarket& mkt, const accel::AccelConfig& cfg,
                                             const Vector* rt0 = nullptr) {
    const Index I = mkt.types();
    InnerSolution sol;
    if (I == 1) {
        // nothing to iterate: r = log S_0
        sol.outcome.point = Vector(0);
        sol.outcome.converged = true;
        sol.outcome.termination = accel::Termination::converged;
        sol.outcome.final_residual = 0.0;
        sol.delta = kalouptsidi_delta(Vector::Constant(1, std::log(mkt.outside_share)), mkt);
        sol.dist = dist_metric(sol.delta, mkt);
        return sol;
    }
    accel::FixedPointMap map{[&](const Vector& x) { return kalouptsidi_Ftilde(x, mkt); }, I - 1, {}};
    const Vector start = rt0 ? *rt0
                             : Vector((mkt.weights.head(I - 1).array().log() - std::log(mkt.weights[I - 1])).matrix());
    sol.outcome = accel::solve(map, start, cfg);
    sol.delta = kalouptsidi_delta(kalouptsidi_r_from_tilde(sol.outcome.point, mkt), mkt);
    sol.dist = dist_metric(sol.delta, mkt);
    return sol;
}

// Uses F until its last component leaves the reals, then continues with F̃.
inline InnerSolution kalouptsidi_mixed_solve(const StaticMarket& mkt, const accel::AccelConfig& cfg) {
    const Index I = mkt.types();
    bool infeasible = false;
    accel::FixedPointMap map{[&](const Vector& r) {
                                 Vector out = kalouptsidi_F(r, mkt);
                                 if (std::isnan(out[I - 1])) infeasible = true;
                                 return out;
                             },
                             I, {}};
    const Vector r0 = mkt.weights.array().log().matrix();
    InnerSolution sol;
    sol.outcome = accel::solve(map, r0, cfg);
    if (!infeasible || I < 2) {
        sol.delta = kalouptsidi_delta(sol.outcome.point, mkt);
        sol.dist = dist_metric(sol.delta, mkt);
        return sol;
    }
    const long used = sol.outcome.evaluations;
    const Vector& r = sol.outcome.point;
    const Vector rt = (r.head(I - 1).array() - r[I - 1]).matrix();
    accel::AccelConfig rest = cfg;
    rest.max_evaluations = std::max(1L, cfg.max_evaluations - used);
    InnerSolution tail = kalouptsidi_tilde_solve(mkt, rest, &rt);
    tail.outcome.evaluations += used;
    tail.outcome.residual_history.insert(tail.outcome.residual_history.begin(),
                                         sol.outcome.residual_history.begin(), sol.outcome.residual_history.end());
    return tail;
}

// ---- end-to-end static solver ----

enum class Mapping { delta0, delta1, V0, V1, kalouptsidi_mixed, kalouptsidi_tilde };

inline std::string_view to_string(Mapping m) {
    switch (m) {
        case Mapping::delta0: return "delta0";
        case Mapping::delta1: return "delta1";
        case Mapping::V0: return "V0";
        case Mapping::V1: return "V1";
        case Mapping::kalouptsidi_mixed: return "kalouptsidi_mixed";
        case Mapping::kalouptsidi_tilde: return "kalouptsidi_tilde";
    }
    return "?";
}

inline Delta initial_delta(const StaticMarket& mkt) {
    return (mkt.shares.array().log() - std::log(mkt.outside_share)).matrix();
}

inline InnerSolution solve_inner(const StaticMarket& mkt, Mapping mapping, const accel::AccelConfig& cfg) {
    mkt.validate();
    InnerSolution sol;
    switch (mapping) {
        case Mapping::delta0:
        case Mapping::delta1: {
            const double g = mapping == Mapping::delta1 ? 1.0 : 0.0;
            accel::FixedPointMap map{[&](const Vector& d) { return phi_delta(d, g, mkt); }, mkt.products(), {}};
            sol.outcome = accel::solve(map, initial_delta(mkt), cfg);
            sol.delta = sol.outcome.point;
            break;
        }
        case Mapping::V0:
        case Mapping::V1: {
            const double g = mapping == Mapping::V1 ? 1.0 : 0.0;
            accel::FixedPointMap map{[&](const Vector& v) { return phi_V(v, g, mkt); }, mkt.types(), {}};
            sol.outcome = accel::solve(map, Vector::Zero(mkt.types()), cfg);
            sol.delta = iota_V_to_delta(sol.outcome.point, g, mkt);
            break;
        }
        case Mapping::kalouptsidi_mixed: return kalouptsidi_mixed_solve(mkt, cfg);
        case Mapping::kalouptsidi_tilde: return kalouptsidi_tilde_solve(mkt, cfg);
    }
    sol.dist = dist_metric(sol.delta, mkt);
    return sol;
}

}  // namespace blp
