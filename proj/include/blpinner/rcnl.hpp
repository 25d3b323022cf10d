#pragma once
// Random-coefficient nested logit: nested shares, the δ mapping with nest
// parameter ρ and the inclusive-value mapping.

#include "blpinner/static_rcl.hpp"

#include <vector>

namespace blp {

struct NestedMarket {
    StaticMarket base;
    std::vector<int> nest_of;  // product -> nest in [0, G)
    Vector rho;                // per nest, in [0, 1)

    Index nests() const { return rho.size(); }

    Vector nest_shares() const {
        Vector Sg = Vector::Zero(nests());
        for (Index j = 0; j < base.products(); ++j) Sg[nest_of[j]] += base.shares[j];
        return Sg;
    }

    void validate() const {
        base.validate();
        if (static_cast<Index>(nest_of.size()) != base.products())
            throw std::invalid_argument("NestedMarket: nest_of must cover every product");
        std::vector<int> count(static_cast<std::size_t>(nests()), 0);
        for (int g : nest_of) {
            if (g < 0 || g >= nests()) throw std::invalid_argument("NestedMarket: nest index out of range");
            ++count[g];
        }
        for (int c : count)
            if (c == 0) throw std::invalid_argument("NestedMarket: empty nest");
        if (!(rho.array() >= 0.0).all() || !(rho.array() < 1.0).all())
            throw std::invalid_argument("NestedMarket: rho must lie in [0,1)");
    }
};

inline NestedMarket make_nested(StaticMarket base, std::vector<int> nest_of, double rho, Index G) {
    return NestedMarket{std::move(base), std::move(nest_of), Vector::Constant(G, rho)};
}

struct NestedShares {
    Vector product;  // s_j
    Vector nest;     // s_g
    double outside = 0.0;
    Matrix iv;       // IV_ig, I x G
    Matrix by_type;  // s_ij
};

// IV_ig = (1−ρ_g) log Σ_{j∈g} exp((δ_j + μ_ij)/(1−ρ_g))
inline Matrix rcnl_iota_delta_to_IV(const Delta& delta, const NestedMarket& mkt) {
    const Index I = mkt.base.types(), J = mkt.base.products(), G = mkt.nests();
    if (delta.size() != J) throw std::invalid_argument("rcnl: delta size mismatch");
    Matrix mx = Matrix::Constant(I, G, -std::numeric_limits<double>::infinity());
    for (Index j = 0; j < J; ++j) {
        const int g = mkt.nest_of[j];
        const double inv = 1.0 / (1.0 - mkt.rho[g]);
        for (Index i = 0; i < I; ++i) mx(i, g) = std::max(mx(i, g), (delta[j] + mkt.base.mu(i, j)) * inv);
    }
    Matrix acc = Matrix::Zero(I, G);
    for (Index j = 0; j < J; ++j) {
        const int g = mkt.nest_of[j];
        const double inv = 1.0 / (1.0 - mkt.rho[g]);
        for (Index i = 0; i < I; ++i) acc(i, g) += std::exp((delta[j] + mkt.base.mu(i, j)) * inv - mx(i, g));
    }
    Matrix iv(I, G);
    for (Index g = 0; g < G; ++g)
        for (Index i = 0; i < I; ++i) iv(i, g) = (1.0 - mkt.rho[g]) * (mx(i, g) + std::log(acc(i, g)));
    return iv;
}

namespace detail {
// log(1 + Σ_g exp(IV_ig)) per type.
inline Vector rcnl_log_denominator(const Matrix& iv) {
    Vector L(iv.rows());
    for (Index i = 0; i < iv.rows(); ++i) {
        const double m = std::max(0.0, iv.row(i).maxCoeff());
        L[i] = m + std::log(std::exp(-m) + (iv.row(i).array() - m).exp().sum());
    }
    return L;
}
}  // namespace detail

inline NestedShares rcnl_shares(const Delta& delta, const NestedMarket& mkt) {
    const Index I = mkt.base.types(), J = mkt.base.products(), G = mkt.nests();
    NestedShares out;
    out.iv = rcnl_iota_delta_to_IV(delta, mkt);
    const Vector L = detail::rcnl_log_denominator(out.iv);
    out.by_type.resize(I, J);
    for (Index j = 0; j < J; ++j) {
        const int g = mkt.nest_of[j];
        const double inv = 1.0 / (1.0 - mkt.rho[g]);
        for (Index i = 0; i < I; ++i)
            out.by_type(i, j) = std::exp((delta[j] + mkt.base.mu(i, j) - out.iv(i, g)) * inv + out.iv(i, g) - L[i]);
    }
    out.product = out.by_type.transpose() * mkt.base.weights;
    out.nest = Vector::Zero(G);
    for (Index j = 0; j < J; ++j) out.nest[mkt.nest_of[j]] += out.product[j];
    out.outside = mkt.base.weights.dot((-L.array()).exp().matrix());
    return out;
}

// Φ_j = δ_j + (1−ρ)[log S_j − log s_j] + γρ[log S_g − log s_g] − γ[log S_0 − log s_0]
inline Delta rcnl_phi_delta(const Delta& delta, double gamma, const NestedMarket& mkt) {
    const NestedShares s = rcnl_shares(delta, mkt);
    const Vector Sg = mkt.nest_shares();
    const double out_corr = gamma * (std::log(mkt.base.outside_share) - std::log(s.outside));
    Delta next(delta.size());
    for (Index j = 0; j < delta.size(); ++j) {
        const int g = mkt.nest_of[j];
        const double rho = mkt.rho[g];
        next[j] = delta[j] + (1.0 - rho) * (std::log(mkt.base.shares[j]) - std::log(s.product[j])) +
                  gamma * rho * (std::log(Sg[g]) - std::log(s.nest[g])) - out_corr;
    }
    return next;
}

inline Delta rcnl_iota_IV_to_delta(const Matrix& iv, double gamma, const NestedMarket& mkt) {
    const Index I = mkt.base.types(), J = mkt.base.products(), G = mkt.nests();
    if (iv.rows() != I || iv.cols() != G) throw std::invalid_argument("rcnl: IV must be I x G");
    const Vector L = detail::rcnl_log_denominator(iv);
    const Vector logw = mkt.base.weights.array().log().matrix();
    // log s_g(IV), log s_0(IV)
    Vector log_sg(G);
    for (Index g = 0; g < G; ++g) log_sg[g] = log_sum_exp((logw + iv.col(g) - L).eval());
    const double log_s0 = log_sum_exp((logw - L).eval());
    const Vector Sg = mkt.nest_shares();
    Delta delta(J);
    Vector tmp(I);
    for (Index j = 0; j < J; ++j) {
        const int g = mkt.nest_of[j];
        const double rho = mkt.rho[g], inv = 1.0 / (1.0 - rho);
        for (Index i = 0; i < I; ++i) tmp[i] = logw[i] + (mkt.base.mu(i, j) - iv(i, g)) * inv + iv(i, g) - L[i];
        delta[j] = (1.0 - rho) * (std::log(mkt.base.shares[j]) - log_sum_exp(tmp)) +
                   gamma * rho * (std::log(Sg[g]) - log_sg[g]) -
                   gamma * (std::log(mkt.base.outside_share) - log_s0);
    }
    return delta;
}

inline Matrix rcnl_phi_IV(const Matrix& iv, double gamma, const NestedMarket& mkt) {
    return rcnl_iota_delta_to_IV(rcnl_iota_IV_to_delta(iv, gamma, mkt), mkt);
}

inline double rcnl_dist(const Delta& delta, const NestedMarket& mkt) {
    if (!all_finite(delta)) return std::numeric_limits<double>::quiet_NaN();
    const NestedShares s = rcnl_shares(delta, mkt);
    const double d = (mkt.base.shares.array().log() - s.product.array().log()).abs().maxCoeff();
    return std::isfinite(d) ? d : std::numeric_limits<double>::quiet_NaN();
}

// Homogeneous nested-logit inversion, used as the δ starting point.
inline Delta rcnl_initial_delta(const NestedMarket& mkt) {
    const Vector Sg = mkt.nest_shares();
    Delta d(mkt.base.products());
    for (Index j = 0; j < d.size(); ++j) {
        const double rho = mkt.rho[mkt.nest_of[j]];
        d[j] = (1.0 - rho) * std::log(mkt.base.shares[j]) + rho * std::log(Sg[mkt.nest_of[j]]) -
               std::log(mkt.base.outside_share);
    }
    return d;
}

enum class NestedMapping { delta0, delta1, IV0, IV1 };

inline InnerSolution rcnl_solve(const NestedMarket& mkt, NestedMapping mapping, const accel::AccelConfig& cfg) {
    mkt.validate();
    InnerSolution sol;
    const Index I = mkt.base.types(), G = mkt.nests();
    if (mapping == NestedMapping::delta0 || mapping == NestedMapping::delta1) {
        const double g = mapping == NestedMapping::delta1 ? 1.0 : 0.0;
        accel::FixedPointMap map{[&](const Vector& d) { return rcnl_phi_delta(d, g, mkt); }, mkt.base.products(), {}};
        sol.outcome = accel::solve(map, rcnl_initial_delta(mkt), cfg);
        sol.delta = sol.outcome.point;
    } else {
        const double g = mapping == NestedMapping::IV1 ? 1.0 : 0.0;
        // IV stored column-major as an I*G vector
        accel::FixedPointMap map{[&](const Vector& x) {
                                     const Matrix iv = Eigen::Map<const Matrix>(x.data(), I, G);
                                     const Matrix next = rcnl_phi_IV(iv, g, mkt);
                                     return Vector(Eigen::Map<const Vector>(next.data(), I * G));
                                 },
                                 I * G, {}};
        sol.outcome = accel::solve(map, Vector::Zero(I * G), cfg);
        const Matrix iv = Eigen::Map<const Matrix>(sol.outcome.point.data(), I, G);
        sol.delta = rcnl_iota_IV_to_delta(iv, g, mkt);
    }
    sol.dist = rcnl_dist(sol.delta, mkt);
    return sol;
}

}  // namespace blp
