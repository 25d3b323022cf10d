#pragma once
// Seeded data-generating processes for the static, nested and dynamic
// benchmark instances.
//
// Random streams: std::mt19937_64 seeded with derive_seed(master, index,
// stream). Uniforms take the top 53 bits of one engine output, shifted by
// half an ulp so they lie in (0,1). Normals apply Acklam's inverse normal
// CDF to one uniform followed by a single Halley correction step using
// erfc. Standard-library distributions are avoided because their output
// is implementation defined.

#include "blpinner/dynamic_blp.hpp"
#include "blpinner/rcnl.hpp"
#include "blpinner/static_rcl.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

namespace blp {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t stream = 0) {
    return splitmix64(splitmix64(splitmix64(master) ^ index) ^ stream);
}

// Acklam's rational approximation plus one Halley step.
inline double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("inverse_normal_cdf: p must lie in (0,1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double plow = 0.02425, phigh = 1.0 - plow;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= phigh) {
        const double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

class SeededRng {
public:
    SeededRng(std::uint64_t master, std::uint64_t index, std::uint64_t stream = 0)
        : master_(master), index_(index), engine_(derive_seed(master, index, stream)) {}

    std::uint64_t master() const { return master_; }
    std::uint64_t index() const { return index_; }

    double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() { return inverse_normal_cdf(uniform()); }
    double normal(double mean, double sd) { return mean + sd * normal(); }

private:
    std::uint64_t master_, index_;
    std::mt19937_64 engine_;
};

// ---- static random-coefficients logit ----

struct StaticDgpParams {
    Index J = 25;
    Index I = 1000;
    std::array<double, 5> mean_coef{0.0, 1.5, 1.5, 0.5, -3.0};  // on (1, x1, x2, x3, p)
    std::array<double, 5> sd_coef{0.5, 0.5, 0.5, 0.5, 0.2};
    Eigen::Matrix3d x_cov = (Eigen::Matrix3d() << 1.0, -0.8, 0.3, -0.8, 1.0, 0.3, 0.3, 0.3, 1.0).finished();
    double price_const = 3.0;
    double price_xi = 1.5;
    double price_u_hi = 5.0;
};

struct StaticInstance {
    StaticMarket market;
    Delta true_delta;
    Vector true_sd;  // nonlinear parameters θ*
    Matrix X;        // J x 5
    Matrix nu;       // I x 5, simulation nodes
    int redraws = 0;
};

// μ_ij = Σ_k X_jk σ_k ν_ik
inline Matrix build_mu(const Matrix& X, const Matrix& nu, const Vector& sd) {
    return nu * sd.asDiagonal() * X.transpose();
}

namespace detail {

struct StaticDraw {
    Matrix X;
    Vector xi;
    Matrix nu;
};

// Per product: three correlated characteristics, ξ, then the price shock
// u; afterwards five nodes per consumer.
inline StaticDraw draw_static(const StaticDgpParams& p, SeededRng& rng) {
    const Eigen::Matrix3d L = p.x_cov.llt().matrixL();
    StaticDraw d;
    d.X.resize(p.J, 5);
    d.xi.resize(p.J);
    for (Index j = 0; j < p.J; ++j) {
        Eigen::Vector3d z;
        for (int k = 0; k < 3; ++k) z[k] = rng.normal();
        const Eigen::Vector3d x = L * z;
        d.xi[j] = rng.normal();
        const double u = rng.uniform(0.0, p.price_u_hi);
        d.X(j, 0) = 1.0;
        d.X.block<1, 3>(j, 1) = x.transpose();
        d.X(j, 4) = p.price_const + p.price_xi * d.xi[j] + u + x.sum();
    }
    d.nu.resize(p.I, 5);
    for (Index i = 0; i < p.I; ++i)
        for (int k = 0; k < 5; ++k) d.nu(i, k) = rng.normal();
    return d;
}

inline Vector to_vector(const std::array<double, 5>& a) { return Eigen::Map<const Vector>(a.data(), 5); }

}  // namespace detail

inline StaticInstance gen_static_market(const StaticDgpParams& p, std::uint64_t seed, std::uint64_t index = 0) {
    if (p.J < 1 || p.I < 1) throw std::invalid_argument("gen_static_market: J, I >= 1");
    for (int attempt = 0; attempt < 100; ++attempt) {
        SeededRng rng(seed, index, static_cast<std::uint64_t>(attempt));
        detail::StaticDraw d = detail::draw_static(p, rng);
        StaticInstance inst;
        inst.true_sd = detail::to_vector(p.sd_coef);
        inst.true_delta = d.X * detail::to_vector(p.mean_coef) + d.xi;
        const Matrix mu = build_mu(d.X, d.nu, inst.true_sd);
        inst.market.mu = mu;
        inst.market.weights = Vector::Constant(p.I, 1.0 / static_cast<double>(p.I));
        const SharePrediction s = predict_shares(inst.true_delta, inst.market);
        if (!(s.product.array() > 1e-300).all() || !(s.outside > 1e-300)) continue;
        inst.market.shares = s.product;
        inst.market.outside_share = s.outside;
        inst.X = std::move(d.X);
        inst.nu = std::move(d.nu);
        inst.redraws = attempt;
        return inst;
    }
    throw std::runtime_error("gen_static_market: no feasible draw");
}

// Componentwise U[0, 2θ*].
inline Vector draw_theta(const Vector& true_theta, SeededRng& rng) {
    Vector out(true_theta.size());
    for (Index k = 0; k < out.size(); ++k) out[k] = rng.uniform(0.0, 2.0 * true_theta[k]);
    return out;
}

// Candidate market: observed shares kept at truth, μ rebuilt at θ.
inline StaticMarket candidate_market(const StaticInstance& inst, const Vector& theta) {
    StaticMarket m = inst.market;
    m.mu = build_mu(inst.X, inst.nu, theta);
    return m;
}

// ---- nested logit ----

struct NestedInstance {
    NestedMarket market;
    Delta true_delta;
    Vector true_sd;
    Matrix X, nu;
    int redraws = 0;
};

inline NestedInstance gen_nested_market(StaticDgpParams p, Index G, Index per_nest, double rho, std::uint64_t seed,
                                        std::uint64_t index = 0) {
    p.J = G * per_nest;
    std::vector<int> nest_of(static_cast<std::size_t>(p.J));
    for (Index j = 0; j < p.J; ++j) nest_of[j] = static_cast<int>(j / per_nest);
    for (int attempt = 0; attempt < 100; ++attempt) {
        SeededRng rng(seed, index, static_cast<std::uint64_t>(attempt));
        detail::StaticDraw d = detail::draw_static(p, rng);
        NestedInstance inst;
        inst.true_sd = detail::to_vector(p.sd_coef);
        inst.true_delta = d.X * detail::to_vector(p.mean_coef) + d.xi;
        inst.market.base.mu = build_mu(d.X, d.nu, inst.true_sd);
        inst.market.base.weights = Vector::Constant(p.I, 1.0 / static_cast<double>(p.I));
        inst.market.nest_of = nest_of;
        inst.market.rho = Vector::Constant(G, rho);
        const NestedShares s = rcnl_shares(inst.true_delta, inst.market);
        if (!(s.product.array() > 1e-300).all() || !(s.outside > 1e-300)) continue;
        inst.market.base.shares = s.product;
        inst.market.base.outside_share = s.outside;
        inst.X = std::move(d.X);
        inst.nu = std::move(d.nu);
        inst.redraws = attempt;
        return inst;
    }
    throw std::runtime_error("gen_nested_market: no feasible draw");
}

inline NestedMarket candidate_market(const NestedInstance& inst, const Vector& theta) {
    NestedMarket m = inst.market;
    m.base.mu = build_mu(inst.X, inst.nu, theta);
    return m;
}

// ---- dynamic durable goods ----

struct DynamicDgpParams {
    Index J = 25;
    Index I = 50;
    Index T = 50;
    double beta = 0.99;
    double chi_sd = 0.5;
    // price: γ0 + γ_x'χ + γ_z z + γ_w w + γ_ξ ξ − γ_p' Σ_{k≠j} χ_k + u
    double g0 = 1.0;
    std::array<double, 3> g_chi{0.2, 0.2, 0.1};
    double g_z = 1.0, g_w = 0.2, g_xi = 0.7;
    std::array<double, 3> g_p{0.1, 0.1, 0.1};
    double u_sd = 0.01;
    double rho0 = 0.1, rho_z = 0.95, z0 = 8.0, eta_sd = 0.1;
    // utility: θ0 + θ1 χ1 + θ2 χ2 + θ3 χ3 − θp p + ξ
    double theta0 = 6.0;
    std::array<double, 3> theta_chi{1.0, 1.0, 0.5};
    double theta_p = 2.0;
    std::array<double, 3> sd{0.5, 0.5, 0.25};  // on χ1, χ2, −p
};

struct DynamicInstance {
    DurableMarket market;
    DurableSolution truth;
    std::vector<Matrix> chi;  // T entries, J x 3
    Matrix price;             // J x T
    Matrix nu;                // I x 3
    Vector true_sd;
    int redraws = 0;
};

// Per-type scalar v = log(exp(βv) + exp(ω)), solved by Newton.
inline double stationary_value(double beta, double omega) {
    double v = omega - std::log1p(-beta);  // exact when ω dominates
    for (int it = 0; it < 200; ++it) {
        const double lae = log_add_exp(beta * v, omega);
        const double g = v - lae;
        const double dg = 1.0 - beta * std::exp(beta * v - lae);
        const double step = g / dg;
        v -= step;
        if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(v))) break;
    }
    return v;
}

inline std::vector<Matrix> build_dynamic_mu(const std::vector<Matrix>& chi, const Matrix& price, const Matrix& nu,
                                            const Vector& sd) {
    std::vector<Matrix> mu(chi.size());
    for (std::size_t t = 0; t < chi.size(); ++t) {
        Matrix Z(chi[t].rows(), 3);
        Z.col(0) = chi[t].col(0);
        Z.col(1) = chi[t].col(1);
        Z.col(2) = -price.col(static_cast<Index>(t));
        mu[t] = nu * sd.asDiagonal() * Z.transpose();
    }
    return mu;
}

// Exact solution of the durable-goods model at (δ, μ): terminal
// stationarity, backward induction, then forward ownership and shares.
inline DurableSolution solve_durable_truth(const Matrix& delta, const std::vector<Matrix>& mu, const Vector& weights,
                                           const Vector& pr0_init, double beta, Matrix& shares, Vector& outside) {
    const Index I = weights.size(), J = delta.rows(), T = delta.cols();
    DurableSolution s;
    s.delta = delta;
    s.V.resize(I, T);
    Matrix omega(I, T);
    for (Index t = 0; t < T; ++t) {
        const Eigen::ArrayXXd u = (mu[t].rowwise() + delta.col(t).transpose()).array();
        const Eigen::ArrayXd m = u.rowwise().maxCoeff();
        omega.col(t) = (m + (u.colwise() - m).exp().rowwise().sum().log()).matrix();
    }
    for (Index i = 0; i < I; ++i) s.V(i, T - 1) = stationary_value(beta, omega(i, T - 1));
    for (Index t = T - 2; t >= 0; --t)
        for (Index i = 0; i < I; ++i) s.V(i, t) = log_add_exp(beta * s.V(i, t + 1), omega(i, t));
    s.pr0.resize(I, T);
    s.ccp.resize(static_cast<std::size_t>(T));
    shares.resize(J, T);
    outside.resize(T);
    Vector p = pr0_init;
    for (Index t = 0; t < T; ++t) {
        s.pr0.col(t) = p;
        const Vector a = detail::active_weights(weights, p);
        s.ccp[t] = ((mu[t].rowwise() + delta.col(t).transpose()).colwise() - s.V.col(t)).array().exp().matrix();
        const Index tn = std::min(t + 1, T - 1);
        const Vector stay = (beta * s.V.col(tn) - s.V.col(t)).array().exp().matrix();
        shares.col(t) = s.ccp[t].transpose() * a;
        outside[t] = a.dot(stay);
        p = p.cwiseProduct(stay);
    }
    return s;
}

inline DynamicInstance gen_dynamic_market(const DynamicDgpParams& p, std::uint64_t seed, std::uint64_t index = 0) {
    if (p.J < 1 || p.I < 1 || p.T < 1) throw std::invalid_argument("gen_dynamic_market: J, I, T >= 1");
    for (int attempt = 0; attempt < 100; ++attempt) {
        SeededRng rng(seed, index, static_cast<std::uint64_t>(attempt));
        DynamicInstance inst;
        inst.chi.assign(static_cast<std::size_t>(p.T), Matrix(p.J, 3));
        inst.price.resize(p.J, p.T);
        Matrix delta(p.J, p.T);
        Vector z = Vector::Constant(p.J, p.z0);
        // per period and product: χ (3), ξ, η, w, u
        for (Index t = 0; t < p.T; ++t) {
            Matrix& chi = inst.chi[t];
            Vector xi(p.J), w(p.J), u(p.J);
            for (Index j = 0; j < p.J; ++j) {
                for (int k = 0; k < 3; ++k) chi(j, k) = p.chi_sd * rng.normal();
                xi[j] = rng.normal();
                z[j] = p.rho0 + p.rho_z * z[j] + p.eta_sd * rng.normal();
                w[j] = rng.normal();
                u[j] = p.u_sd * rng.normal();
            }
            const Eigen::RowVector3d total = chi.colwise().sum();
            for (Index j = 0; j < p.J; ++j) {
                double price = p.g0 + p.g_z * z[j] + p.g_w * w[j] + p.g_xi * xi[j] + u[j];
                for (int k = 0; k < 3; ++k) price += p.g_chi[k] * chi(j, k) - p.g_p[k] * (total[k] - chi(j, k));
                inst.price(j, t) = price;
                delta(j, t) = p.theta0 + p.theta_chi[0] * chi(j, 0) + p.theta_chi[1] * chi(j, 1) +
                              p.theta_chi[2] * chi(j, 2) - p.theta_p * price + xi[j];
            }
        }
        inst.nu.resize(p.I, 3);
        for (Index i = 0; i < p.I; ++i)
            for (int k = 0; k < 3; ++k) inst.nu(i, k) = rng.normal();
        inst.true_sd = Eigen::Map<const Vector>(p.sd.data(), 3);

        DurableMarket& m = inst.market;
        m.T = p.T;
        m.beta = p.beta;
        m.weights = Vector::Constant(p.I, 1.0 / static_cast<double>(p.I));
        m.pr0_init = Vector::Ones(p.I);
        m.mu = build_dynamic_mu(inst.chi, inst.price, inst.nu, inst.true_sd);
        inst.truth = solve_durable_truth(delta, m.mu, m.weights, m.pr0_init, m.beta, m.shares, m.outside_shares);
        if (!inst.truth.V.allFinite() || !(m.shares.array() > 1e-300).all() || !(m.outside_shares.array() > 1e-300).all())
            continue;
        inst.redraws = attempt;
        return inst;
    }
    throw std::runtime_error("gen_dynamic_market: no feasible draw");
}

inline DurableMarket candidate_market(const DynamicInstance& inst, const Vector& theta) {
    DurableMarket m = inst.market;
    m.mu = build_dynamic_mu(inst.chi, inst.price, inst.nu, theta);
    return m;
}

// ---- large-heterogeneity counterexample ----

// Two products, two types; type 1 strongly prefers product 1 and type 2
// product 2 (μ = 10 on the diagonal), w = (0.1, 0.9), true δ = (0, −1).
inline StaticMarket large_heterogeneity_market(Delta* true_delta = nullptr) {
    StaticMarket m;
    m.mu = (Matrix(2, 2) << 10.0, 0.0, 0.0, 10.0).finished();
    m.weights = (Vector(2) << 0.1, 0.9).finished();
    const Delta d = (Vector(2) << 0.0, -1.0).finished();
    const SharePrediction s = predict_shares(d, m);
    m.shares = s.product;
    m.outside_share = s.outside;
    if (true_delta) *true_delta = d;
    return m;
}

}  // namespace blp
