#pragma once
// Small numerical helpers: least squares, Chebyshev interpolation,
// Gauss-Hermite quadrature, AR(1) fitting and log-sum-exp.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace blp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline double sup_norm(const Vector& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

// log(exp(a_0) + ... ) over a contiguous range, max-shifted.
template <class Range>
double log_sum_exp(const Range& r) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : r) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double acc = 0.0;
    for (double x : r) acc += std::exp(x - m);
    return m + std::log(acc);
}

// log(exp(a) + exp(b)).
inline double log_add_exp(double a, double b) {
    if (a < b) std::swap(a, b);
    if (a == -std::numeric_limits<double>::infinity()) return a;
    return a + std::log1p(std::exp(b - a));
}

namespace detail {

// log Σ_i exp(a_i + M_ij) for every column j.
inline Vector column_lse(const Eigen::ArrayXd& a, const Matrix& M) {
    Vector out(M.cols());
    Eigen::ArrayXd u(M.rows());
    for (Index j = 0; j < M.cols(); ++j) {
        u = M.col(j).array() + a;
        const double m = u.maxCoeff();
        out[j] = m + std::log((u - m).exp().sum());
    }
    return out;
}

// Row shift m_i = max_j (M_ij + b_j), E_ij = exp(M_ij + b_j − m_i) and
// ω_i = m_i + log Σ_j E_ij, built column by column.
inline void row_logits(const Matrix& M, const Eigen::Ref<const Vector>& b, Eigen::ArrayXXd& E, Eigen::ArrayXd& shift,
                       Eigen::ArrayXd& omega) {
    const Index I = M.rows(), J = M.cols();
    shift = Eigen::ArrayXd::Constant(I, -std::numeric_limits<double>::infinity());
    for (Index j = 0; j < J; ++j) shift = shift.max(M.col(j).array() + b[j]);
    E.resize(I, J);
    Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(I);
    for (Index j = 0; j < J; ++j) {
        E.col(j) = (M.col(j).array() + b[j] - shift).exp();
        sum += E.col(j);
    }
    omega = shift + sum.log();
}

}  // namespace detail

// Least squares; among minimisers returns the minimum-norm one.
inline Vector ls_minnorm(const Matrix& A, const Vector& b) {
    if (A.rows() != b.size()) throw std::invalid_argument("ls_minnorm: row mismatch");
    if (A.cols() == 0) return Vector(0);
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
    return cod.solve(b);
}

// Chebyshev-Gauss nodes mapped to [lo, hi], ascending.
inline Vector chebyshev_nodes(int n, double lo, double hi) {
    if (n < 1 || !(lo < hi)) throw std::invalid_argument("chebyshev_nodes: need n>=1, lo<hi");
    Vector z(n);
    for (int k = 0; k < n; ++k) {
        // angle descends so that z ascends
        const double ang = std::numbers::pi * (2.0 * (n - 1 - k) + 1.0) / (2.0 * n);
        double c = std::cos(ang);
        if (std::abs(c) < 1e-15) c = 0.0;
        z[k] = lo + (hi - lo) * (c + 1.0) / 2.0;
    }
    return z;
}

class ChebyshevInterpolant {
public:
    ChebyshevInterpolant() = default;
    ChebyshevInterpolant(double lo, double hi, Vector coeffs)
        : lo_(lo), hi_(hi), c_(std::move(coeffs)) {}

    // values[k] is the function value at chebyshev_nodes(n, lo, hi)[k].
    static ChebyshevInterpolant fit(const Vector& values, double lo, double hi) {
        const Index n = values.size();
        if (n < 1) throw std::invalid_argument("chebyshev fit: empty");
        Vector c = Vector::Zero(n);
        for (Index k = 0; k < n; ++k) {
            const double ang = std::numbers::pi * (2.0 * (n - 1 - k) + 1.0) / (2.0 * n);
            for (Index j = 0; j < n; ++j) c[j] += values[k] * std::cos(j * ang);
        }
        c *= 2.0 / n;
        c[0] *= 0.5;
        return ChebyshevInterpolant(lo, hi, std::move(c));
    }

    const Vector& coefficients() const { return c_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }

    // Arguments outside [lo, hi] are clamped to the boundary.
    double operator()(double x) const {
        x = std::clamp(x, lo_, hi_);
        const double z = (2.0 * x - lo_ - hi_) / (hi_ - lo_);
        double b1 = 0.0, b2 = 0.0;
        for (Index j = c_.size() - 1; j >= 1; --j) {
            const double b0 = 2.0 * z * b1 - b2 + c_[j];
            b2 = b1;
            b1 = b0;
        }
        return z * b1 - b2 + c_[0];
    }

private:
    double lo_ = -1.0, hi_ = 1.0;
    Vector c_;
};

struct Quadrature {
    Vector nodes;
    Vector weights;
};

// Physicists' Gauss-Hermite rule (weight exp(-x^2)) via Golub-Welsch.
inline Quadrature gauss_hermite(int order) {
    if (order < 1) throw std::invalid_argument("gauss_hermite: order >= 1");
    Matrix J = Matrix::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        J(k, k - 1) = J(k - 1, k) = std::sqrt(k / 2.0);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(J);
    Quadrature q;
    q.nodes = es.eigenvalues();
    q.weights.resize(order);
    const double sqrt_pi = std::sqrt(std::numbers::pi);
    for (int k = 0; k < order; ++k) {
        const double v0 = es.eigenvectors()(0, k);
        q.weights[k] = sqrt_pi * v0 * v0;
    }
    // symmetrise against eigen-solver rounding
    for (int k = 0; k < order / 2; ++k) {
        const int m = order - 1 - k;
        const double x = 0.5 * (q.nodes[m] - q.nodes[k]);
        const double w = 0.5 * (q.weights[m] + q.weights[k]);
        q.nodes[k] = -x;
        q.nodes[m] = x;
        q.weights[k] = q.weights[m] = w;
    }
    if (order % 2 == 1) q.nodes[order / 2] = 0.0;
    return q;
}

// E[f(X)] for X ~ N(mean, sd^2) using a Gauss-Hermite rule.
template <class F>
double normal_expectation(const Quadrature& q, double mean, double sd, F&& f) {
    const double scale = std::sqrt(2.0) * sd;
    double acc = 0.0;
    for (Index k = 0; k < q.nodes.size(); ++k) acc += q.weights[k] * f(mean + scale * q.nodes[k]);
    return acc / std::sqrt(std::numbers::pi);
}

struct Ar1Fit {
    double intercept = 0.0;
    double slope = 0.0;
    double sigma = 0.0;
};

// OLS of x[t+1] on (1, x[t]). Residual sd uses n-2 degrees of freedom,
// n = number of pairs. A flat regressor gives slope 0.
inline Ar1Fit ols_ar1(const double* x, Index len) {
    if (len < 3) throw std::invalid_argument("ols_ar1: series length >= 3");
    const Index n = len - 1;
    double mx = 0.0, my = 0.0;
    for (Index t = 0; t < n; ++t) {
        mx += x[t];
        my += x[t + 1];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (Index t = 0; t < n; ++t) {
        sxx += (x[t] - mx) * (x[t] - mx);
        sxy += (x[t] - mx) * (x[t + 1] - my);
    }
    Ar1Fit fit;
    if (sxx <= 1e-24 * n * std::max(1.0, mx * mx)) {
        fit.slope = 0.0;
        fit.intercept = my;
    } else {
        fit.slope = sxy / sxx;
        fit.intercept = my - fit.slope * mx;
    }
    double ssr = 0.0;
    for (Index t = 0; t < n; ++t) {
        const double e = x[t + 1] - fit.intercept - fit.slope * x[t];
        ssr += e * e;
    }
    fit.sigma = n > 2 ? std::sqrt(ssr / (n - 2)) : 0.0;
    return fit;
}

inline Ar1Fit ols_ar1(const Vector& x) { return ols_ar1(x.data(), x.size()); }

}  // namespace blp
