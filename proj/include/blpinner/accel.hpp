#pragma once
// Fixed-point engine: plain iteration, Anderson acceleration, spectral
// steps and SQUAREM, with optional per-block step sizes.

#include "blpinner/numerics.hpp"

#include <cmath>
#include <deque>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace blp::accel {

enum class Method { plain, anderson, spectral, squarem };
enum class StepRule { S1, S2, S3, S3prime };
enum class Termination { converged, max_evaluations, non_finite };

using Blocks = std::vector<std::vector<Index>>;

struct FixedPointMap {
    std::function<Vector(const Vector&)> evaluate;
    Index dimension = 0;
    Blocks blocks;  // empty: no partition
};

struct AccelConfig {
    Method method = Method::plain;
    double tolerance = 1e-13;
    long max_evaluations = 1000;
    int anderson_memory = 5;
    StepRule step_rule = StepRule::S3;
    std::optional<double> step_cap;
    bool use_blocks = false;
    double initial_alpha = 1.0;
    bool record_history = true;
};

struct SolveOutcome {
    Vector point;
    bool converged = false;
    long evaluations = 0;
    Termination termination = Termination::max_evaluations;
    double final_residual = std::numeric_limits<double>::infinity();
    std::vector<double> residual_history;
};

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::plain: return "plain";
        case Method::anderson: return "anderson";
        case Method::spectral: return "spectral";
        case Method::squarem: return "squarem";
    }
    return "?";
}
inline std::string_view to_string(StepRule r) {
    switch (r) {
        case StepRule::S1: return "S1";
        case StepRule::S2: return "S2";
        case StepRule::S3: return "S3";
        case StepRule::S3prime: return "S3prime";
    }
    return "?";
}
inline std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::converged: return "converged";
        case Termination::max_evaluations: return "max_evaluations";
        case Termination::non_finite: return "non_finite";
    }
    return "?";
}
inline Method parse_method(std::string_view s) {
    if (s == "plain") return Method::plain;
    if (s == "anderson") return Method::anderson;
    if (s == "spectral") return Method::spectral;
    if (s == "squarem") return Method::squarem;
    throw std::invalid_argument("unknown accel method: " + std::string(s));
}
inline StepRule parse_step_rule(std::string_view s) {
    if (s == "S1") return StepRule::S1;
    if (s == "S2") return StepRule::S2;
    if (s == "S3") return StepRule::S3;
    if (s == "S3prime" || s == "S3'") return StepRule::S3prime;
    throw std::invalid_argument("unknown step rule: " + std::string(s));
}

// Step size from s = x_n - x_{n-1} and y = F_n - F_{n-1}. Returns nullopt
// when y is zero (or the rule's denominator vanishes).
inline std::optional<double> spectral_alpha(const Vector& s, const Vector& y, StepRule rule,
                                            std::optional<double> cap = std::nullopt) {
    const double yy = y.squaredNorm();
    if (!(yy > 0.0)) return std::nullopt;
    const double sy = s.dot(y);
    double a = 0.0;
    switch (rule) {
        case StepRule::S1: a = -sy / yy; break;
        case StepRule::S2:
            if (sy == 0.0) return std::nullopt;
            a = -s.squaredNorm() / sy;
            break;
        case StepRule::S3: a = std::sqrt(s.squaredNorm() / yy); break;
        case StepRule::S3prime:
            a = (sy > 0.0 ? 1.0 : (sy < 0.0 ? -1.0 : 0.0)) * std::sqrt(s.squaredNorm() / yy);
            break;
    }
    if (cap) a = std::min(a, *cap);
    return a;
}

inline Vector spectral_update(const Vector& x, const Vector& F, double alpha) {
    if (x.size() != F.size()) throw std::invalid_argument("spectral_update: size mismatch");
    return x + alpha * F;
}

inline Vector spectral_update(const Vector& x, const Vector& F, const std::vector<double>& alpha,
                              const Blocks& blocks) {
    if (x.size() != F.size() || alpha.size() != blocks.size())
        throw std::invalid_argument("spectral_update: size mismatch");
    Vector out = x;
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (Index i : blocks[b]) out[i] += alpha[b] * F[i];
    return out;
}

inline Vector squarem_update(const Vector& x, const Vector& fx, const Vector& ffx, double alpha) {
    if (x.size() != fx.size() || x.size() != ffx.size())
        throw std::invalid_argument("squarem_update: size mismatch");
    const Vector s = fx - x;
    const Vector y = ffx - 2.0 * fx + x;
    return x + 2.0 * alpha * s + alpha * alpha * y;
}

// Weights θ (oldest first, summing to one) from residual history f
// (oldest first, m_n+1 entries).
inline Vector anderson_weights(const std::vector<Vector>& f) {
    const Index mn = static_cast<Index>(f.size()) - 1;
    if (mn < 0) throw std::invalid_argument("anderson_weights: empty history");
    Vector theta(mn + 1);
    if (mn == 0) {
        theta[0] = 1.0;
        return theta;
    }
    const Index n = f.back().size();
    Matrix D(n, mn);
    for (Index k = 0; k < mn; ++k) D.col(k) = f[k + 1] - f[k];
    const Vector g = ls_minnorm(D, f.back());
    theta[0] = g[0];
    for (Index k = 1; k < mn; ++k) theta[k] = g[k] - g[k - 1];
    theta[mn] = 1.0 - g[mn - 1];
    return theta;
}

// Next Anderson point Σθ_l Φ(x_l) where Φ(x_l) = x_l + f_l.
inline Vector anderson_combine(const std::vector<Vector>& residuals, const std::vector<Vector>& points,
                               int m_n) {
    if (residuals.size() != points.size() || static_cast<int>(points.size()) != m_n + 1)
        throw std::invalid_argument("anderson_combine: histories must hold m_n+1 entries");
    const Vector theta = anderson_weights(residuals);
    Vector out = Vector::Zero(points.back().size());
    for (int l = 0; l <= m_n; ++l) out += theta[l] * (points[l] + residuals[l]);
    return out;
}

namespace detail {

inline void check_blocks(const Blocks& blocks, Index dim) {
    std::vector<char> seen(static_cast<std::size_t>(dim), 0);
    Index count = 0;
    for (const auto& b : blocks)
        for (Index i : b) {
            if (i < 0 || i >= dim || seen[i]) throw std::invalid_argument("block partition invalid");
            seen[i] = 1;
            ++count;
        }
    if (count != dim) throw std::invalid_argument("block partition not exhaustive");
}

inline Vector gather(const Vector& v, const std::vector<Index>& idx) {
    Vector out(static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out[k] = v[idx[k]];
    return out;
}

class Runner {
public:
    Runner(const FixedPointMap& map, const AccelConfig& cfg) : map_(map), cfg_(cfg) {}

    bool budget_left() const { return out.evaluations < cfg_.max_evaluations; }

    Vector eval(const Vector& x) {
        ++out.evaluations;
        return map_.evaluate(x);
    }

    // Records the residual; returns true when the solve should stop.
    bool check(const Vector& x, const Vector& fx, const Vector& last_finite) {
        if (!all_finite(fx)) {
            finish_non_finite(last_finite);
            return true;
        }
        const double r = sup_norm(fx - x);
        if (cfg_.record_history) out.residual_history.push_back(r);
        out.final_residual = r;
        if (r < cfg_.tolerance) {
            out.converged = true;
            out.termination = Termination::converged;
            out.point = fx;
            return true;
        }
        return false;
    }

    void finish_non_finite(const Vector& last_finite) {
        out.converged = false;
        out.termination = Termination::non_finite;
        out.point = last_finite;
        if (cfg_.record_history) out.residual_history.push_back(std::numeric_limits<double>::quiet_NaN());
    }

    void finish_budget(const Vector& x) {
        out.converged = false;
        out.termination = Termination::max_evaluations;
        out.point = x;
    }

    SolveOutcome out;

private:
    const FixedPointMap& map_;
    const AccelConfig& cfg_;
};

inline bool blocked(const FixedPointMap& map, const AccelConfig& cfg) {
    return cfg.use_blocks && !map.blocks.empty();
}

inline std::optional<double> effective_cap(const FixedPointMap& map, const AccelConfig& cfg) {
    if (cfg.step_cap) return cfg.step_cap;
    if (blocked(map, cfg)) return 10.0;
    return std::nullopt;
}

// Step sizes (global or per block) from s, y; degenerate pieces fall back
// to initial_alpha.
inline std::vector<double> step_sizes(const FixedPointMap& map, const AccelConfig& cfg, const Vector& s,
                                      const Vector& y) {
    const auto cap = effective_cap(map, cfg);
    if (!blocked(map, cfg)) return {spectral_alpha(s, y, cfg.step_rule, cap).value_or(cfg.initial_alpha)};
    std::vector<double> a;
    a.reserve(map.blocks.size());
    for (const auto& b : map.blocks)
        a.push_back(spectral_alpha(gather(s, b), gather(y, b), cfg.step_rule, cap).value_or(cfg.initial_alpha));
    return a;
}

inline Vector apply_spectral(const FixedPointMap& map, const AccelConfig& cfg, const Vector& x, const Vector& F,
                             const std::vector<double>& a) {
    if (!blocked(map, cfg)) return spectral_update(x, F, a[0]);
    return spectral_update(x, F, a, map.blocks);
}

inline SolveOutcome run_plain(const FixedPointMap& map, Vector x, const AccelConfig& cfg) {
    Runner r(map, cfg);
    while (true) {
        if (!r.budget_left()) {
            r.finish_budget(x);
            return r.out;
        }
        Vector fx = r.eval(x);
        if (r.check(x, fx, x)) return r.out;
        x = std::move(fx);
    }
}

inline SolveOutcome run_anderson(const FixedPointMap& map, Vector x, const AccelConfig& cfg) {
    Runner r(map, cfg);
    const int m = cfg.anderson_memory;
    std::vector<Vector> xs, fs;
    while (true) {
        if (!r.budget_left()) {
            r.finish_budget(x);
            return r.out;
        }
        const Vector fx = r.eval(x);
        if (r.check(x, fx, x)) return r.out;
        xs.push_back(x);
        fs.push_back(fx - x);
        if (static_cast<int>(xs.size()) > m + 1) {
            xs.erase(xs.begin());
            fs.erase(fs.begin());
        }
        Vector next = anderson_combine(fs, xs, static_cast<int>(xs.size()) - 1);
        if (!all_finite(next)) {
            r.finish_non_finite(fx);
            return r.out;
        }
        x = std::move(next);
    }
}

inline SolveOutcome run_spectral(const FixedPointMap& map, Vector x, const AccelConfig& cfg) {
    Runner r(map, cfg);
    Vector x_prev, F_prev;
    bool have_prev = false;
    while (true) {
        if (!r.budget_left()) {
            r.finish_budget(x);
            return r.out;
        }
        const Vector fx = r.eval(x);
        if (r.check(x, fx, x)) return r.out;
        const Vector F = fx - x;
        std::vector<double> a;
        if (have_prev) {
            a = step_sizes(map, cfg, x - x_prev, F - F_prev);
        } else {
            a.assign(blocked(map, cfg) ? map.blocks.size() : 1, cfg.initial_alpha);
        }
        Vector next = apply_spectral(map, cfg, x, F, a);
        if (!all_finite(next)) {
            r.finish_non_finite(fx);
            return r.out;
        }
        x_prev = x;
        F_prev = F;
        have_prev = true;
        x = std::move(next);
    }
}

inline SolveOutcome run_squarem(const FixedPointMap& map, Vector x, const AccelConfig& cfg) {
    Runner r(map, cfg);
    while (true) {
        if (!r.budget_left()) {
            r.finish_budget(x);
            return r.out;
        }
        const Vector fx = r.eval(x);
        if (r.check(x, fx, x)) return r.out;
        if (!r.budget_left()) {
            r.finish_budget(fx);
            return r.out;
        }
        const Vector ffx = r.eval(fx);
        if (!all_finite(ffx)) {
            r.finish_non_finite(fx);
            return r.out;
        }
        const Vector s = fx - x;
        const Vector y = ffx - 2.0 * fx + x;
        Vector next;
        if (!blocked(map, cfg)) {
            const auto a = spectral_alpha(s, y, cfg.step_rule, effective_cap(map, cfg));
            next = a ? squarem_update(x, fx, ffx, *a) : ffx;
        } else {
            const auto cap = effective_cap(map, cfg);
            next = x;
            for (const auto& b : map.blocks) {
                const Vector sb = gather(s, b), yb = gather(y, b);
                const auto a = spectral_alpha(sb, yb, cfg.step_rule, cap);
                for (std::size_t k = 0; k < b.size(); ++k) {
                    const Index i = b[k];
                    next[i] = a ? x[i] + 2.0 * *a * s[i] + *a * *a * y[i] : ffx[i];
                }
            }
        }
        if (!all_finite(next)) {
            r.finish_non_finite(ffx);
            return r.out;
        }
        x = std::move(next);
    }
}

}  // namespace detail

inline SolveOutcome solve(const FixedPointMap& map, const Vector& x0, const AccelConfig& cfg) {
    if (!(cfg.tolerance > 0.0) || cfg.max_evaluations < 1 || cfg.anderson_memory < 1)
        throw std::invalid_argument("invalid AccelConfig");
    if (x0.size() != map.dimension) throw std::invalid_argument("x0 dimension mismatch");
    if (!all_finite(x0)) throw std::invalid_argument("x0 must be finite");
    if (!map.blocks.empty()) detail::check_blocks(map.blocks, map.dimension);
    switch (cfg.method) {
        case Method::plain: return detail::run_plain(map, x0, cfg);
        case Method::anderson: return detail::run_anderson(map, x0, cfg);
        case Method::spectral: return detail::run_spectral(map, x0, cfg);
        case Method::squarem: return detail::run_squarem(map, x0, cfg);
    }
    throw std::logic_error("unreachable");
}

}  // namespace blp::accel
