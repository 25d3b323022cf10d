#include "blpinner/datagen.hpp"
#include "blpinner/static_rcl.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

using namespace blp;

namespace {

accel::AccelConfig cfg(long cap = 1000) {
    accel::AccelConfig c;
    c.tolerance = 1e-13;
    c.max_evaluations = cap;
    return c;
}

StaticInstance two_type_market(std::uint64_t index) {
    StaticDgpParams p;
    p.J = 250;
    p.I = 2;
    return gen_static_market(p, 1, index);
}

}  // namespace

TEST(Kalouptsidi, TwoTypesAgreeWithDeltaMapping) {
    for (std::uint64_t idx = 0; idx < 3; ++idx) {
        const auto inst = two_type_market(idx);
        const auto ref = solve_inner(inst.market, Mapping::delta1, cfg());
        ASSERT_TRUE(ref.outcome.converged);
        for (Mapping mp : {Mapping::kalouptsidi_mixed, Mapping::kalouptsidi_tilde}) {
            const auto sol = solve_inner(inst.market, mp, cfg());
            ASSERT_TRUE(sol.outcome.converged) << to_string(mp);
            EXPECT_LT((sol.delta - ref.delta).cwiseAbs().maxCoeff(), 1e-8) << to_string(mp);
            EXPECT_LT(sol.dist, 1e-11) << to_string(mp);
        }
    }
}

TEST(Kalouptsidi, SingleTypeClosedForm) {
    StaticMarket m;
    m.shares = (Vector(3) << 0.2, 0.3, 0.1).finished();
    m.outside_share = 0.4;
    m.mu = (Matrix(1, 3) << 0.5, -1.0, 2.0).finished();
    m.weights = Vector::Ones(1);
    const Delta closed = (m.shares.array().log() - std::log(m.outside_share) - m.mu.row(0).transpose().array()).matrix();
    for (Mapping mp : {Mapping::kalouptsidi_mixed, Mapping::kalouptsidi_tilde}) {
        const auto sol = solve_inner(m, mp, cfg());
        EXPECT_TRUE(sol.outcome.converged);
        EXPECT_LT((sol.delta - closed).cwiseAbs().maxCoeff(), 1e-12);
    }
    EXPECT_THROW(kalouptsidi_Ftilde(Vector(0), m), std::invalid_argument);
}

TEST(Kalouptsidi, TrueRIsFixedPoint) {
    std::mt19937_64 gen(31);
    for (int rep = 0; rep < 20; ++rep) {
        const auto t = oracle::tiny_static(gen, 1 + rep % 4, 2 + rep % 3, 1.5);
        StaticMarket m{t.S, t.S0, t.mu, t.w};
        // r_i = log(w_i s_i0) = log w_i − V_i at the truth, built from the naive oracle
        const Index I = t.w.size(), J = t.S.size();
        Vector r(I);
        for (Index i = 0; i < I; ++i) {
            double den = 1.0;
            for (Index j = 0; j < J; ++j) den += std::exp(t.delta[j] + t.mu(i, j));
            r[i] = std::log(t.w[i]) - std::log(den);
        }
        EXPECT_LT((kalouptsidi_F(r, m) - r).cwiseAbs().maxCoeff(), 1e-12);
        const Vector rt = (r.head(I - 1).array() - r[I - 1]).matrix();
        EXPECT_LT((kalouptsidi_Ftilde(rt, m) - rt).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((kalouptsidi_r_from_tilde(rt, m) - r).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((kalouptsidi_delta(r, m) - t.delta).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Kalouptsidi, InfeasibleLastComponentIsNaN) {
    StaticMarket m;
    m.shares = (Vector(1) << 0.5).finished();
    m.outside_share = 0.5;
    m.mu = Matrix::Zero(2, 1);
    m.weights = Vector::Constant(2, 0.5);
    // a huge first r makes exp(F_1) exceed S_0
    const Vector out = kalouptsidi_F((Vector(2) << 5.0, -30.0).finished(), m);
    EXPECT_TRUE(std::isfinite(out[0]));
    EXPECT_TRUE(std::isnan(out[1]));
}

TEST(Kalouptsidi, TinyInstancesMatchNewton) {
    std::mt19937_64 gen(32);
    for (int rep = 0; rep < 10; ++rep) {
        const auto t = oracle::tiny_static(gen, 3, 3, 1.0);
        StaticMarket m{t.S, t.S0, t.mu, t.w};
        const Vector newton = oracle::static_root(t.S, t.mu, t.w, initial_delta(m));
        for (Mapping mp : {Mapping::kalouptsidi_mixed, Mapping::kalouptsidi_tilde}) {
            const auto sol = solve_inner(m, mp, cfg(5000));
            ASSERT_TRUE(sol.outcome.converged) << to_string(mp);
            EXPECT_LT((sol.delta - newton).cwiseAbs().maxCoeff(), 1e-10) << to_string(mp);
        }
    }
}
