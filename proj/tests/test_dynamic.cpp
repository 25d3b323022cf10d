#include "blpinner/datagen.hpp"
#include "blpinner/dynamic_blp.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

using namespace blp;

namespace {

accel::AccelConfig cfg(accel::Method m = accel::Method::anderson, long cap = 20000, double tol = 1e-12) {
    accel::AccelConfig c;
    c.method = m;
    c.tolerance = tol;
    c.max_evaluations = cap;
    return c;
}

DynamicOptions opts(double gamma) {
    DynamicOptions o;
    o.gamma = gamma;
    return o;
}

DynamicInstance small_instance(std::uint64_t index, Index T = 8, double beta = 0.99) {
    DynamicDgpParams p;
    p.J = 4;
    p.I = 6;
    p.T = T;
    p.beta = beta;
    return gen_dynamic_market(p, 3, index);
}

// Market built from the naive durable-goods oracle at a known δ.
DurableMarket oracle_market(const Matrix& delta, const std::vector<Matrix>& mu, const Vector& w, double beta) {
    oracle::Durable d{beta, mu, w, Vector::Ones(w.size())};
    const auto path = oracle::durable_model(delta, d);
    DurableMarket m;
    m.T = delta.cols();
    m.beta = beta;
    m.shares = path.shares;
    m.outside_shares = path.outside;
    m.mu = mu;
    m.weights = w;
    m.pr0_init = Vector::Ones(w.size());
    // rounding in the oracle's normalization
    for (Index t = 0; t < m.T; ++t) m.outside_shares[t] = 1.0 - m.shares.col(t).sum();
    return m;
}

double maxabs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(ForwardPass, StaticNestingAtBetaZero) {
    std::mt19937_64 gen(51);
    const auto t = oracle::tiny_static(gen, 3, 4, 1.0);
    DurableMarket m;
    m.T = 1;
    m.beta = 0.0;
    m.shares = t.S;
    m.outside_shares = Vector::Constant(1, t.S0);
    m.mu = {t.mu};
    m.weights = t.w;
    m.pr0_init = Vector::Ones(4);
    const StaticMarket s{t.S, t.S0, t.mu, t.w};
    const Value V = (Vector(4) << 0.3, 1.0, -0.2, 2.0).finished();
    const auto fp = pf_forward_pass(V, m);
    EXPECT_LT(maxabs(fp.delta.col(0) - iota_V_to_delta(V, 0.0, s)), 1e-13);
    EXPECT_LT(maxabs(fp.pr0.col(0) - Vector::Ones(4)), 1e-15);
}

TEST(ForwardPass, TwoPeriodSingleTypeClosedForm) {
    // J = I = 1: stay probability equals S_0t, so V_2 = −log S_02 / (1−β),
    // V_1 = βV_2 − log S_01 and δ_t = log S_t − μ_t + V_t.
    const double beta = 0.9;
    DurableMarket m;
    m.T = 2;
    m.beta = beta;
    m.shares = (Matrix(1, 2) << 0.3, 0.4).finished();
    m.outside_shares = (Vector(2) << 0.7, 0.6).finished();
    m.mu = {Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, -0.25)};
    m.weights = Vector::Ones(1);
    m.pr0_init = Vector::Ones(1);
    const double V2 = -std::log(0.6) / (1.0 - beta);
    const double V1 = beta * V2 - std::log(0.7);
    const Vector closed = (Vector(2) << std::log(0.3) - 0.5 + V1, std::log(0.4) + 0.25 + V2).finished();

    const Matrix V = (Matrix(1, 2) << V1, V2).finished();
    const auto fp = pf_forward_pass(V, m);
    EXPECT_LT(maxabs(fp.delta.row(0).transpose() - closed), 1e-13);
    EXPECT_NEAR(fp.pr0(0, 1), 0.7, 1e-13);

    for (accel::Method me : {accel::Method::plain, accel::Method::anderson}) {
        for (double g : {0.0, 1.0}) {
            const auto pf = pf_solve(m, opts(g), cfg(me));
            ASSERT_TRUE(pf.outcome.converged);
            EXPECT_LT(maxabs(pf.solution.delta.row(0).transpose() - closed), 1e-10);
            EXPECT_NEAR(pf.solution.V(0, 0), V1, 1e-10);
            EXPECT_NEAR(pf.solution.V(0, 1), V2, 1e-10);
        }
    }
}

TEST(ForwardPass, TruthReproducesDeltaAndOwnership) {
    const auto inst = small_instance(0);
    const auto fp = pf_forward_pass(inst.truth.V, inst.market);
    EXPECT_LT(maxabs(fp.delta - inst.truth.delta), 1e-10);
    EXPECT_LT(maxabs(fp.pr0 - inst.truth.pr0), 1e-12);
}

TEST(ForwardPass, OwnershipAbsorbingForArbitraryValues) {
    const auto inst = small_instance(1);
    std::mt19937_64 gen(52);
    std::normal_distribution<double> nd(5.0, 3.0);
    for (int rep = 0; rep < 20; ++rep) {
        Matrix V(6, 8);
        for (Index i = 0; i < V.size(); ++i) V.data()[i] = nd(gen);
        const auto fp = pf_forward_pass(V, inst.market);
        EXPECT_TRUE((fp.pr0.array() >= 0.0).all());
        EXPECT_TRUE((fp.pr0.array() <= 1.0).all());
        for (Index t = 1; t < 8; ++t) EXPECT_TRUE((fp.pr0.col(t).array() <= fp.pr0.col(t - 1).array()).all());
    }
}

TEST(ValueUpdate, BellmanIdentityAtTruth) {
    const auto inst = small_instance(2);
    const Matrix out = pf_value_update(inst.truth.V, inst.truth.delta, 0.0, inst.market);
    EXPECT_LT(maxabs(out - inst.truth.V), 1e-12);
    // with γ = 1 the correction vanishes at the truth as well
    const Matrix out1 = pf_value_update(inst.truth.V, inst.truth.delta, 1.0, inst.market);
    EXPECT_LT(maxabs(out1 - inst.truth.V), 1e-10);
}

TEST(ValueUpdate, HomogeneousStaticOneShot) {
    DurableMarket m;
    m.T = 3;
    m.beta = 0.0;
    m.shares = (Matrix(2, 3) << 0.1, 0.2, 0.3, 0.3, 0.1, 0.2).finished();
    m.outside_shares = (Vector(3) << 0.6, 0.7, 0.5).finished();
    m.mu.assign(3, Matrix::Zero(3, 2));
    m.weights = Vector::Constant(3, 1.0 / 3);
    m.pr0_init = Vector::Ones(3);
    std::mt19937_64 gen(53);
    std::normal_distribution<double> nd(0.0, 2.0);
    for (int rep = 0; rep < 5; ++rep) {
        Matrix V(3, 3);
        for (Index i = 0; i < V.size(); ++i) V.data()[i] = nd(gen);
        const auto fp = pf_forward_pass(V, m);
        const Matrix next = value_update(V, pf_continuation(V, 0.0), fp.omega, fp.active, 1.0, m);
        for (Index t = 0; t < 3; ++t)
            for (Index i = 0; i < 3; ++i) EXPECT_NEAR(next(i, t), -std::log(m.outside_shares[t]), 1e-12);
    }
}

TEST(ValueUpdate, MonotoneInDelta) {
    const auto inst = small_instance(3);
    std::mt19937_64 gen(54);
    std::normal_distribution<double> nd;
    std::uniform_int_distribution<Index> pj(0, 3), pt(0, 7);
    for (int rep = 0; rep < 30; ++rep) {
        Matrix V = inst.truth.V, delta = inst.truth.delta;
        for (Index i = 0; i < V.size(); ++i) V.data()[i] += 0.5 * nd(gen);
        for (Index i = 0; i < delta.size(); ++i) delta.data()[i] += 0.5 * nd(gen);
        const Index j = pj(gen), t = pt(gen);
        for (double g : {0.0, 1.0}) {
            const Matrix base = pf_value_update(V, delta, g, inst.market);
            Matrix up = delta;
            up(j, t) += 1e-3;
            const Matrix bumped = pf_value_update(V, up, g, inst.market);
            EXPECT_TRUE((bumped.col(t).array() >= base.col(t).array() - 1e-14).all());
        }
    }
}

TEST(PfSolve, RecoversTruthForBothGammas) {
    const auto inst = small_instance(4);
    Matrix first;
    for (double g : {0.0, 1.0}) {
        const auto res = pf_solve(inst.market, opts(g), cfg());
        ASSERT_TRUE(res.outcome.converged);
        EXPECT_TRUE(res.dist_verified);
        EXPECT_LT(res.dist, 1e-12);
        EXPECT_LT(res.bellman_residual, 1e-10);
        EXPECT_LT(maxabs(res.solution.delta - inst.truth.delta), 1e-9);
        EXPECT_LT(maxabs(res.solution.V - inst.truth.V), 1e-9);
        if (first.size()) EXPECT_LT(maxabs(res.solution.delta - first), 1e-9);
        first = res.solution.delta;
        for (Index t = 1; t < inst.market.T; ++t)
            EXPECT_TRUE((res.solution.pr0.col(t).array() <= res.solution.pr0.col(t - 1).array()).all());
    }
}

TEST(PfSolve, CcpRowsSumToOneAndTerminalStationary) {
    const auto inst = small_instance(5);
    const auto res = pf_solve(inst.market, opts(1.0), cfg());
    ASSERT_TRUE(res.outcome.converged);
    const Index T = inst.market.T;
    const Matrix& V = res.solution.V;
    for (Index t = 0; t < T; ++t) {
        const Index tn = std::min(t + 1, T - 1);
        for (Index i = 0; i < 6; ++i) {
            const double s0 = std::exp(inst.market.beta * V(i, tn) - V(i, t));
            EXPECT_NEAR(res.solution.ccp[t].row(i).sum() + s0, 1.0, 1e-10);
        }
    }
    const Matrix omega = inclusive_values(res.solution.delta, inst.market);
    for (Index i = 0; i < 6; ++i)
        EXPECT_NEAR(V(i, T - 1), log_add_exp(inst.market.beta * V(i, T - 1), omega(i, T - 1)), 1e-10);
}

TEST(PfSolve, AllMethodsAndBlocksAgree) {
    const auto inst = small_instance(6);
    for (accel::Method me : {accel::Method::plain, accel::Method::anderson, accel::Method::spectral,
                             accel::Method::squarem}) {
        for (bool blocks : {false, true}) {
            if (blocks && (me == accel::Method::plain || me == accel::Method::anderson)) continue;
            accel::AccelConfig c = cfg(me);
            c.use_blocks = blocks;
            const auto res = pf_solve(inst.market, opts(1.0), c);
            ASSERT_TRUE(res.outcome.converged) << accel::to_string(me) << blocks;
            EXPECT_LT(maxabs(res.solution.delta - inst.truth.delta), 1e-9);
        }
    }
}

TEST(PfSolve, AndersonNeedsFewerEvaluationsThanPlain) {
    const auto inst = small_instance(7, 12);
    const auto plain = pf_solve(inst.market, opts(1.0), cfg(accel::Method::plain));
    const auto fast = pf_solve(inst.market, opts(1.0), cfg(accel::Method::anderson));
    ASSERT_TRUE(plain.outcome.converged);
    ASSERT_TRUE(fast.outcome.converged);
    EXPECT_LT(fast.outcome.evaluations * 2, plain.outcome.evaluations);
}

TEST(PfSolve, DistFlagIsSeparateFromConvergence) {
    const auto inst = small_instance(8);
    DynamicOptions o = opts(1.0);
    o.dist_tolerance = 1e-300;
    const auto res = pf_solve(inst.market, o, cfg());
    EXPECT_TRUE(res.outcome.converged);
    EXPECT_FALSE(res.dist_verified);
}

TEST(PfSolve, BetaZeroMatchesStaticPerPeriod) {
    std::mt19937_64 gen(55);
    const auto t = oracle::tiny_static(gen, 3, 4, 1.0);
    DurableMarket m;
    m.T = 1;
    m.beta = 0.0;
    m.shares = t.S;
    m.outside_shares = Vector::Constant(1, t.S0);
    m.mu = {t.mu};
    m.weights = t.w;
    m.pr0_init = Vector::Ones(4);
    const StaticMarket s{t.S, t.S0, t.mu, t.w};
    accel::AccelConfig c = cfg(accel::Method::plain, 5000, 1e-13);
    const auto stat = solve_inner(s, Mapping::delta1, c);
    for (double g : {0.0, 1.0}) {
        const auto res = pf_solve(m, opts(g), c);
        ASSERT_TRUE(res.outcome.converged);
        EXPECT_LT(maxabs(res.solution.delta.col(0) - stat.delta), 1e-10);
        const auto nested = traditional_nested_solve(m, opts(g), c, c);
        ASSERT_TRUE(nested.outcome.converged);
        EXPECT_LT(maxabs(nested.solution.delta.col(0) - stat.delta), 1e-10);
    }
}

TEST(Traditional, JointAndNestedMatchPf) {
    const auto inst = small_instance(9);
    const auto pf = pf_solve(inst.market, opts(1.0), cfg());
    ASSERT_TRUE(pf.outcome.converged);
    for (double g : {0.0, 1.0}) {
        const auto joint = traditional_joint_solve(inst.market, opts(g), cfg());
        ASSERT_TRUE(joint.outcome.converged);
        EXPECT_LT(maxabs(joint.solution.delta - pf.solution.delta), 1e-9);
        EXPECT_LT(joint.dist, 1e-12);
        EXPECT_EQ(joint.psi_evaluations, joint.outcome.evaluations);
        const auto nested = traditional_nested_solve(inst.market, opts(g), cfg(), cfg());
        ASSERT_TRUE(nested.outcome.converged);
        EXPECT_LT(maxabs(nested.solution.delta - pf.solution.delta), 1e-9);
        EXPECT_GT(nested.psi_evaluations, nested.delta_evaluations);
    }
}

TEST(Traditional, HotStartUsesFewerInnerEvaluations) {
    const auto inst = small_instance(10);
    // a tight inner tolerance keeps the outer map smooth enough for a cold start
    const auto inner = cfg(accel::Method::anderson, 20000, 1e-14);
    const auto outer = cfg(accel::Method::plain, 5000, 1e-11);
    const auto hot = traditional_nested_solve(inst.market, opts(1.0), inner, outer, true);
    const auto cold = traditional_nested_solve(inst.market, opts(1.0), inner, outer, false);
    ASSERT_TRUE(hot.outcome.converged);
    ASSERT_TRUE(cold.outcome.converged);
    EXPECT_LT(hot.psi_evaluations, cold.psi_evaluations);
    EXPECT_LT(maxabs(hot.solution.delta - cold.solution.delta), 1e-9);
}

TEST(BellmanResidual, ConvergedPerturbedAndBetaZero) {
    const auto inst = small_instance(11);
    const auto res = pf_solve(inst.market, opts(1.0), cfg());
    ASSERT_TRUE(res.outcome.converged);
    EXPECT_LT(bellman_residual(res.solution, inst.market), 1e-10);
    DurableSolution bad = res.solution;
    bad.V(2, 3) += 1e-3;
    EXPECT_GE(bellman_residual(bad, inst.market), 1e-4);

    DurableMarket m = inst.market;
    m.beta = 0.0;
    const Matrix omega = inclusive_values(res.solution.delta, m);
    double direct = 0.0;
    for (Index t = 0; t < m.T; ++t)
        for (Index i = 0; i < 6; ++i)
            direct = std::max(direct, std::abs(res.solution.V(i, t) - std::log1p(std::exp(omega(i, t)))));
    EXPECT_NEAR(bellman_residual(res.solution, m), direct, 1e-12);
}

TEST(Oracle, TinyDurableMarketMatchesNewton) {
    std::mt19937_64 gen(56);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 5; ++rep) {
        const Index J = 2, I = 2, T = 3;
        Matrix delta(J, T);
        for (Index k = 0; k < delta.size(); ++k) delta.data()[k] = nd(gen) - 1.0;
        std::vector<Matrix> mu(T, Matrix(I, J));
        for (auto& m : mu)
            for (Index k = 0; k < m.size(); ++k) m.data()[k] = nd(gen);
        const Vector w = (Vector(2) << 0.4, 0.6).finished();
        const DurableMarket m = oracle_market(delta, mu, w, 0.9);
        const Matrix root = oracle::durable_root(m.shares, {0.9, mu, w, Vector::Ones(I)}, Matrix::Zero(J, T));
        ASSERT_LT(maxabs(root - delta), 1e-9);
        const auto pf = pf_solve(m, opts(1.0), cfg());
        ASSERT_TRUE(pf.outcome.converged);
        EXPECT_LT(maxabs(pf.solution.delta - root), 1e-10);
    }
}

TEST(Ivs, NoiselessAr1ExpectationIsDeterministicNextState) {
    const IvsGrid g;
    const Vector nodes = chebyshev_nodes(g.points, g.lo, g.hi);
    const Quadrature q = gauss_hermite(g.quadrature_order);
    // ω follows ω' = 0.2 + 0.9ω exactly; V on the grid is a cubic the interpolant reproduces
    Matrix omega(2, 12);
    omega(0, 0) = -8.0;
    omega(1, 0) = 4.0;
    for (Index t = 1; t < 12; ++t) omega.col(t) = (0.2 + 0.9 * omega.col(t - 1).array()).matrix();
    auto f = [](double x) { return 0.01 * x * x * x - 0.1 * x * x + x + 3.0; };
    Matrix Vg(2, g.points);
    for (int h = 0; h < g.points; ++h) Vg(0, h) = Vg(1, h) = f(nodes[h]);
    const auto e = detail::ivs_expectation(omega, Vg, nodes, q, g);
    for (Index i = 0; i < 2; ++i) {
        EXPECT_NEAR(e.ar1[i].slope, 0.9, 1e-10);
        EXPECT_NEAR(e.ar1[i].sigma, 0.0, 1e-10);
        for (Index t = 0; t < 12; ++t) EXPECT_NEAR(e.data(i, t), f(0.2 + 0.9 * omega(i, t)), 1e-9);
    }
}

TEST(Ivs, BetaZeroMatchesPerfectForesight) {
    const auto inst = small_instance(12, 6, 0.0);
    const auto pf = pf_solve(inst.market, opts(1.0), cfg());
    ASSERT_TRUE(pf.outcome.converged);
    const auto ivs = ivs_solve(inst.market, opts(1.0), IvsGrid{}, cfg());
    ASSERT_TRUE(ivs.outcome.converged);
    EXPECT_LT(maxabs(ivs.solution.delta - pf.solution.delta), 1e-9);
    EXPECT_LT(ivs.dist, 1e-12);
}

TEST(Ivs, ProposedAndJointAgree) {
    const auto inst = small_instance(13, 10);
    const auto a = ivs_solve(inst.market, opts(1.0), IvsGrid{}, cfg());
    const auto b = ivs_solve(inst.market, opts(0.0), IvsGrid{}, cfg());
    const auto c = ivs_joint_solve(inst.market, opts(1.0), IvsGrid{}, cfg());
    ASSERT_TRUE(a.outcome.converged);
    ASSERT_TRUE(b.outcome.converged);
    ASSERT_TRUE(c.outcome.converged);
    EXPECT_LT(a.dist, 1e-12);
    EXPECT_LT(maxabs(a.solution.delta - b.solution.delta), 1e-9);
    EXPECT_LT(maxabs(a.solution.delta - c.solution.delta), 1e-9);
    EXPECT_EQ(a.grid.size(), 10);
    EXPECT_EQ(a.ar1.size(), 6u);
}

TEST(DurableMarket, Validation) {
    auto inst = small_instance(14);
    DurableMarket m = inst.market;
    m.beta = 1.0;
    EXPECT_THROW(pf_solve(m, opts(1.0), cfg()), std::invalid_argument);
    m = inst.market;
    m.outside_shares[0] += 0.01;
    EXPECT_THROW(pf_solve(m, opts(1.0), cfg()), std::invalid_argument);
    m = inst.market;
    m.mu.pop_back();
    EXPECT_THROW(pf_solve(m, opts(1.0), cfg()), std::invalid_argument);
    m = inst.market;
    m.T = 2;
    EXPECT_THROW(ivs_solve(m, opts(1.0), IvsGrid{}, cfg()), std::invalid_argument);
}

TEST(Ownership, ExitRuleBoundedAndConsistent) {
    const auto inst = small_instance(4);
    const DurableMarket& m = inst.market;
    // arbitrary iterate: CCPs at V = 0 can sum past one
    const Matrix big = (inst.truth.delta.array() + 3.0).matrix();
    const Matrix pr = propagate_pr0(big, Matrix::Zero(m.types(), m.T), m);
    EXPECT_TRUE(pr.allFinite());
    EXPECT_TRUE((pr.array() > 0.0).all());
    EXPECT_TRUE((pr.array() <= 1.0).all());
    // at the truth it matches the CCP rule
    const Matrix C = pf_continuation(inst.truth.V, m.beta);
    const Matrix at = propagate_pr0(inst.truth.delta, C, m);
    EXPECT_LT(maxabs(at - inst.truth.pr0), 1e-12);
    for (Index t = 0; t + 1 < m.T; ++t) {
        const Vector stay = (1.0 - inst.truth.ccp[t].rowwise().sum().array()).matrix();
        EXPECT_LT(maxabs(at.col(t + 1) - at.col(t).cwiseProduct(stay)), 1e-12);
    }
}
