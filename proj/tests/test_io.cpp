#include "blpinner/datagen.hpp"
#include "blpinner/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace blp;

namespace {

DynamicInstance small_dynamic() {
    DynamicDgpParams p;
    p.J = 3;
    p.I = 4;
    p.T = 5;
    return gen_dynamic_market(p, 1, 0);
}

}  // namespace

TEST(Io, StaticRoundTripIsExact) {
    StaticDgpParams p;
    p.J = 7;
    p.I = 11;
    const StaticMarket m = gen_static_market(p, 1, 0).market;
    const io::json j = io::to_json(m);
    EXPECT_EQ(j.at("kind"), "static");
    EXPECT_EQ(j.at("types"), 11);
    EXPECT_EQ(j.at("products"), 7);
    // row-major μ: the second entry is μ_{0,1}
    EXPECT_EQ(j.at("mu")[1].get<double>(), m.mu(0, 1));
    const StaticMarket back = io::static_from_json(io::json::parse(j.dump()));
    EXPECT_EQ(back.shares, m.shares);
    EXPECT_EQ(back.outside_share, m.outside_share);
    EXPECT_EQ(back.mu, m.mu);
    EXPECT_EQ(back.weights, m.weights);
}

TEST(Io, NestedRoundTripAndScalarRho) {
    StaticDgpParams p;
    p.I = 5;
    const NestedMarket m = gen_nested_market(p, 3, 2, 0.5, 1, 0).market;
    io::json j = io::to_json(m);
    EXPECT_EQ(j.at("kind"), "nested");
    const NestedMarket back = io::nested_from_json(io::json::parse(j.dump()));
    EXPECT_EQ(back.nest_of, m.nest_of);
    EXPECT_EQ(back.rho, m.rho);
    EXPECT_EQ(back.base.mu, m.base.mu);
    j["rho"] = 0.25;
    const NestedMarket scalar = io::nested_from_json(j);
    EXPECT_EQ(scalar.rho, Vector::Constant(3, 0.25));
}

TEST(Io, DynamicRoundTripIsExact) {
    const DurableMarket m = small_dynamic().market;
    const io::json j = io::to_json(m);
    EXPECT_EQ(j.at("kind"), "dynamic");
    EXPECT_EQ(j.at("share_convention"), "conditional_on_active");
    // t-major: the first J entries are period 0
    EXPECT_EQ(j.at("shares")[1].get<double>(), m.shares(1, 0));
    const DurableMarket back = io::dynamic_from_json(io::json::parse(j.dump()));
    EXPECT_EQ(back.T, m.T);
    EXPECT_EQ(back.beta, m.beta);
    EXPECT_EQ(back.shares, m.shares);
    EXPECT_EQ(back.outside_shares, m.outside_shares);
    ASSERT_EQ(back.mu.size(), m.mu.size());
    for (std::size_t t = 0; t < m.mu.size(); ++t) EXPECT_EQ(back.mu[t], m.mu[t]);
    EXPECT_EQ(back.weights, m.weights);
    EXPECT_EQ(back.pr0_init, m.pr0_init);
}

TEST(Io, DynamicDefaultsInitialOwnership) {
    io::json j = io::to_json(small_dynamic().market);
    j.erase("pr0_init");
    EXPECT_EQ(io::dynamic_from_json(j).pr0_init, Vector::Ones(4));
}

TEST(Io, FileRoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "blpinner_io_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "market.json").string();
    StaticDgpParams p;
    p.J = 3;
    p.I = 4;
    const StaticMarket m = gen_static_market(p, 2, 0).market;
    io::write_json(path, io::to_json(m));
    EXPECT_EQ(io::static_from_json(io::read_json(path)).mu, m.mu);
    std::filesystem::remove_all(dir);
    EXPECT_THROW(io::read_json((dir / "missing.json").string()), std::runtime_error);
}

TEST(Io, RejectsMalformedDocuments) {
    StaticDgpParams p;
    p.J = 3;
    p.I = 4;
    io::json j = io::to_json(gen_static_market(p, 2, 0).market);
    io::json wrong = j;
    wrong["kind"] = "dynamic";
    EXPECT_THROW(io::static_from_json(wrong), std::invalid_argument);
    io::json future = j;
    future["schema_version"] = io::schema_version + 1;
    EXPECT_THROW(io::static_from_json(future), std::invalid_argument);
    io::json short_mu = j;
    short_mu["mu"].erase(0);
    EXPECT_THROW(io::static_from_json(short_mu), std::invalid_argument);
    io::json bad_sum = j;
    bad_sum["outside_share"] = 0.5;
    EXPECT_THROW(io::static_from_json(bad_sum), std::invalid_argument);
    io::json missing = j;
    missing.erase("weights");
    EXPECT_THROW(io::static_from_json(missing), io::json::exception);

    io::json d = io::to_json(small_dynamic().market);
    d["mu"].erase(0);
    EXPECT_THROW(io::dynamic_from_json(d), std::invalid_argument);
}
