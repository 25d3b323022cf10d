#pragma once
// JSON fixtures for static, nested and durable markets.
//
// Matrices are stored as flat row-major arrays next to their dimensions.
// Durable shares are conditional on consumers still in the market.

#include "blpinner/dynamic_blp.hpp"
#include "blpinner/rcnl.hpp"
#include "blpinner/static_rcl.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>

namespace blp::io {

using json = nlohmann::json;

inline constexpr int schema_version = 1;

namespace detail {

inline json vec(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Vector to_vec(const json& j) {
    const auto raw = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(raw.data(), static_cast<Index>(raw.size()));
}

inline json row_major(const Matrix& m) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(m.size()));
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
    return out;
}

inline Matrix from_row_major(const json& j, Index rows, Index cols) {
    const auto raw = j.get<std::vector<double>>();
    if (static_cast<Index>(raw.size()) != rows * cols) throw std::invalid_argument("io: matrix size mismatch");
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) m(r, c) = raw[static_cast<std::size_t>(r * cols + c)];
    return m;
}

inline void check_kind(const json& j, const char* kind) {
    if (j.contains("kind") && j.at("kind").get<std::string>() != kind)
        throw std::invalid_argument(std::string("io: expected a ") + kind + " market");
    if (j.contains("schema_version") && j.at("schema_version").get<int>() > schema_version)
        throw std::invalid_argument("io: unsupported schema_version");
}

}  // namespace detail

inline json to_json(const StaticMarket& m) {
    return json{{"schema_version", schema_version},
                {"kind", "static"},
                {"types", m.types()},
                {"products", m.products()},
                {"shares", detail::vec(m.shares)},
                {"outside_share", m.outside_share},
                {"mu", detail::row_major(m.mu)},
                {"weights", detail::vec(m.weights)}};
}

inline StaticMarket static_from_json(const json& j) {
    detail::check_kind(j, "static");
    StaticMarket m;
    m.shares = detail::to_vec(j.at("shares"));
    m.outside_share = j.at("outside_share").get<double>();
    m.weights = detail::to_vec(j.at("weights"));
    m.mu = detail::from_row_major(j.at("mu"), m.weights.size(), m.shares.size());
    m.validate();
    return m;
}

inline json to_json(const NestedMarket& m) {
    json j = to_json(m.base);
    j["kind"] = "nested";
    j["nest_of"] = m.nest_of;
    j["rho"] = detail::vec(m.rho);
    return j;
}

// rho may be a scalar (shared by every nest) or one value per nest.
inline NestedMarket nested_from_json(const json& j) {
    detail::check_kind(j, "nested");
    json base = j;
    base.erase("kind");
    NestedMarket m;
    m.base = static_from_json(base);
    m.nest_of = j.at("nest_of").get<std::vector<int>>();
    const json& rho = j.at("rho");
    if (rho.is_number()) {
        int G = 0;
        for (int g : m.nest_of) G = std::max(G, g + 1);
        m.rho = Vector::Constant(G, rho.get<double>());
    } else {
        m.rho = detail::to_vec(rho);
    }
    m.validate();
    return m;
}

inline json to_json(const DurableMarket& m) {
    json mu = json::array();
    for (const auto& mt : m.mu) mu.push_back(detail::row_major(mt));
    return json{{"schema_version", schema_version},
                {"kind", "dynamic"},
                {"share_convention", "conditional_on_active"},
                {"T", m.T},
                {"beta", m.beta},
                {"types", m.types()},
                {"products", m.products()},
                // shares[t] lists every product in period t
                {"shares", detail::row_major(m.shares.transpose())},
                {"outside_shares", detail::vec(m.outside_shares)},
                {"mu", mu},
                {"weights", detail::vec(m.weights)},
                {"pr0_init", detail::vec(m.pr0_init)}};
}

inline DurableMarket dynamic_from_json(const json& j) {
    detail::check_kind(j, "dynamic");
    DurableMarket m;
    m.T = j.at("T").get<Index>();
    m.beta = j.at("beta").get<double>();
    m.weights = detail::to_vec(j.at("weights"));
    m.outside_shares = detail::to_vec(j.at("outside_shares"));
    const Index I = m.weights.size();
    const Index flat = static_cast<Index>(j.at("shares").size());
    if (m.T < 1 || flat % m.T != 0) throw std::invalid_argument("io: dynamic shares size mismatch");
    const Index J = flat / m.T;
    m.shares = detail::from_row_major(j.at("shares"), m.T, J).transpose();
    const json& mu = j.at("mu");
    if (static_cast<Index>(mu.size()) != m.T) throw std::invalid_argument("io: mu needs one entry per period");
    for (const auto& mt : mu) m.mu.push_back(detail::from_row_major(mt, I, J));
    m.pr0_init = j.contains("pr0_init") ? detail::to_vec(j.at("pr0_init")) : Vector::Ones(I);
    m.validate();
    return m;
}

inline json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("io: cannot open " + path);
    return json::parse(in);
}

inline void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("io: cannot write " + path);
    out << j.dump(1) << '\n';
}

}  // namespace blp::io
