#pragma once
//
// JSON and CSV encodings of the library's result types. Every top-level
// JSON document carries schema_version.
//

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

#include "leverage.hpp"
#include "precond.hpp"
#include "rankrevealing.hpp"
#include "sketch.hpp"

namespace lspack {

using json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

inline void to_json(json & j, const SketchSpec & s) {
    j = json{{"kind", to_string(s.kind)}, {"m", s.m},         {"r", s.r},
             {"seed", s.seed},            {"eps", s.eps},     {"delta", s.delta},
             {"gamma", s.gamma}};
}

inline void from_json(const json & j, SketchSpec & s) {
    try {
        s       = SketchSpec{};
        s.kind  = parse_sketch_kind(j.at("kind").get<std::string>());
        s.m     = j.value("m", index_t{0});
        s.r     = j.value("r", index_t{0});
        s.seed  = j.value("seed", default_seed);
        s.eps   = j.value("eps", default_eps);
        s.delta = j.value("delta", default_delta);
        s.gamma = j.value("gamma", default_gamma);
    } catch (const json::exception & e) {
        throw format_error(std::string("invalid sketch spec: ") + e.what());
    }
    s.validate();
}

inline json subset_json(const ColumnSubset & c) {
    json rows = json::array();
    for (index_t i = 0; i < c.R_k.rows(); ++i) {
        std::vector<double> r(c.R_k.row(i).data(), c.R_k.row(i).data() + c.R_k.cols());
        rows.push_back(r);
    }
    return json{{"k", c.k}, {"perm", c.perm}, {"R_k", rows}, {"diag_R", c.diag_R}};
}

inline json rank_json(const RankReport & r) {
    json j{{"k", r.k}, {"method", to_string(r.method)}, {"cutoff", r.cutoff}, {"values", r.values}};
    j["gap_index"] = r.gap_index ? json(*r.gap_index) : json(nullptr);
    return j;
}

inline json leverage_json(const LeverageScores & s) {
    json j{{"schema_version", schema_version}, {"method", to_string(s.method)}, {"k", s.k}, {"seed", s.params.seed},
           {"scores", s.scores}};
    return j;
}

inline json certificate_json(const Certificate & c) {
    json j{{"k", c.k}, {"m", c.m}, {"alpha", c.alpha}, {"eps", c.eps}};
    j["kappa_bound"] = c.kappa_bound ? json(*c.kappa_bound) : json(nullptr);
    if (c.kappa_measured)
        j["kappa_measured"] = std::isfinite(*c.kappa_measured) ? json(*c.kappa_measured) : json(nullptr);
    return j;
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// row_index,score
inline void write_leverage_csv(const LeverageScores & s, std::ostream & out) {
    out << "row_index,score\n";
    for (std::size_t i = 0; i < s.scores.size(); ++i)
        out << i << ',' << format_double(s.scores[i]) << '\n';
}

inline void write_dense_csv(const DenseMatrix & M, std::ostream & out) {
    for (index_t i = 0; i < M.rows(); ++i) {
        for (index_t j = 0; j < M.cols(); ++j) {
            if (j)
                out << ',';
            out << format_double(M(i, j));
        }
        out << '\n';
    }
}

inline json dense_json(const DenseMatrix & M) {
    json rows = json::array();
    for (index_t i = 0; i < M.rows(); ++i)
        rows.push_back(std::vector<double>(M.row(i).data(), M.row(i).data() + M.cols()));
    return rows;
}

} // namespace lspack
