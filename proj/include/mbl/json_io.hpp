// json_io.hpp — JSON serialization of reports, operators and summaries,
// plus the CSV emitters. The JSON schema is documented in docs/SCHEMA.md.

#pragma once

#include "mbl/constants.hpp"
#include "mbl/mpo.hpp"
#include "mbl/operators.hpp"
#include "mbl/propagation.hpp"
#include "mbl/signalling.hpp"
#include "mbl/spectrum.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace mbl {

using nlohmann::json;

// ------------------------------- basic values --------------------------------

inline json to_json(const TimeAverageEstimate& est) {
    return json{{"mean", est.mean},
                {"std_error", est.std_error},
                {"t_max", est.t_max},
                {"num_samples", est.num_samples},
                {"sampler", sampler_name(est.sampling)}};
}

inline json to_json(const InequalityCheck& c) {
    return json{{"name", c.name},
                {"lhs", c.lhs},
                {"rhs", c.rhs},
                {"relation", c.relation},
                {"pass", c.pass}};
}

inline json to_json(const GenericityReport& rep) {
    return json{{"dim", rep.dim},
                {"min_pair_distance", rep.min_pair_distance},
                {"min_gap_pair_distance", rep.min_gap_pair_distance},
                {"tol", rep.tol},
                {"generic", rep.generic}};
}

inline json to_json(const PropagationReport& rep) {
    json checks = json::array();
    for (const auto& c : rep.checks) checks.push_back(to_json(c));
    return json{{"kind", rep.kind},
                {"num_sites", rep.num_sites},
                {"local_dim", rep.local_dim},
                {"site", rep.site_j},
                {"l", rep.l},
                {"s_sites", rep.s_sites},
                {"metric", to_json(rep.metric)},
                {"bound", rep.paper_bound},
                {"margin", rep.margin},
                {"verdict", rep.verdict},
                {"terms",
                 json{{"g_l", rep.g_l},
                      {"gamma", rep.gamma},
                      {"f_l", rep.f_l},
                      {"d_eff", rep.d_eff},
                      {"d_s", rep.d_s},
                      {"d_min_tilde", rep.d_min_tilde},
                      {"observable_norm", rep.observable_norm}}},
                {"checks", checks}};
}

inline json to_json(const EquilibrationResult& res) {
    return json{{"forward", to_json(res.forward)},
                {"backward", to_json(res.backward)},
                {"rhs", res.rhs},
                {"d_eff", res.d_eff},
                {"pass_forward", res.pass_forward},
                {"pass_backward", res.pass_backward}};
}

inline json to_json(const WitnessSearchResult& res) {
    return json{{"candidate_signals", res.candidate_signals},
                {"best_index", res.best_index},
                {"best_signal", res.best_signal},
                {"mean_signal", res.mean_signal},
                {"max_commutator_residual", res.max_commutator_residual}};
}

// Summary of a constant of motion: eigenvalues, gap, dims and the g(l) table.
inline json to_json_summary(const ConstantOfMotion& z) {
    json table = json::array();
    for (const auto& [l, e] : z.locality.samples)
        table.push_back(json{{"l", l}, {"err", e}});
    json j{{"eigenvalues", z.eigenvalues},
           {"gamma", z.gap},
           {"eigenspace_dims", z.eigenspace_dims},
           {"base_region", z.base_region.sites},
           {"commutator_norm", z.commutator_norm},
           {"strictly_local", z.strictly_local},
           {"locality", table}};
    if (z.locality.fitted_decay)
        j["fitted_decay"] = json{{"c1", z.locality.fitted_decay->first},
                                 {"c2", z.locality.fitted_decay->second}};
    return j;
}

// ----------------------------- dense operators --------------------------------

// Flat row-major [re, im, re, im, ...] pairs; the fixture format.
inline json to_json(const DenseOperator& a) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(2 * a.dim() * a.dim()));
    for (Eigen::Index r = 0; r < a.dim(); ++r)
        for (Eigen::Index c = 0; c < a.dim(); ++c) {
            data.push_back(a.mat(r, c).real());
            data.push_back(a.mat(r, c).imag());
        }
    return json{{"num_sites", a.lattice.num_sites},
                {"local_dim", a.lattice.local_dim},
                {"data", data}};
}

inline DenseOperator dense_operator_from_json(const json& j) {
    const LatticeSpec lat(j.at("num_sites").get<int>(), j.at("local_dim").get<int>());
    const auto& data = j.at("data");
    const Eigen::Index dim = lat.dim();
    if (static_cast<Eigen::Index>(data.size()) != 2 * dim * dim)
        throw InvalidShape("dense_operator_from_json: data length mismatch");
    Matrix m(dim, dim);
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < dim; ++r)
        for (Eigen::Index c = 0; c < dim; ++c) {
            const double re = data[i++].get<double>();
            const double im = data[i++].get<double>();
            m(r, c) = Complex(re, im);
        }
    return DenseOperator(lat, std::move(m));
}

// MPO manifest: bond dimensions plus per-site tensor blobs.
inline json to_json(const MPO& mpo) {
    json sites = json::array();
    const int d = mpo.lattice.local_dim;
    for (const auto& site : mpo.sites) {
        json blocks = json::array();
        for (const auto& block : site) {
            std::vector<double> data;
            data.reserve(static_cast<std::size_t>(2 * block.rows() * block.cols()));
            for (Eigen::Index r = 0; r < block.rows(); ++r)
                for (Eigen::Index c = 0; c < block.cols(); ++c) {
                    data.push_back(block(r, c).real());
                    data.push_back(block(r, c).imag());
                }
            blocks.push_back(json{{"rows", block.rows()}, {"cols", block.cols()},
                                  {"data", data}});
        }
        sites.push_back(json{{"local_dim", d}, {"blocks", blocks}});
    }
    return json{{"bond_dims", mpo.bond_dims},
                {"svd_tol", mpo.svd_tol},
                {"truncation_error_bound", mpo.truncation_error_bound},
                {"sites", sites}};
}

// ---------------------------------- files ------------------------------------

inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path().empty() ? "."
                                                                   : path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InvalidInput("cannot write " + tmp.string());
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
    write_text_atomic(path, j.dump(2) + "\n");
}

inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// Per-sample dump: columns t, metric.
inline void write_samples_csv(const std::filesystem::path& path,
                              const std::vector<std::pair<double, double>>& samples) {
    std::string text = "t,metric\n";
    for (const auto& [t, value] : samples)
        text += format_double(t) + "," + format_double(value) + "\n";
    write_text_atomic(path, text);
}

struct CurveRow {
    double axis_value = 0.0;
    double mean = 0.0;
    double std_error = 0.0;
    double bound = 0.0;
    double margin = 0.0;  // signed distance in the passing direction
};

inline void write_curve_csv(const std::filesystem::path& path,
                            const std::string& axis_name,
                            const std::vector<CurveRow>& rows) {
    std::string text = axis_name + ",mean,std_error,bound,margin\n";
    for (const auto& row : rows)
        text += format_double(row.axis_value) + "," + format_double(row.mean) + "," +
                format_double(row.std_error) + "," + format_double(row.bound) + "," +
                format_double(row.margin) + "\n";
    write_text_atomic(path, text);
}

}  // namespace mbl
