// config.hpp — Experiment configuration: a JSON key-value tree with embedded
// defaults. The effective configuration is echoed into every report, and two
// runs from the same file produce byte-identical output.

#pragma once

#include "mbl/errors.hpp"
#include "mbl/json_io.hpp"
#include "mbl/model.hpp"
#include "mbl/propagation.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace mbl {

enum class ExperimentKind {
    lemma1,
    corollary_flocal,
    corollary_strict,
    theorem1,
    equilibration,
    signalling,
    spectral_tn,
};

inline const char* experiment_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::lemma1: return "lemma1";
        case ExperimentKind::corollary_flocal: return "corollary_flocal";
        case ExperimentKind::corollary_strict: return "corollary_strict";
        case ExperimentKind::theorem1: return "theorem1";
        case ExperimentKind::equilibration: return "equilibration";
        case ExperimentKind::signalling: return "signalling";
        case ExperimentKind::spectral_tn: return "spectral_tn";
    }
    return "unknown";
}

inline ExperimentKind experiment_from_name(const std::string& name) {
    for (ExperimentKind k :
         {ExperimentKind::lemma1, ExperimentKind::corollary_flocal,
          ExperimentKind::corollary_strict, ExperimentKind::theorem1,
          ExperimentKind::equilibration, ExperimentKind::signalling,
          ExperimentKind::spectral_tn})
        if (name == experiment_name(k)) return k;
    throw InvalidInput("unknown experiment kind '" + name + "'");
}

struct ExperimentConfig {
    int schema_version = 1;
    ExperimentKind experiment = ExperimentKind::lemma1;

    // lattice
    int num_sites = 10;
    int local_dim = 2;
    double budget_log2_dim = 14.0;

    DisorderSpec disorder;

    // dressing (layers = 0 means the identity dressing)
    int dressing_layers = 0;
    double dressing_angle_decay = 1.5;
    double dressing_theta0 = 0.5;
    std::uint64_t dressing_seed = 7;

    // regions
    int site = -1;                   // X = {site}; default mid-chain
    int l = -1;                      // -1: automatic where applicable
    std::vector<int> s_sites;        // region S; empty: experiment default
    std::vector<int> x_sites;        // strict constants: support X

    // sampling
    SamplingParams sampling;

    // experiment-specific knobs
    double theorem1_auto_l_target = 0.05;
    int signalling_candidates = 64;
    std::uint64_t signalling_candidate_seed = 4242;
    double signalling_slack = 0.05;
    std::vector<int> tn_selection;   // cluster index per site; empty: derived
    double tn_svd_tol = 1e-12;

    // output
    std::string output_directory = ".";
    std::string report_name = "report.json";
    std::string samples_csv;         // empty: skip
    int threads = 0;

    LatticeSpec lattice() const { return LatticeSpec(num_sites, local_dim, budget_log2_dim); }

    int resolved_site() const { return site >= 0 ? site : num_sites / 2; }

    Region region_s() const {
        if (!s_sites.empty()) return Region(lattice(), s_sites);
        // default: a two-site window at the chain centre
        return Region::window(lattice(), resolved_site(), 2);
    }

    SamplingParams resolved_sampling() const {
        SamplingParams p = sampling;
        p.threads = threads;
        return p;
    }
};

// ------------------------------- json binding --------------------------------

inline json to_json(const ExperimentConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    j["experiment"] = experiment_name(c.experiment);
    j["lattice"] = json{{"num_sites", c.num_sites},
                        {"local_dim", c.local_dim},
                        {"budget_log2_dim", c.budget_log2_dim}};
    j["disorder"] = json{{"seed", c.disorder.seed},
                         {"field_width", c.disorder.field_width},
                         {"coupling_scale", c.disorder.coupling_scale},
                         {"decay_length", c.disorder.decay_length},
                         {"interaction_order", c.disorder.interaction_order}};
    j["dressing"] = json{{"layers", c.dressing_layers},
                         {"angle_decay", c.dressing_angle_decay},
                         {"theta0", c.dressing_theta0},
                         {"seed", c.dressing_seed}};
    j["regions"] = json{{"site", c.site},
                        {"l", c.l},
                        {"s_sites", c.s_sites},
                        {"x_sites", c.x_sites}};
    j["sampling"] = json{{"num_samples", c.sampling.num_samples},
                         {"t_max_multiplier", c.sampling.t_max_multiplier},
                         {"sampler", sampler_name(c.sampling.sampler)},
                         {"time_seed", c.sampling.time_seed}};
    if (c.sampling.t_max_override) j["sampling"]["t_max_override"] = *c.sampling.t_max_override;
    j["theorem1"] = json{{"auto_l_target", c.theorem1_auto_l_target}};
    j["signalling"] = json{{"num_candidates", c.signalling_candidates},
                           {"candidate_seed", c.signalling_candidate_seed},
                           {"slack", c.signalling_slack}};
    j["spectral_tn"] = json{{"selection", c.tn_selection}, {"svd_tol", c.tn_svd_tol}};
    j["output"] = json{{"directory", c.output_directory},
                       {"report", c.report_name},
                       {"samples_csv", c.samples_csv}};
    j["threads"] = c.threads;
    return j;
}

inline ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    try {
        if (j.contains("schema_version")) c.schema_version = j.at("schema_version").get<int>();
        if (c.schema_version != 1)
            throw InvalidInput("unsupported schema_version " +
                               std::to_string(c.schema_version));
        c.experiment = experiment_from_name(j.at("experiment").get<std::string>());
        if (j.contains("lattice")) {
            const auto& l = j.at("lattice");
            if (l.contains("num_sites")) c.num_sites = l.at("num_sites").get<int>();
            if (l.contains("local_dim")) c.local_dim = l.at("local_dim").get<int>();
            if (l.contains("budget_log2_dim"))
                c.budget_log2_dim = l.at("budget_log2_dim").get<double>();
        }
        if (j.contains("disorder")) {
            const auto& d = j.at("disorder");
            if (d.contains("seed")) c.disorder.seed = d.at("seed").get<std::uint64_t>();
            if (d.contains("field_width"))
                c.disorder.field_width = d.at("field_width").get<double>();
            if (d.contains("coupling_scale"))
                c.disorder.coupling_scale = d.at("coupling_scale").get<double>();
            if (d.contains("decay_length"))
                c.disorder.decay_length = d.at("decay_length").get<double>();
            if (d.contains("interaction_order"))
                c.disorder.interaction_order = d.at("interaction_order").get<int>();
        }
        if (j.contains("dressing")) {
            const auto& d = j.at("dressing");
            if (d.contains("layers")) c.dressing_layers = d.at("layers").get<int>();
            if (d.contains("angle_decay"))
                c.dressing_angle_decay = d.at("angle_decay").get<double>();
            if (d.contains("theta0")) c.dressing_theta0 = d.at("theta0").get<double>();
            if (d.contains("seed")) c.dressing_seed = d.at("seed").get<std::uint64_t>();
        }
        if (j.contains("regions")) {
            const auto& r = j.at("regions");
            if (r.contains("site")) c.site = r.at("site").get<int>();
            if (r.contains("l")) c.l = r.at("l").get<int>();
            if (r.contains("s_sites")) c.s_sites = r.at("s_sites").get<std::vector<int>>();
            if (r.contains("x_sites")) c.x_sites = r.at("x_sites").get<std::vector<int>>();
        }
        if (j.contains("sampling")) {
            const auto& s = j.at("sampling");
            if (s.contains("num_samples"))
                c.sampling.num_samples = s.at("num_samples").get<int>();
            if (s.contains("t_max_multiplier"))
                c.sampling.t_max_multiplier = s.at("t_max_multiplier").get<double>();
            if (s.contains("t_max_override"))
                c.sampling.t_max_override = s.at("t_max_override").get<double>();
            if (s.contains("sampler")) {
                const std::string name = s.at("sampler").get<std::string>();
                if (name == "uniform")
                    c.sampling.sampler = SamplerKind::uniform;
                else if (name == "golden")
                    c.sampling.sampler = SamplerKind::golden;
                else
                    throw InvalidInput("unknown sampler '" + name + "'");
            }
            if (s.contains("time_seed"))
                c.sampling.time_seed = s.at("time_seed").get<std::uint64_t>();
        }
        if (j.contains("theorem1")) {
            const auto& t = j.at("theorem1");
            if (t.contains("auto_l_target"))
                c.theorem1_auto_l_target = t.at("auto_l_target").get<double>();
        }
        if (j.contains("signalling")) {
            const auto& s = j.at("signalling");
            if (s.contains("num_candidates"))
                c.signalling_candidates = s.at("num_candidates").get<int>();
            if (s.contains("candidate_seed"))
                c.signalling_candidate_seed = s.at("candidate_seed").get<std::uint64_t>();
            if (s.contains("slack")) c.signalling_slack = s.at("slack").get<double>();
        }
        if (j.contains("spectral_tn")) {
            const auto& t = j.at("spectral_tn");
            if (t.contains("selection"))
                c.tn_selection = t.at("selection").get<std::vector<int>>();
            if (t.contains("svd_tol")) c.tn_svd_tol = t.at("svd_tol").get<double>();
        }
        if (j.contains("output")) {
            const auto& o = j.at("output");
            if (o.contains("directory"))
                c.output_directory = o.at("directory").get<std::string>();
            if (o.contains("report")) c.report_name = o.at("report").get<std::string>();
            if (o.contains("samples_csv"))
                c.samples_csv = o.at("samples_csv").get<std::string>();
        }
        if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("config parse error: ") + e.what());
    }
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("config parse error in '") + path + "': " + e.what());
    }
    ExperimentConfig c = config_from_json(j);

    // validation beyond type checks
    const LatticeSpec lat = c.lattice();  // enforces the memory budget
    for (int s : c.s_sites)
        if (s < 0 || s >= lat.num_sites)
            throw InvalidInput("config: S site outside lattice");
    for (int s : c.x_sites)
        if (s < 0 || s >= lat.num_sites)
            throw InvalidInput("config: X site outside lattice");
    if (c.site >= lat.num_sites) throw InvalidInput("config: site outside lattice");
    if (c.sampling.num_samples <= 0) throw InvalidInput("config: num_samples must be > 0");
    return c;
}

}  // namespace mbl
