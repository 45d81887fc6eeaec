// runner.hpp — Experiment drivers: run one configuration to a report JSON,
// or sweep an axis into a combined curve CSV.
//
// Exit-code contract: 0 all verdicts pass, 2 a verified bound failed (the
// scientific alarm), 1 configuration or runtime error.

#pragma once

#include "mbl/config.hpp"
#include "mbl/constants.hpp"
#include "mbl/json_io.hpp"
#include "mbl/model.hpp"
#include "mbl/mpo.hpp"
#include "mbl/propagation.hpp"
#include "mbl/signalling.hpp"

#include <json.hpp>

#include <unsupported/Eigen/KroneckerProduct>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace mbl {

inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitBoundViolation = 2;

struct RunResult {
    json report;
    bool pass = false;
    // headline numbers for sweep curves
    double mean = 0.0;
    double std_error = 0.0;
    double bound = 0.0;
    double margin = 0.0;  // signed distance in the passing direction
};

namespace detail {

inline DressingUnitary config_dressing(const ExperimentConfig& c) {
    return build_dressing_unitary(c.lattice(), c.dressing_layers, c.dressing_angle_decay,
                                  c.dressing_seed, c.dressing_theta0);
}

inline void attach_propagation(RunResult& out, const PropagationReport& rep) {
    out.report["result"] = to_json(rep);
    out.pass = rep.verdict && rep.all_checks_pass();
    out.mean = rep.metric.mean;
    out.std_error = rep.metric.std_error;
    out.bound = rep.paper_bound;
    out.margin = rep.margin;
}

// Strictly local sigma^z string on the configured X sites.
inline ConstantOfMotion strict_constant_from_config(const ExperimentConfig& c,
                                                    const DiagonalMBLHamiltonian& h) {
    std::vector<int> x = c.x_sites;
    if (x.empty()) x = {c.resolved_site()};
    const Region region(c.lattice(), x);
    Matrix local = Matrix::Identity(1, 1);
    for (std::size_t i = 0; i < x.size(); ++i)
        local = Eigen::kroneckerProduct(local, pauli_z()).eval();
    const DenseOperator hd = h.as_dense_operator();
    return make_strictly_local_constant(local, region, &hd);
}

}  // namespace detail

// Execute one experiment; fills a schema-versioned report.
inline RunResult run_experiment(const ExperimentConfig& c) {
    RunResult out;
    out.report["schema_version"] = 1;
    out.report["kind"] = experiment_name(c.experiment);
    out.report["config"] = to_json(c);

    const LatticeSpec lat = c.lattice();
    const bool keep_samples = !c.samples_csv.empty();
    const SamplingParams params = c.resolved_sampling();
    auto h = build_diagonal_mbl(c.disorder, lat);

    switch (c.experiment) {
        case ExperimentKind::lemma1: {
            const auto rep = run_lemma1(h, c.resolved_site(), c.region_s(), params,
                                        keep_samples);
            detail::attach_propagation(out, rep);
            if (keep_samples)
                write_samples_csv(std::filesystem::path(c.output_directory) / c.samples_csv,
                                  rep.samples);
            break;
        }
        case ExperimentKind::corollary_flocal: {
            const auto v = detail::config_dressing(c);
            const int l = c.l >= 0 ? c.l : 2;
            const auto rep = run_corollary_flocal(h, v, c.resolved_site(), l, c.region_s(),
                                                  params, keep_samples);
            detail::attach_propagation(out, rep);
            if (keep_samples)
                write_samples_csv(std::filesystem::path(c.output_directory) / c.samples_csv,
                                  rep.samples);
            break;
        }
        case ExperimentKind::corollary_strict: {
            const auto z = detail::strict_constant_from_config(c, h);
            Region s = c.s_sites.empty()
                           ? z.base_region.enlarge(1)
                           : Region(lat, c.s_sites);
            const auto rep = run_corollary_strict(h, z, s, params, keep_samples);
            detail::attach_propagation(out, rep);
            out.report["constant"] = to_json_summary(z);
            if (keep_samples)
                write_samples_csv(std::filesystem::path(c.output_directory) / c.samples_csv,
                                  rep.samples);
            break;
        }
        case ExperimentKind::theorem1: {
            const auto v = detail::config_dressing(c);
            Theorem1Options opts;
            opts.l = c.l;
            opts.auto_l_target = c.theorem1_auto_l_target;
            opts.keep_samples = keep_samples;
            const auto rep = run_theorem1(h, v, c.resolved_site(), c.region_s(), params,
                                          opts);
            detail::attach_propagation(out, rep);
            if (keep_samples)
                write_samples_csv(std::filesystem::path(c.output_directory) / c.samples_csv,
                                  rep.samples);
            break;
        }
        case ExperimentKind::equilibration: {
            StateVector psi0 = StateVector::plus_product(lat);
            Spectrum spectrum;
            if (c.dressing_layers > 0) {
                const auto v = detail::config_dressing(c);
                spectrum = dressed_spectrum(h, v);
                psi0 = StateVector(lat, Vector(v.v.mat * psi0.amplitudes));
            } else {
                spectrum = h.spectrum();
            }
            const auto res =
                equilibration_check(psi0.density_matrix(), spectrum, c.region_s(), params);
            out.report["result"] = to_json(res);
            out.pass = res.pass_forward && res.pass_backward;
            out.mean = res.forward.mean;
            out.std_error = res.forward.std_error;
            out.bound = res.rhs;
            out.margin = res.rhs - res.forward.mean;
            break;
        }
        case ExperimentKind::signalling: {
            const auto v = detail::config_dressing(c);
            const Spectrum spectrum = dressed_spectrum(h, v);
            require_generic_spectrum(spectrum);
            const DenseOperator hd = dress_hamiltonian(h, v);
            const auto z = extract_dressed_z(hd, v, c.resolved_site());
            const int l = c.l >= 0 ? c.l : 0;
            const auto zt = truncate_constant(z, l);
            const auto flip = build_flip_observable(zt);
            const auto state = build_experiment_state(z, flip, spectrum);

            const Region bob = c.s_sites.empty() ? zt.region_l : Region(lat, c.s_sites);
            const auto metric = growth_metric(flip.a, spectrum, bob, params);
            const auto search =
                find_witness(spectrum, flip.a, zt.region_l, bob, state.psi,
                             c.signalling_candidates, params, c.signalling_candidate_seed);

            std::vector<InequalityCheck> checks;
            checks.push_back(check_ge("mean_signal_vs_metric", search.mean_signal,
                                      metric.mean - c.signalling_slack));
            checks.push_back(check_ge("best_vs_mean", search.best_signal,
                                      search.mean_signal, 1e-12));
            checks.push_back(check_le("commutator_identity",
                                      search.max_commutator_residual, 0.0, 1e-10));
            json jchecks = json::array();
            bool pass = true;
            for (const auto& chk : checks) {
                jchecks.push_back(to_json(chk));
                pass = pass && chk.pass;
            }
            out.report["result"] = json{{"metric", to_json(metric)},
                                        {"witness", to_json(search)},
                                        {"bob_sites", bob.sites},
                                        {"l", l},
                                        {"g_l", zt.perturbation_norm},
                                        {"psi_expectation", state.psi_expectation},
                                        {"checks", jchecks}};
            out.pass = pass;
            out.mean = search.mean_signal;
            out.std_error = 0.0;
            out.bound = metric.mean - c.signalling_slack;
            out.margin = search.mean_signal - out.bound;
            break;
        }
        case ExperimentKind::spectral_tn: {
            const auto v = detail::config_dressing(c);
            const Spectrum spectrum = dressed_spectrum(h, v);
            require_nondegenerate_energies(spectrum);
            const DenseOperator hd = dress_hamiltonian(h, v);
            std::vector<ConstantOfMotion> zs;
            for (int j = 0; j < lat.num_sites; ++j)
                zs.push_back(extract_dressed_z(hd, v, j));
            std::vector<const ConstantOfMotion*> ptrs;
            for (const auto& z : zs) ptrs.push_back(&z);

            std::vector<int> selection = c.tn_selection;
            if (selection.empty())
                for (int j = 0; j < lat.num_sites; ++j) selection.push_back(j % 2);
            if (static_cast<int>(selection.size()) != lat.num_sites)
                throw InvalidInput("spectral_tn: selection length must equal num_sites");

            const int l = c.l >= 0 ? c.l : 2;
            const auto chain = make_projector_chain(ptrs, selection, l);
            const auto stability = stability_product(chain);
            const auto joint = joint_eigenprojector(chain);

            // parent eigenvector: selection k=1 (lambda +1) is local digit 0
            Eigen::Index s_index = 0;
            for (int j = 0; j < lat.num_sites; ++j)
                s_index = s_index * 2 + (selection[static_cast<std::size_t>(j)] == 1 ? 0 : 1);
            const Vector eigvec = v.v.mat.col(s_index);
            const double fidelity = std::abs(eigvec.dot(joint.mat * eigvec));
            const double idem = operator_norm(Matrix(joint.mat * joint.mat - joint.mat));

            // per-site MPO of one truncated projector for inspection
            const int mid = lat.num_sites / 2;
            const auto mpo_res = projector_mpo(zs[static_cast<std::size_t>(mid)],
                                               chain.truncated[static_cast<std::size_t>(mid)],
                                               selection[static_cast<std::size_t>(mid)],
                                               c.tn_svd_tol);

            std::vector<InequalityCheck> checks;
            checks.push_back(
                check_le("stability_sum", stability.measured, stability.bound_sum));
            checks.push_back(
                check_le("stability_uniform", stability.measured, stability.bound_uniform));
            checks.push_back(
                check_le("joint_infidelity", 1.0 - fidelity, stability.bound_sum));
            checks.push_back(
                check_le("joint_idempotency", idem, 3.0 * stability.bound_sum));
            checks.push_back(check_le("mpo_error", mpo_res.error_vs_full,
                                      mpo_res.error_bound));
            checks.push_back(check_le("mpo_bonds_outside",
                                      mpo_res.bond_trivial_outside ? 0.0 : 1.0, 0.0, 0.5));
            json jchecks = json::array();
            bool pass = true;
            for (const auto& chk : checks) {
                jchecks.push_back(to_json(chk));
                pass = pass && chk.pass;
            }
            out.report["result"] =
                json{{"l", l},
                     {"selection", selection},
                     {"stability",
                      json{{"measured", stability.measured},
                           {"bound_sum", stability.bound_sum},
                           {"bound_uniform", stability.bound_uniform}}},
                     {"fidelity", fidelity},
                     {"idempotency_residual", idem},
                     {"mpo", json{{"bond_dims", mpo_res.mpo.bond_dims},
                                  {"error_vs_full", mpo_res.error_vs_full},
                                  {"error_bound", mpo_res.error_bound}}},
                     {"checks", jchecks}};
            out.pass = pass;
            out.mean = stability.measured;
            out.std_error = 0.0;
            out.bound = stability.bound_sum;
            out.margin = stability.bound_sum - stability.measured;
            break;
        }
    }
    out.report["pass"] = out.pass;
    return out;
}

// Run and write the report; returns the process exit code.
inline int run_to_files(const ExperimentConfig& c) {
    try {
        const RunResult res = run_experiment(c);
        write_json_file(std::filesystem::path(c.output_directory) / c.report_name,
                        res.report);
        return res.pass ? kExitPass : kExitBoundViolation;
    } catch (const BoundViolation& e) {
        std::cerr << "bound violation: " << e.what() << "\n";
        return kExitBoundViolation;
    }
}

// ---------------------------------- sweeps -----------------------------------

enum class SweepAxis { seed, l, separation, num_sites };

inline const char* axis_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::seed: return "seed";
        case SweepAxis::l: return "l";
        case SweepAxis::separation: return "separation";
        case SweepAxis::num_sites: return "N";
    }
    return "axis";
}

inline SweepAxis axis_from_name(const std::string& name) {
    if (name == "seed") return SweepAxis::seed;
    if (name == "l") return SweepAxis::l;
    if (name == "separation") return SweepAxis::separation;
    if (name == "N" || name == "num_sites") return SweepAxis::num_sites;
    throw InvalidInput("unknown sweep axis '" + name + "'");
}

inline ExperimentConfig apply_axis(const ExperimentConfig& base, SweepAxis axis,
                                   double value) {
    ExperimentConfig c = base;
    switch (axis) {
        case SweepAxis::seed:
            c.disorder.seed = static_cast<std::uint64_t>(value);
            break;
        case SweepAxis::l:
            c.l = static_cast<int>(value);
            break;
        case SweepAxis::separation: {
            // Bob's region grows from X_l by the separation; Alice keeps the rest.
            if (c.experiment != ExperimentKind::signalling)
                throw InvalidInput("separation axis applies to signalling runs");
            const int l = c.l >= 0 ? c.l : 0;
            const Region bob =
                Region::single(c.lattice(), c.resolved_site()).enlarge(l).enlarge(
                    static_cast<int>(value));
            if (bob.size() >= c.num_sites)
                throw InvalidInput("separation leaves no encoding region");
            c.s_sites = bob.sites;
            break;
        }
        case SweepAxis::num_sites:
            c.num_sites = static_cast<int>(value);
            if (c.site >= c.num_sites) c.site = -1;
            break;
    }
    return c;
}

// Runs the experiment per axis value and merges a curve CSV. Points execute
// in a worker pool; per-point sampling then runs single-threaded.
inline int sweep_to_files(const ExperimentConfig& base, SweepAxis axis,
                          const std::vector<double>& values) {
    std::vector<RunResult> results(values.size());
    std::vector<std::string> errors(values.size());
    const int pool = std::min<int>(resolve_threads(base.threads),
                                   static_cast<int>(values.size()));

    parallel_for(values.size(), pool, [&](std::size_t i) {
        try {
            ExperimentConfig point = apply_axis(base, axis, values[i]);
            if (pool > 1) point.threads = 1;
            point.report_name = std::string("report_") + axis_name(axis) + "_" +
                                format_double(values[i]) + ".json";
            results[i] = run_experiment(point);
            write_json_file(std::filesystem::path(point.output_directory) /
                                point.report_name,
                            results[i].report);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });

    for (std::size_t i = 0; i < values.size(); ++i)
        if (!errors[i].empty())
            throw InvalidInput("sweep point " + format_double(values[i]) +
                               " failed: " + errors[i]);

    std::vector<CurveRow> rows;
    bool all_pass = true;
    for (std::size_t i = 0; i < values.size(); ++i) {
        CurveRow row;
        row.axis_value = values[i];
        row.mean = results[i].mean;
        row.std_error = results[i].std_error;
        row.bound = results[i].bound;
        row.margin = results[i].margin;
        rows.push_back(row);
        all_pass = all_pass && results[i].pass;
    }
    write_curve_csv(std::filesystem::path(base.output_directory) / "curve.csv",
                    axis_name(axis), rows);
    return all_pass ? kExitPass : kExitBoundViolation;
}

}  // namespace mbl
