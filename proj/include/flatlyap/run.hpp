#pragma once

// Experiment pipelines: spectrum, fiber_measure, degree_report, diagnostics.
// Each writes deterministic CSVs plus a JSON-lines run log into its output directory.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "flatlyap/brownian.hpp"
#include "flatlyap/catalog.hpp"
#include "flatlyap/cocycle.hpp"
#include "flatlyap/config.hpp"
#include "flatlyap/errors.hpp"
#include "flatlyap/harmonic.hpp"
#include "flatlyap/io.hpp"
#include "flatlyap/lyapunov.hpp"

#ifndef FLATLYAP_VERSION
#define FLATLYAP_VERSION "0.0.0"
#endif

namespace flatlyap {

inline constexpr const char* kVersion = FLATLYAP_VERSION;
inline constexpr const char* kOutputRootVariable = "FLATLYAP_OUTPUT_ROOT";

struct RunRecord {
    std::string config_hash;
    std::string version = kVersion;
    std::string name;
    std::string experiment;
    std::filesystem::path directory;
    std::vector<std::string> outputs;
    std::vector<std::pair<std::string, double>> timings;  ///< seconds, not written to CSVs
    std::vector<std::pair<std::string, std::size_t>> discards;
    std::vector<std::pair<std::string, std::string>> verdicts;
    bool partial = false;
    std::string error;
};

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {"spectrum", "degree_report", "fiber_measure", "diagnostics", "all"};
    return names;
}

/// Output root: $FLATLYAP_OUTPUT_ROOT if set, otherwise the working directory.
inline std::filesystem::path output_root() {
    if (const char* env = std::getenv(kOutputRootVariable); env && *env) return env;
    return std::filesystem::current_path();
}

inline std::filesystem::path resolve_output_dir(const ExperimentConfig& c, const std::optional<std::filesystem::path>& root) {
    const std::filesystem::path dir(c.output_dir);
    if (dir.is_absolute()) return dir;
    return (root ? *root : output_root()) / dir;
}

namespace detail {

template <class T>
T require(const std::optional<T>& v, const std::string& field, const std::string& pipeline) {
    if (!v) throw ConfigError(field, 0, "required by the " + pipeline + " pipeline (statistical settings have no defaults)");
    return *v;
}

inline std::string yes_no(bool b) { return b ? "true" : "false"; }

class Runner {
public:
    Runner(const ExperimentConfig& cfg, std::filesystem::path dir, RunRecord& rec)
        : cfg_(cfg), built_(build_experiment(cfg)), dir_(std::move(dir)), rec_(rec), log_(dir_ / "runlog.jsonl") {
        rec_.outputs.push_back("runlog.jsonl");
        log_.write({{"event", "start"},
                    {"config_hash", hash_hex(cfg_.hash)},
                    {"config_path", cfg_.path},
                    {"version", kVersion},
                    {"seed", cfg_.seed},
                    {"name", cfg_.name},
                    {"preset", built_.name},
                    {"surface", built_.surface.name},
                    {"rank", built_.rep.n}});
        for (const auto& n : built_.notes) summary_ << "note: " << n << "\n";
        for (const auto& w : built_.rep.warnings) summary_ << "warning: " << w << "\n";
    }

    void run(const std::string& experiment) {
        if (experiment == "spectrum" || experiment == "all") timed("spectrum", [&] { spectrum(); });
        if (experiment == "fiber_measure" || experiment == "all") timed("fiber_measure", [&] { fiber_measure(); });
        if (experiment == "degree_report" || experiment == "all") timed("degree_report", [&] { degree_report(); });
        if (experiment == "diagnostics" || experiment == "all") timed("diagnostics", [&] { diagnostics(); });
    }

    void finish(bool ok, const std::string& error) {
        std::ofstream out(dir_ / "summary.txt", std::ios::binary);
        out << "flatlyap " << kVersion << "  config " << hash_hex(cfg_.hash) << "  seed " << cfg_.seed << "\n";
        out << "preset " << built_.name << " on " << built_.surface.name << ", rank " << built_.rep.n << "\n";
        out << summary_.str();
        if (!ok) out << "PARTIAL: run stopped with error: " << error << "\n";
        rec_.outputs.push_back("summary.txt");
        nlohmann::json end{{"event", "end"}, {"seed", cfg_.seed}, {"ok", ok}, {"outputs", rec_.outputs}};
        if (!ok) end["error"] = error;
        nlohmann::json t = nlohmann::json::object();
        for (const auto& [k, v] : rec_.timings) t[k] = v;
        end["timings_s"] = t;
        log_.write(end);
    }

private:
    template <class F>
    void timed(const std::string& name, F&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rec_.timings.emplace_back(name, s);
    }

    unsigned workers() const { return cfg_.workers ? cfg_.workers : default_workers(); }

    SpectrumConfig spectrum_config(const std::string& pipeline) const {
        SpectrumConfig sc;
        const EstimatorSettings& e = cfg_.estimator;
        sc.path.dt = require(e.dt, "estimator.dt", pipeline);
        sc.path.horizon = require(e.horizon, "estimator.horizon", pipeline);
        sc.path.rng_seed = cfg_.seed;
        sc.path.cusp_y_cap = e.cusp_y_cap;
        sc.n_batches = require(e.n_batches, "estimator.n_batches", pipeline);
        sc.burn_in_fraction = require(e.burn_in_fraction, "estimator.burn_in_fraction", pipeline);
        sc.renorm_interval = e.renorm_interval;
        sc.workers = workers();
        return sc;
    }

    void log_ensemble(const std::string& purpose, const std::string& surface, const PathConfig& pc, const std::string& start,
                      HPoint point, std::size_t n, const std::vector<std::size_t>& discarded, nlohmann::json extra = {}) {
        nlohmann::json j{{"event", "ensemble"}, {"purpose", purpose},     {"seed", pc.rng_seed},
                         {"surface", surface},   {"y_floor", cfg_.y_floor}, {"dt", pc.dt},
                         {"horizon", pc.horizon}, {"cusp_y_cap", pc.cusp_y_cap}, {"start", start},
                         {"start_x", point.x},   {"start_y", point.y},      {"n_paths", n},
                         {"discarded", discarded}};
        if (!extra.is_null()) j["extra"] = extra;
        log_.write(j);
    }

    const PathEnsemble& paths(const SpectrumConfig& sc) {
        if (!paths_) {
            const std::size_t n = require(cfg_.estimator.n_paths, "estimator.n_paths", "spectrum");
            paths_ = spectrum_paths(built_.surface, sc, n);
            std::vector<std::size_t> lost;
            for (std::size_t i = 0; i < paths_->size(); ++i)
                if (paths_->discarded[i]) lost.push_back(i);
            PathConfig pc = sc.path;
            log_ensemble("spectrum", built_.surface.name, pc, "basepoint", built_.surface.basepoint, n, lost);
            rec_.discards.emplace_back("spectrum", paths_->discard_count);
            if (paths_->discard_fraction() > sc.discard_warn_fraction)
                summary_ << "warning: " << paths_->discard_count << " spectrum trajectories discarded at cusps\n";
        }
        return *paths_;
    }

    const SpectrumEstimate& spectrum_estimate(const SpectrumConfig& sc) {
        if (!spectrum_) spectrum_ = estimate_spectrum(built_.rep, paths(sc), sc);
        return *spectrum_;
    }

    void spectrum() {
        const SpectrumConfig sc = spectrum_config("spectrum");
        const SpectrumEstimate& est = spectrum_estimate(sc);
        const std::string hash = hash_hex(cfg_.hash);
        CsvWriter csv(dir_ / "spectrum.csv");
        csv.row({"preset", "index", "lambda", "ci_half_width", "n_paths", "n_batches", "discarded", "horizon", "dt", "seed",
                 "config_hash"});
        for (std::size_t i = 0; i < est.lambdas.size(); ++i)
            csv.row({built_.name, std::to_string(i + 1), format_number(est.lambdas[i]), format_number(est.ci_half_widths[i]),
                     std::to_string(est.n_paths), std::to_string(est.n_batches), std::to_string(est.discarded_trajectories),
                     format_number(sc.path.horizon), format_number(sc.path.dt), std::to_string(cfg_.seed), hash});
        rec_.outputs.push_back("spectrum.csv");

        CsvWriter checks(dir_ / "spectrum_checks.csv");
        checks.row({"check", "value", "tolerance", "pass"});
        const SymmetryCheck sym = symmetry_residual(est);
        for (std::size_t i = 0; i < sym.pair_residuals.size(); ++i)
            checks.row({"symmetry_pair_" + std::to_string(i + 1) + "_" + std::to_string(est.lambdas.size() - i),
                        format_number(sym.pair_residuals[i]), format_number(sym.pair_tolerances[i]),
                        yes_no(sym.pair_residuals[i] <= sym.pair_tolerances[i])});
        const TopEstimate top = estimate_top(built_.rep, paths(sc), sc);
        checks.row({"top_exponent_norm_estimator", format_number(top.estimate.mean), format_number(top.estimate.ci), ""});
        checks.row({"top_vs_qr", format_number(std::abs(top.estimate.mean - est.lambdas.front())),
                    format_number(top.estimate.ci + est.ci_half_widths.front()),
                    yes_no(std::abs(top.estimate.mean - est.lambdas.front()) <= top.estimate.ci + est.ci_half_widths.front())});
        rec_.verdicts.emplace_back("symmetry", sym.within_ci ? "within-ci" : "outside-ci");
        summary_ << "spectrum:";
        for (std::size_t i = 0; i < est.lambdas.size(); ++i)
            summary_ << " " << format_number(est.lambdas[i]) << " +- " << format_number(est.ci_half_widths[i]) << ";";
        summary_ << "\n  symmetry residual " << format_number(sym.residual) << (sym.within_ci ? " (within CI)" : " (outside CI)")
                 << "\n";
        const int k = cfg_.estimator.exterior_k;
        if (k >= 2) {
            if (k > built_.rep.n) throw ConfigError("estimator.exterior_k", 0, "exceeds the rank");
            const ExteriorConsistency ec = exterior_consistency(built_.rep, paths(sc), sc, k);
            checks.row({"exterior_top_k" + std::to_string(k), format_number(ec.top_exterior), "", ""});
            checks.row({"partial_sum_k" + std::to_string(k), format_number(ec.partial_sum), "", ""});
            checks.row({"exterior_discrepancy", format_number(ec.discrepancy), format_number(ec.joint_ci), yes_no(ec.within_ci)});
            checks.row({"exterior_paired_ci", format_number(ec.paired_ci), "", ""});
            rec_.verdicts.emplace_back("exterior_consistency", ec.within_ci ? "within-ci" : "outside-ci");
            summary_ << "  exterior k=" << k << ": " << format_number(ec.top_exterior) << " vs " << format_number(ec.partial_sum)
                     << " (joint CI " << format_number(ec.joint_ci) << ")\n";
        }
        rec_.outputs.push_back("spectrum_checks.csv");
    }

    FiberConfig fiber_config(const std::string& pipeline) const {
        FiberConfig fc;
        fc.path.dt = require(cfg_.estimator.dt, "estimator.dt", pipeline);
        fc.path.horizon = require(cfg_.fiber.horizon, "fiber.horizon", pipeline);
        fc.path.rng_seed = cfg_.seed;
        fc.path.cusp_y_cap = cfg_.estimator.cusp_y_cap;
        fc.discrepancy_threshold = cfg_.fiber.discrepancy_threshold;
        fc.workers = workers();
        return fc;
    }

    const FiberSample& fiber_sample(int k, const std::string& pipeline) {
        if (!fiber_ || fiber_->k != k) {
            const FiberConfig fc = fiber_config(pipeline);
            const std::size_t n = require(cfg_.fiber.n_paths, "fiber.n_paths", pipeline);
            fiber_ = sample_fiber_measure(built_.rep, built_.surface, fc, n, k);
            std::vector<std::size_t> lost;
            std::size_t j = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (j < fiber_->path_index.size() && fiber_->path_index[j] == i) ++j;
                else lost.push_back(i);
            }
            PathConfig pc = fc.path;
            log_ensemble("fiber", built_.surface.name, pc, "uniform", {}, n, lost, {{"k", k}});
            rec_.discards.emplace_back("fiber", fiber_->discarded);
        }
        return *fiber_;
    }

    void fiber_measure() {
        const int k = cfg_.fiber.k;
        const FiberSample& s = fiber_sample(k, "fiber_measure");
        std::optional<DivisorField> divisor;
        const auto dim = static_cast<Eigen::Index>(binomial(static_cast<std::size_t>(built_.rep.n), static_cast<std::size_t>(k)));
        if (built_.subbundle && built_.subbundle->divisor(s.base.front()).coeffs.size() == dim) divisor = built_.subbundle->divisor;

        CsvWriter csv(dir_ / "fiber.csv");
        std::vector<std::string> header{"index", "path_index", "base_x", "base_y"};
        for (Eigen::Index c = 0; c < dim; ++c) {
            header.push_back("re_" + std::to_string(c));
            header.push_back("im_" + std::to_string(c));
        }
        if (divisor) header.push_back("distance_to_divisor");
        csv.row(header);
        std::optional<GapReport> gap;
        if (divisor) gap = support_divisor_gap(s, *divisor);
        for (std::size_t i = 0; i < s.size(); ++i) {
            std::vector<std::string> row{std::to_string(i), std::to_string(s.path_index[i]), format_number(s.base[i].x),
                                         format_number(s.base[i].y)};
            for (Eigen::Index c = 0; c < dim; ++c) {
                row.push_back(format_number(s.points[i](c).real()));
                row.push_back(format_number(s.points[i](c).imag()));
            }
            if (gap) row.push_back(format_number(gap->distances[i]));
            csv.row(row);
        }
        rec_.outputs.push_back("fiber.csv");

        CsvWriter sum(dir_ / "fiber_summary.csv");
        sum.row({"quantity", "value", "ci_or_reference"});
        sum.row({"n_points", std::to_string(s.size()), ""});
        sum.row({"discarded", std::to_string(s.discarded), ""});
        sum.row({"horizon", format_number(s.horizon), ""});
        sum.row({"horizon_discrepancy", format_number(s.discrepancy), format_number(s.discrepancy_threshold)});
        sum.row({"converged", yes_no(s.converged), ""});
        sum.row({"mean_real_deviation", format_number(mean_real_deviation(s.points)), ""});
        sum.row({"max_cluster_mass_r0.3", format_number(max_cluster_mass(s, 0.3)),
                 format_number(uniform_cluster_baseline(static_cast<int>(dim), 0.3))});
        if (gap) {
            sum.row({"support_gap", format_number(gap->min_distance), ""});
            for (std::size_t e = 0; e < gap->eps_grid.size(); ++e)
                sum.row({"fraction_below_" + format_number(gap->eps_grid[e]), format_number(gap->fraction_below[e]), ""});
        }
        summary_ << "fiber measure (k=" << k << ", T=" << format_number(s.horizon) << ", " << s.size()
                 << " points): horizon discrepancy " << format_number(s.discrepancy) << (s.converged ? "" : " NOT CONVERGED")
                 << "\n";
        if (!s.converged) summary_ << "warning: fiber measure did not pass the horizon-doubling check\n";
        if (gap) summary_ << "  support gap " << format_number(gap->min_distance) << "\n";
        rec_.verdicts.emplace_back("fiber_converged", yes_no(s.converged));

        if (cfg_.fiber.probe_dt && cfg_.fiber.n_probes) {
            ProbeConfig pc;
            pc.probe_dt = *cfg_.fiber.probe_dt;
            pc.n_probes = *cfg_.fiber.n_probes;
            pc.dt = fiber_config("fiber_measure").path.dt;
            pc.seed = cfg_.seed;
            pc.n_batches = cfg_.estimator.n_batches.value_or(20);
            pc.workers = workers();
            const BatchEstimate lm = lambda_from_measure(built_.rep, built_.surface, s, pc);
            PathConfig logged;
            logged.dt = pc.dt;
            logged.horizon = pc.probe_dt;
            logged.rng_seed = pc.seed;
            logged.cusp_y_cap = cfg_.estimator.cusp_y_cap;
            log_ensemble("probe", built_.surface.name, logged, "fiber_csv", {}, s.size() * pc.n_probes, {},
                         {{"n_probes", pc.n_probes}, {"k", k}});
            sum.row({"lambda_from_measure", format_number(lm.mean), format_number(lm.ci)});
            summary_ << "  lambda(nu) from probes " << format_number(lm.mean) << " +- " << format_number(lm.ci) << "\n";
            if (cfg_.estimator.dt && cfg_.estimator.horizon && cfg_.estimator.n_paths && cfg_.estimator.n_batches &&
                cfg_.estimator.burn_in_fraction) {
                const SpectrumConfig sc = spectrum_config("fiber_measure");
                const Representation ext = k == 1 ? built_.rep : exterior_power_rep(built_.rep, k);
                const TopEstimate top = estimate_top(ext, paths(sc), sc);
                const double joint = lm.ci + top.estimate.ci;
                const double diff = lm.mean - top.estimate.mean;
                sum.row({"estimate_top", format_number(top.estimate.mean), format_number(top.estimate.ci)});
                sum.row({"cross_estimator_difference", format_number(diff), format_number(joint)});
                sum.row({"cross_estimator_inequality", yes_no(diff <= joint), ""});
                if (built_.rep.strongly_irreducible)
                    rec_.verdicts.emplace_back("cross_estimator_agreement", std::abs(diff) <= joint ? "agree" : "disagree");
                summary_ << "  estimate_top " << format_number(top.estimate.mean) << " +- " << format_number(top.estimate.ci)
                         << (built_.rep.strongly_irreducible ? (std::abs(diff) <= joint ? " (agree)" : " (DISAGREE)") : "")
                         << "\n";
            }
        }
        rec_.outputs.push_back("fiber_summary.csv");
    }

    void degree_report() {
        if (!built_.subbundle) throw ConfigError("subbundle", 0, "the degree_report pipeline needs subbundle data");
        const int k = cfg_.degree.k;
        const auto dim = static_cast<Eigen::Index>(binomial(static_cast<std::size_t>(built_.rep.n), static_cast<std::size_t>(k)));
        if (built_.subbundle->divisor(built_.surface.basepoint).coeffs.size() != dim)
            throw ConfigError("degree.k", 0, "divisor dimension does not match the k-th exterior power");
        const SpectrumConfig sc = spectrum_config("degree_report");
        const FiberSample& s = fiber_sample(k, "degree_report");
        DegreeConfig dc;
        dc.gap_threshold = cfg_.degree.gap_threshold;
        dc.strict_sigma = cfg_.degree.strict_sigma;
        const DegreeReport r = flatlyap::degree_report(built_.rep, built_.surface, sc, paths(sc), s, *built_.subbundle, k, dc);
        CsvWriter csv(dir_ / "degree.csv");
        csv.row({"label", "k", "lambda_sum", "lambda_sum_ci", "chern_number", "degree", "pi_deg", "delta", "gap", "verdict",
                 "warnings"});
        std::string warnings;
        for (const auto& w : r.warnings) warnings += (warnings.empty() ? "" : "; ") + w;
        csv.row({r.label, std::to_string(k), format_number(r.lambda_sum), format_number(r.lambda_sum_ci), r.chern_number.str(),
                 format_number(r.degree), format_number(r.pi_deg), format_number(r.delta), format_number(r.support_gap),
                 to_string(r.verdict), warnings});
        rec_.outputs.push_back("degree.csv");
        rec_.verdicts.emplace_back("degree_report", to_string(r.verdict));
        summary_ << "degree report (" << r.label << ", k=" << k << "): lambda_sum " << format_number(r.lambda_sum) << " +- "
                 << format_number(r.lambda_sum_ci) << ", pi*deg " << format_number(r.pi_deg) << ", delta "
                 << format_number(r.delta) << ", gap " << format_number(r.support_gap) << " -> " << to_string(r.verdict) << "\n";
        for (const auto& w : r.warnings) summary_ << "warning: " << w << "\n";
    }

    void diagnostics() {
        CsvWriter csv(dir_ / "diagnostics.csv");
        csv.row({"name", "value", "ci_or_stderr", "reference", "pass"});
        const DiagnosticsSettings& d = cfg_.diagnostics;
        csv.row({"relation_residual", format_number(relation_residual(built_.rep, built_.surface)), "", "0",
                 yes_no(relation_residual(built_.rep, built_.surface) <= kFormTolerance)});
        const SurfaceModel plane = free_plane();
        if (d.escape_paths) {
            PathConfig pc;
            pc.dt = require(cfg_.estimator.dt, "estimator.dt", "diagnostics");
            pc.horizon = require(d.escape_horizon, "diagnostics.escape_horizon", "diagnostics");
            pc.rng_seed = cfg_.seed;
            const BatchEstimate e = escape_rate(pc, *d.escape_paths, plane.basepoint, cfg_.estimator.n_batches.value_or(20), workers());
            log_ensemble("escape", "free_plane", pc, "point", plane.basepoint, *d.escape_paths, {});
            csv.row({"escape_rate", format_number(e.mean), format_number(e.ci), "0.5", yes_no(std::abs(e.mean - 0.5) <= 0.02)});
            summary_ << "escape rate " << format_number(e.mean) << " +- " << format_number(e.ci) << "\n";
        }
        if (d.dynkin_paths) {
            const auto fns = standard_test_functions();
            const auto res = dynkin_residuals(fns, plane.basepoint, 1.0, *d.dynkin_paths, cfg_.seed, 1e-3, workers());
            PathConfig pc;
            pc.dt = 1e-3;
            pc.horizon = 1.0;
            pc.rng_seed = cfg_.seed;
            log_ensemble("dynkin", "free_plane", pc, "point", plane.basepoint, *d.dynkin_paths, {});
            for (std::size_t i = 0; i < fns.size(); ++i)
                csv.row({"dynkin_" + fns[i].name, format_number(res[i].mean), format_number(res[i].std_error), "0",
                         yes_no(std::abs(res[i].mean) <= 3.0 * res[i].std_error)});
        }
        if (d.sup_tail_paths) {
            const double t0 = require(d.sup_tail_t0, "diagnostics.sup_tail_t0", "diagnostics");
            PathConfig pc;
            pc.dt = require(cfg_.estimator.dt, "estimator.dt", "diagnostics");
            pc.rng_seed = cfg_.seed;
            std::vector<double> radii;
            for (int i = 0; i <= 40; ++i) radii.push_back(0.25 * i);
            const SupTail tail = sup_tail(pc, radii, t0, *d.sup_tail_paths, 0.0, workers());
            pc.horizon = t0;
            log_ensemble("sup_tail", "free_plane", pc, "point", plane.basepoint, *d.sup_tail_paths, {});
            const double slope = sup_tail_slope(tail, 1.0, 10.0);
            const double bound = -(1.0 - 0.15) / (4.0 * t0);
            csv.row({"sup_tail_log_slope", format_number(slope), "", format_number(bound), yes_no(slope <= bound)});
            for (std::size_t i = 0; i < tail.r.size(); ++i)
                csv.row({"sup_tail_p_r" + format_number(tail.r[i]), format_number(tail.probability[i]), "",
                         format_number(tail.envelope[i]), ""});
        }
        if (d.norm_bound_samples) {
            const NormBound nb = distance_norm_bound_check(built_.rep, built_.surface, *d.norm_bound_samples, 12, cfg_.seed);
            csv.row({"distance_norm_bound_max_ratio", format_number(nb.max_ratio), "", "", ""});
        }
        rec_.outputs.push_back("diagnostics.csv");
    }

    const ExperimentConfig& cfg_;
    BuiltPreset built_;
    std::filesystem::path dir_;
    RunRecord& rec_;
    JsonLines log_;
    std::ostringstream summary_;
    std::optional<PathEnsemble> paths_;
    std::optional<SpectrumEstimate> spectrum_;
    std::optional<FiberSample> fiber_;
};

}  // namespace detail

/// Executes one pipeline (or "all") and writes its outputs. Errors propagate after
/// the summary and run log mark the run as partial.
inline RunRecord run(const ExperimentConfig& cfg, const std::string& experiment,
                     const std::optional<std::filesystem::path>& root = std::nullopt) {
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), experiment) == names.end())
        throw DomainError("unknown experiment '" + experiment + "' (spectrum | degree_report | fiber_measure | diagnostics | all)");
    RunRecord rec;
    rec.config_hash = hash_hex(cfg.hash);
    rec.name = cfg.name;
    rec.experiment = experiment;
    rec.directory = resolve_output_dir(cfg, root);
    std::filesystem::create_directories(rec.directory);
    DirectoryLock lock(rec.directory);
    detail::Runner runner(cfg, rec.directory, rec);
    try {
        runner.run(experiment);
    } catch (const std::exception& e) {
        rec.partial = true;
        rec.error = e.what();
        runner.finish(false, e.what());
        throw;
    }
    runner.finish(true, "");
    return rec;
}

// ---------------------------------------------------------------------------
// Replay

struct ReplayResult {
    std::string purpose;
    std::size_t index = 0;
    std::uint64_t seed = 0;
    HPoint start;
    TrajectorySummary path;
};

namespace detail {

inline SurfaceModel surface_by_name(const std::string& name, double y_floor) {
    if (name == "genus2_octagon") return genus2_octagon();
    if (name == "thrice_punctured_sphere") return thrice_punctured_sphere(y_floor);
    if (name == "free_plane") return free_plane();
    throw DomainError("replay: unknown surface '" + name + "'");
}

/// Base point of row `row` of a fiber.csv file.
inline HPoint fiber_base(const std::filesystem::path& csv, std::size_t row) {
    std::ifstream in(csv, std::ios::binary);
    if (!in) throw Error("replay: probe trajectories need '" + csv.string() + "'");
    std::string line;
    std::getline(in, line);
    for (std::size_t i = 0; std::getline(in, line); ++i)
        if (i == row) {
            const auto f = csv_split(line);
            return {std::stod(f.at(2)), std::stod(f.at(3))};
        }
    throw DomainError("replay: fiber.csv has no row " + std::to_string(row));
}

}  // namespace detail

/// Re-runs trajectory "purpose:index" described by the run log's ensemble line.
inline ReplayResult replay(const std::filesystem::path& runlog, const std::string& trajectory_id) {
    const auto colon = trajectory_id.rfind(':');
    if (colon == std::string::npos) throw DomainError("replay: trajectory id must be purpose:index");
    ReplayResult r;
    r.purpose = trajectory_id.substr(0, colon);
    r.index = std::stoull(trajectory_id.substr(colon + 1));
    std::ifstream in(runlog, std::ios::binary);
    if (!in) throw Error("replay: cannot open '" + runlog.string() + "'");
    std::string line;
    std::optional<nlohmann::json> ens;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        if (j.value("event", "") == "ensemble" && j.value("purpose", "") == r.purpose) ens = j;
    }
    if (!ens) throw DomainError("replay: no ensemble with purpose '" + r.purpose + "' in the run log");
    const std::size_t n = (*ens)["n_paths"].get<std::size_t>();
    if (r.index >= n) throw DomainError("replay: index out of range (ensemble has " + std::to_string(n) + " trajectories)");
    const SurfaceModel s = detail::surface_by_name((*ens)["surface"].get<std::string>(), (*ens)["y_floor"].get<double>());
    PathConfig pc;
    pc.dt = (*ens)["dt"].get<double>();
    pc.horizon = (*ens)["horizon"].get<double>();
    pc.cusp_y_cap = (*ens)["cusp_y_cap"].get<double>();
    pc.rng_seed = (*ens)["seed"].get<std::uint64_t>();
    r.seed = pc.rng_seed;
    RandomStream rng(pc.rng_seed, r.purpose, r.index);
    const std::string start = (*ens)["start"].get<std::string>();
    if (start == "basepoint") r.start = s.basepoint;
    else if (start == "uniform") r.start = sample_uniform(s, rng);
    else if (start == "point") r.start = {(*ens)["start_x"].get<double>(), (*ens)["start_y"].get<double>()};
    else if (start == "fiber_csv") {
        const std::size_t per = (*ens)["extra"]["n_probes"].get<std::size_t>();
        r.start = detail::fiber_base(runlog.parent_path() / "fiber.csv", r.index / per);
        r.start = reduce_to_domain(s, r.start).point;
    } else throw DomainError("replay: unknown start policy '" + start + "'");
    r.path = sample_trajectory(s, r.start, pc, rng);
    return r;
}

}  // namespace flatlyap
