// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "flatlyap/run.hpp"

using namespace flatlyap;
namespace fs = std::filesystem;

namespace {

struct Check {
    std::string what;
    bool ok = false;
    std::string detail;
};

struct Criterion {
    int id = 0;
    std::string title;
    std::vector<Check> checks;
    double seconds = 0.0;
    std::string error;

    bool passed() const {
        if (!error.empty()) return false;
        for (const auto& c : checks)
            if (!c.ok) return false;
        return !checks.empty();
    }
    void add(std::string what, bool ok, std::string detail) { checks.push_back({std::move(what), ok, std::move(detail)}); }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

CMatrix random_matrix(int rows, int cols, RandomStream& r) {
    CMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = {r.normal(), r.normal()};
    return m;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// settings shared by the spectral criteria
constexpr double kDt = 0.01;
constexpr double kHorizon = 200.0;
constexpr std::size_t kPaths = 1000;

SpectrumConfig spectral_config(std::uint64_t seed) {
    SpectrumConfig c;
    c.path.dt = kDt;
    c.path.horizon = kHorizon;
    c.path.rng_seed = seed;
    c.n_batches = 20;
    c.burn_in_fraction = 0.0;
    return c;
}

FiberConfig fiber_config(double horizon, std::uint64_t seed) {
    FiberConfig c;
    c.path.dt = kDt;
    c.path.horizon = horizon;
    c.path.rng_seed = seed;
    return c;
}

const std::vector<std::string> kGated = {"unitary_rank2", "rank1_character", "fuchsian_genus2", "weight1_vhs",
                                         "weight2_1k1",   "schottky_rank2",  "sp4_random"};

// state carried between criteria
struct Shared {
    double escape = std::numeric_limits<double>::quiet_NaN();
    std::optional<PathEnsemble> paths;
    SpectrumConfig sc = spectral_config(1001);

    const PathEnsemble& ensemble() {
        if (!paths) paths = spectrum_paths(genus2_octagon(), sc, kPaths);
        return *paths;
    }
};

void linear_algebra(Criterion& c) {
    RandomStream r(101, "acceptance_linalg", 0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const CMatrix m = random_matrix(5, 5, r);
        for (int k = 1; k <= 4; ++k) worst = std::max(worst, corrected_norm_identity_residual(m, k));
    }
    c.add("norm identity on 100 random 5x5", worst <= 1e-9, "max residual " + num(worst));

    int disagreements = 0, meets = 0;
    for (int i = 0; i < 1000; ++i) {
        const int n = 5;
        const int k = 1 + static_cast<int>(r() % 4);
        CMatrix f = random_matrix(n, n - k, r);
        CMatrix g = random_matrix(n, k, r);
        if (r() & 1u) g.col(0) = f * random_matrix(n - k, 1, r);
        const Subspace gs = Subspace::span(g), fs = Subspace::span(f);
        const bool oracle = intersection_dimension(gs, fs) >= 1;
        meets += oracle;
        disagreements += intersects_nontrivially(gs, fs).intersects != oracle;
        disagreements += plucker_intersects(gs, fs) != oracle;
    }
    c.add("intersection predicate vs rank oracle, 1000 instances", disagreements == 0,
          std::to_string(disagreements) + " disagreements, " + std::to_string(meets) + " meeting pairs");

    const Weight3Example ex = weight3_isotropic_example();
    const PredicateResult iso = isotropic(ex.plane, ex.h);
    const PredicateResult real = is_real(ex.plane, ex.conjugation);
    const bool exact = iso.holds && real.holds && iso.residual == 0.0 && real.residual == 0.0 &&
                       intersection_dimension(ex.plane, ex.e2_plus_e3) == 1;
    c.add("weight-3 isotropic plane", exact, "residuals " + num(iso.residual) + ", " + num(real.residual));
}

void sampler(Criterion& c, Shared& sh) {
    const auto fns = standard_test_functions();
    const SurfaceModel plane = free_plane();
    const auto res = dynkin_residuals(fns, plane.basepoint, 1.0, 10000, 201, 1e-3);
    for (std::size_t i = 0; i < fns.size() && i < 3; ++i)
        c.add("Dynkin " + fns[i].name, std::abs(res[i].mean) <= 3.0 * res[i].std_error,
              num(res[i].mean) + " (stderr " + num(res[i].std_error) + ")");

    PathConfig pc;
    pc.dt = kDt;
    pc.horizon = 200.0;
    pc.rng_seed = 202;
    const BatchEstimate e = escape_rate(pc, 1000, plane.basepoint, 20);
    sh.escape = e.mean;
    c.add("escape rate 0.50 +- 0.02", std::abs(e.mean - 0.5) <= 0.02, num(e.mean) + " (ci " + num(e.ci) + ")");

    const double t0 = 1.0;
    PathConfig tc;
    tc.dt = kDt;
    tc.rng_seed = 203;
    std::vector<double> radii;
    for (int i = 0; i <= 40; ++i) radii.push_back(0.25 * i);
    const SupTail tail = sup_tail(tc, radii, t0, 10000);
    const double slope = sup_tail_slope(tail, 1.0, 10.0);
    const double bound = -(1.0 - 0.15) / (4.0 * t0);
    c.add("sup tail log-slope", slope <= bound, num(slope) + " <= " + num(bound));
}

void degenerate(Criterion& c, Shared& sh) {
    const PathEnsemble& paths = sh.ensemble();
    for (const char* name : {"unitary_rank2", "rank1_character"}) {
        const BuiltPreset p = build_preset(name);
        const SpectrumEstimate e = estimate_spectrum(p.rep, paths, sh.sc);
        bool ok = true;
        std::string detail;
        for (std::size_t i = 0; i < e.lambdas.size(); ++i) {
            ok = ok && std::abs(e.lambdas[i]) <= std::max(0.01, e.ci_half_widths[i]);
            detail += (i ? ", " : "") + num(e.lambdas[i]);
        }
        c.add(std::string(name) + " exponents vanish", ok, "lambda = (" + detail + ")");
    }
}

void structure(Criterion& c, Shared& sh) {
    const PathEnsemble& paths = sh.ensemble();
    const double oracle = 0.5 * sh.escape;
    {
        const BuiltPreset p = build_preset("fuchsian_genus2");
        const SpectrumEstimate e = estimate_spectrum(p.rep, paths, sh.sc);
        const bool ok = std::isfinite(oracle) && std::abs(e.lambdas[0] - oracle) <= 0.1 * oracle &&
                        std::abs(e.lambdas[1] + oracle) <= 0.1 * oracle;
        c.add("Fuchsian spectrum vs escape/2", ok,
              "(" + num(e.lambdas[0]) + ", " + num(e.lambdas[1]) + ") vs +-" + num(oracle));
    }
    for (const auto& name : kGated) {
        const BuiltPreset p = build_preset(name);
        const SymmetryCheck s = symmetry_residual(estimate_spectrum(p.rep, paths, sh.sc));
        double tol = 0.0;
        for (double t : s.pair_tolerances) tol = std::max(tol, t);
        c.add("symmetry " + name, s.within_ci, "residual " + num(s.residual) + ", tolerance " + num(tol));
    }
    const BuiltPreset w2 = build_preset("weight2_1k1");
    const ExteriorConsistency ec = exterior_consistency(w2.rep, paths, sh.sc, 2);
    c.add("exterior k=2 on weight2_1k1 (rank 3)", ec.within_ci,
          "|" + num(ec.top_exterior) + " - " + num(ec.partial_sum) + "| = " + num(ec.discrepancy) + ", joint ci " +
              num(ec.joint_ci));
}

void formula(Criterion& c, Shared& sh) {
    const PathEnsemble& paths = sh.ensemble();
    {
        const BuiltPreset p = build_preset("weight1_vhs");
        const FiberSample s = sample_fiber_measure(p.rep, p.surface, fiber_config(40.0, 501), 1000);
        const DegreeReport d = degree_report(p.rep, p.surface, sh.sc, paths, s, *p.subbundle, 1);
        c.add("weight1 margin >= -CI", d.margin >= -d.lambda_sum_ci,
              "lambda_1 " + num(d.lambda_sum) + ", pi deg " + num(d.pi_deg) + ", margin " + num(d.margin) + ", ci " +
                  num(d.lambda_sum_ci));
        const double gap = std::abs((d.delta + d.pi_deg) - d.lambda_sum);
        const double ulp = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(d.lambda_sum));
        c.add("delta + pi deg = lambda", gap <= ulp, "difference " + num(gap));
    }
    {
        const BuiltPreset p = build_preset("fuchsian_genus2");
        const FiberSample s = sample_fiber_measure(p.rep, p.surface, fiber_config(40.0, 502), 2000);
        ProbeConfig pc;
        pc.probe_dt = 8.0;
        pc.n_probes = 2;
        pc.dt = kDt;
        pc.seed = 503;
        const BatchEstimate lm = lambda_from_measure(p.rep, p.surface, s, pc);
        const TopEstimate top = estimate_top(p.rep, paths, sh.sc);
        const double joint = lm.ci + top.estimate.ci;
        c.add("lambda_from_measure vs estimate_top (Fuchsian)", std::abs(lm.mean - top.estimate.mean) <= joint,
              num(lm.mean) + " vs " + num(top.estimate.mean) + ", joint ci " + num(joint) + ", " +
                  std::to_string(s.size()) + " points" + (s.converged ? "" : ", fiber NOT converged"));
    }
}

void support(Criterion& c, Shared& sh) {
    const BuiltPreset p = build_preset("schottky_rank2");
    const FiberConfig fc = fiber_config(60.0, 601);
    // stream i is shared, so the larger sample contains the smaller one
    const FiberSample small = sample_fiber_measure(p.rep, p.surface, fc, 1000);
    const FiberSample large = sample_fiber_measure(p.rep, p.surface, fc, 2000);
    const double g1 = support_divisor_gap(small, p.subbundle->divisor).min_distance;
    const double g2 = support_divisor_gap(large, p.subbundle->divisor).min_distance;
    const double threshold = DegreeConfig{}.gap_threshold;
    c.add("Schottky support gap > 0", g1 > threshold && g2 > threshold,
          "gap " + num(g1) + " (n=1000), " + num(g2) + " (n=2000)");
    c.add("gap stable when n doubles", g2 >= 0.5 * g1, "ratio " + num(g2 / g1));

    const ExperimentConfig cfg = load_config((fs::path(FLATLYAP_SOURCE_DIR) / "configs/schottky_random_divisor.yaml").string());
    const BuiltPreset rnd = build_experiment(cfg);
    const DegreeReport d = degree_report(rnd.rep, rnd.surface, sh.sc, sh.ensemble(), large, *rnd.subbundle, 1);
    c.add("random divisor delta > 3 CI", d.delta > 3.0 * d.lambda_sum_ci,
          "delta " + num(d.delta) + ", ci " + num(d.lambda_sum_ci) + ", gap " + num(d.support_gap));
}

void poisson(Criterion& c) {
    RandomStream r(701, "acceptance_poisson", 0);
    bool exact = true;
    for (int n = 1; n <= 3; ++n)
        for (int i = 0; i < 10; ++i) exact = exact && poisson_kernel(CVector::Zero(n), random_unit_vector(n, r)) == 1.0;
    c.add("P(0, u) = 1", exact, "");

    for (int i = 0; i < 5; ++i) {
        const int n = 1 + i % 2;
        const CVector z = 0.8 * r.uniform() * random_unit_vector(n, r);
        const MeanStderr m = poisson_normalization(z, 200000, 710 + static_cast<std::uint64_t>(i));
        const bool ok1 = std::abs(m.mean - 1.0) <= 3.0 * m.std_error;

        const CVector z1 = 0.9 * r.uniform() * random_unit_vector(1, r), u1 = random_unit_vector(1, r);
        const PluriharmonicResidual one = pluriharmonicity_residual(z1, u1, 1e-3);
        const CVector z2 = 0.9 * r.uniform() * random_unit_vector(2, r), u2 = random_unit_vector(2, r);
        const PluriharmonicResidual two = pluriharmonicity_residual(z2, u2, 1e-3);
        c.add("point " + std::to_string(i + 1) + " normalization", ok1, num(m.mean) + " (stderr " + num(m.std_error) + ")");
        c.add("point " + std::to_string(i + 1) + " n=1 pluriharmonic", one.levi_form_norm <= 1e-4,
              "Levi norm " + num(one.levi_form_norm));
        c.add("point " + std::to_string(i + 1) + " n=2 not pluriharmonic",
              two.levi_form_norm > 10.0 * two.laplace_beltrami_residual,
              "Levi norm " + num(two.levi_form_norm) + ", Laplace-Beltrami " + num(two.laplace_beltrami_residual));
    }
}

void determinism(Criterion& c) {
    const ExperimentConfig cfg = load_config((fs::path(FLATLYAP_SOURCE_DIR) / "configs/determinism.yaml").string());
    const fs::path root = fs::temp_directory_path() / "flatlyap_acceptance";
    fs::remove_all(root);
    const RunRecord a = run(cfg, "all", root / "first");
    const RunRecord b = run(cfg, "all", root / "second");
    std::size_t compared = 0;
    for (const auto& f : a.outputs) {
        if (fs::path(f).extension() != ".csv") continue;
        ++compared;
        const std::string x = read_file(a.directory / f), y = read_file(b.directory / f);
        c.add(f + " identical", !x.empty() && x == y, std::to_string(x.size()) + " bytes");
    }
    c.add("all pipelines wrote CSVs", compared >= 6, std::to_string(compared) + " files");
    fs::remove_all(root);
}

}  // namespace

int main() {
    Shared sh;
    std::vector<Criterion> all;
    const std::vector<std::pair<std::string, std::function<void(Criterion&)>>> plan = {
        {"linear-algebra exactness", [](Criterion& c) { linear_algebra(c); }},
        {"sampler soundness", [&](Criterion& c) { sampler(c, sh); }},
        {"degenerate spectra", [&](Criterion& c) { degenerate(c, sh); }},
        {"spectrum structure", [&](Criterion& c) { structure(c, sh); }},
        {"lambda = delta + pi deg", [&](Criterion& c) { formula(c, sh); }},
        {"support and divisor", [&](Criterion& c) { support(c, sh); }},
        {"Poisson kernel", [](Criterion& c) { poisson(c); }},
        {"determinism", [](Criterion& c) { determinism(c); }},
    };
    bool ok = true;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        Criterion c;
        c.id = static_cast<int>(i + 1);
        c.title = plan[i].first;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            plan[i].second(c);
        } catch (const std::exception& e) {
            c.error = e.what();
        }
        c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (const auto& ch : c.checks)
            std::printf("    [%s] %s: %s\n", ch.ok ? "ok" : "FAIL", ch.what.c_str(), ch.detail.c_str());
        if (!c.error.empty()) std::printf("    error: %s\n", c.error.c_str());
        std::printf("criterion %d (%s): %s  [%.1f s]\n", c.id, c.title.c_str(), c.passed() ? "PASS" : "FAIL", c.seconds);
        std::fflush(stdout);
        ok = ok && c.passed();
    }
    std::printf("acceptance: %s\n", ok ? "PASS" : "FAIL");
    return ok ? 0 : 1;
}
