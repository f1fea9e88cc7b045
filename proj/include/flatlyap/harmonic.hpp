#pragma once

// Harmonic fiber measures of the projectivized cocycle, the drift formula for
// lambda(nu), dynamical degree reports and the complex-hyperbolic Poisson kernel.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flatlyap/brownian.hpp"
#include "flatlyap/cocycle.hpp"
#include "flatlyap/errors.hpp"
#include "flatlyap/grassmann.hpp"
#include "flatlyap/linalg.hpp"
#include "flatlyap/lyapunov.hpp"
#include "flatlyap/parallel.hpp"
#include "flatlyap/rng.hpp"
#include "flatlyap/stats.hpp"

namespace flatlyap {

// ---------------------------------------------------------------------------
// Projective helpers

/// Chordal distance sqrt(1 - |<u, v>|^2) between unit representatives.
inline double chordal_distance(const CVector& u, const CVector& v) {
    const double c = std::abs(u.dot(v));
    return std::sqrt(std::max(0.0, 1.0 - c * c));
}

/// Distance of [u] from the real points of projective space: sqrt(1 - |u^T u|^2).
/// For n = 2 this is 2 |Im(u_1 conj(u_2))|.
inline double real_deviation(const CVector& u) {
    const double c = std::abs((u.transpose() * u)(0, 0));
    return std::sqrt(std::max(0.0, 1.0 - c * c));
}

/// Energy distance 2 E d(X, Y) - E d(X, X') - E d(Y, Y') under the chordal metric.
/// Zero iff the two laws agree; two independent samples of size n from one law
/// give values of order 1/n.
inline double energy_distance(const std::vector<CVector>& a, const std::vector<CVector>& b) {
    if (a.empty() || b.empty()) throw DomainError("energy_distance: empty sample");
    auto mean_cross = [](const std::vector<CVector>& p, const std::vector<CVector>& q) {
        double s = 0.0;
        for (const auto& u : p)
            for (const auto& v : q) s += chordal_distance(u, v);
        return s / (static_cast<double>(p.size()) * static_cast<double>(q.size()));
    };
    return 2.0 * mean_cross(a, b) - mean_cross(a, a) - mean_cross(b, b);
}

/// Uniform point of the unit sphere in C^m, i.e. a Fubini-Study uniform projective point.
inline CVector random_unit_vector(int m, RandomStream& rng) {
    CVector v(m);
    for (int i = 0; i < m; ++i) {
        const auto [a, b] = rng.normal_pair();
        v(i) = Complex(a, b);
    }
    return v / v.norm();
}

// ---------------------------------------------------------------------------
// Fiber measures

struct FiberConfig {
    PathConfig path;                  ///< horizon T; the nested horizon is T / 2
    double discrepancy_threshold = 0.02;
    unsigned workers = default_workers();
};

struct FiberSample {
    std::vector<CVector> points;       ///< unit representatives in C^{C(n,k)} at horizon T
    std::vector<CVector> half_points;  ///< same paths at horizon T / 2
    std::vector<double> weights;
    std::vector<HPoint> base;          ///< lifted point whose fiber holds each sample point
    std::vector<std::size_t> path_index;
    CVector v0;
    int k = 1;
    double horizon = 0.0;
    std::size_t n_paths = 0;
    std::size_t discarded = 0;
    std::string fiber_id;              ///< "uniform" or "x,y" for a fixed start
    double discrepancy = 0.0;          ///< energy distance between the two horizons
    double discrepancy_threshold = 0.0;
    bool converged = false;

    std::size_t size() const noexcept { return points.size(); }
};

namespace detail {

inline Representation fiber_rep(const Representation& rep, int k) {
    if (k < 1 || k > rep.n) throw DomainError("fiber measure: k must lie in [1, n]");
    if (binomial(static_cast<std::size_t>(rep.n), static_cast<std::size_t>(k)) > kExteriorDimensionCap)
        throw ResourceLimit("fiber measure: exterior power exceeds the dimension cap");
    return k == 1 ? rep : exterior_power_rep(rep, k);
}

inline CVector apply_normalized(const CocycleProduct& p, const CVector& v) {
    CVector w = p.unit_matrix * v;
    const double nrm = w.norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw NumericalDegeneracy("fiber measure: transported vector vanished");
    return w / nrm;
}

inline FiberSample sample_fiber(const Representation& rep, const SurfaceModel& surface, const FiberConfig& cfg,
                                std::size_t n_paths, int k, std::optional<HPoint> fixed_start) {
    cfg.path.validate();
    if (rep.generator_count() != surface.generator_count())
        throw DomainError("sample_fiber_measure: representation and surface have different generator counts");
    const Representation ext = fiber_rep(rep, k);
    RandomStream v0_rng(cfg.path.rng_seed, "fiber_v0", 0);
    const CVector v0 = random_unit_vector(ext.n, v0_rng);

    Word prefix;
    HPoint start{};
    if (fixed_start) {
        const Reduction r = reduce_to_domain(surface, *fixed_start);
        prefix = r.word;
        start = r.point;
    }

    std::vector<CVector> full(n_paths), half(n_paths);
    std::vector<HPoint> base(n_paths);
    std::vector<char> lost(n_paths, 0);
    PathConfig pc = cfg.path;
    pc.track_displacement = false;
    parallel_for(n_paths, cfg.workers, [&](std::size_t i) {
        RandomStream rng(pc.rng_seed, "fiber", i);
        const HPoint s = fixed_start ? start : sample_uniform(surface, rng);
        TrajectorySummary path;
        try {
            path = sample_trajectory(surface, s, pc, rng);
        } catch (const CuspTrap&) {
            lost[i] = 1;
            return;
        } catch (const Error& err) {
            throw Error(std::string(err.what()) + " (trajectory fiber:" + std::to_string(i) + ")");
        }
        const std::span<const Letter> word(path.word);
        const std::size_t mid = word_index_at(path, 0.5 * path.elapsed);
        CocycleProduct p = transport(ext, prefix);
        extend(p, ext, word.first(mid));
        half[i] = apply_normalized(p, v0);
        extend(p, ext, word.subspan(mid));
        full[i] = apply_normalized(p, v0);
        base[i] = fixed_start ? *fixed_start : s;
    });

    FiberSample out;
    out.v0 = v0;
    out.k = k;
    out.horizon = cfg.path.horizon;
    out.n_paths = n_paths;
    out.fiber_id = fixed_start ? std::to_string(fixed_start->x) + "," + std::to_string(fixed_start->y) : "uniform";
    for (std::size_t i = 0; i < n_paths; ++i) {
        if (lost[i]) {
            ++out.discarded;
            continue;
        }
        out.points.push_back(std::move(full[i]));
        out.half_points.push_back(std::move(half[i]));
        out.base.push_back(base[i]);
        out.path_index.push_back(i);
    }
    if (out.points.empty()) throw Error("sample_fiber_measure: every trajectory was discarded");
    out.weights.assign(out.points.size(), 1.0 / static_cast<double>(out.points.size()));
    out.discrepancy = energy_distance(out.points, out.half_points);
    out.discrepancy_threshold = cfg.discrepancy_threshold;
    out.converged = out.discrepancy <= cfg.discrepancy_threshold;
    return out;
}

}  // namespace detail

/// Empirical fiber measure: path i starts at a uniform point x_i of the domain and
/// contributes [rho_k(g_T) v0] in the fiber over x_i, where g_T is its deck word and
/// rho_k the k-th exterior power. Nested horizons T/2 and T are compared by energy
/// distance; exceeding the threshold clears `converged` but is not an error.
inline FiberSample sample_fiber_measure(const Representation& rep, const SurfaceModel& surface, const FiberConfig& cfg,
                                        std::size_t n_paths, int k = 1) {
    return detail::sample_fiber(rep, surface, cfg, n_paths, k, std::nullopt);
}

/// Same sampler with every path started at one lifted point (which may lie
/// outside the domain; the reduction word is prepended to each deck word).
inline FiberSample sample_fiber_measure_at(const Representation& rep, const SurfaceModel& surface, const FiberConfig& cfg,
                                           std::size_t n_paths, int k, HPoint start) {
    return detail::sample_fiber(rep, surface, cfg, n_paths, k, start);
}

/// Largest fraction of sample points inside a chordal ball of radius r centred at a sample point.
inline double max_cluster_mass(const FiberSample& s, double r) {
    if (s.points.empty()) throw DomainError("max_cluster_mass: empty sample");
    double best = 0.0;
    for (const auto& c : s.points) {
        double mass = 0.0;
        for (std::size_t j = 0; j < s.points.size(); ++j)
            if (chordal_distance(c, s.points[j]) <= r) mass += s.weights[j];
        best = std::max(best, mass);
    }
    return best;
}

/// Mass of a chordal ball of radius r under the uniform measure on P(C^m): r^(2(m-1)).
inline double uniform_cluster_baseline(int m, double r) { return std::pow(r * r, m - 1); }

inline double mean_real_deviation(const std::vector<CVector>& pts) {
    if (pts.empty()) throw DomainError("mean_real_deviation: empty sample");
    double s = 0.0;
    for (const auto& u : pts) s += real_deviation(u);
    return s / static_cast<double>(pts.size());
}

/// Per-point v0 sensitivity: energy distance between two samples differing only in v0.
inline double v0_sensitivity(const FiberSample& a, const FiberSample& b) { return energy_distance(a.points, b.points); }

// ---------------------------------------------------------------------------
// Support versus divisor

/// Divisor over each fiber; constant fields ignore the base point.
using DivisorField = std::function<DivisorForm(const HPoint&)>;

inline DivisorField constant_divisor(DivisorForm d) {
    return [d = std::move(d)](const HPoint&) { return d; };
}

struct GapReport {
    double min_distance = 0.0;
    std::size_t argmin = 0;
    std::vector<double> distances;     ///< per sample point
    std::vector<double> eps_grid;
    std::vector<double> fraction_below;
    std::vector<double> histogram_edges;
    std::vector<std::size_t> histogram;
};

inline std::vector<double> default_eps_grid() { return {1e-4, 1e-3, 1e-2, 3e-2, 1e-1, 3e-1}; }

inline GapReport support_divisor_gap(const FiberSample& sample, const DivisorField& field,
                                     std::vector<double> eps_grid = default_eps_grid(), std::size_t n_bins = 20) {
    if (sample.points.empty()) throw DomainError("support_divisor_gap: empty sample");
    GapReport out;
    out.distances.reserve(sample.size());
    out.min_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double d = divisor_distance(PluckerVector{sample.points[i]}, field(sample.base[i]));
        out.distances.push_back(d);
        if (d < out.min_distance) {
            out.min_distance = d;
            out.argmin = i;
        }
    }
    std::sort(eps_grid.begin(), eps_grid.end());
    out.eps_grid = eps_grid;
    for (double e : eps_grid) {
        double f = 0.0;
        for (std::size_t i = 0; i < sample.size(); ++i)
            if (out.distances[i] < e) f += sample.weights[i];
        out.fraction_below.push_back(f);
    }
    out.histogram.assign(n_bins, 0);
    for (std::size_t b = 0; b <= n_bins; ++b) out.histogram_edges.push_back(static_cast<double>(b) / static_cast<double>(n_bins));
    for (double d : out.distances)
        ++out.histogram[std::min(n_bins - 1, static_cast<std::size_t>(d * static_cast<double>(n_bins)))];
    return out;
}

inline GapReport support_divisor_gap(const FiberSample& sample, const DivisorForm& d,
                                     std::vector<double> eps_grid = default_eps_grid(), std::size_t n_bins = 20) {
    return support_divisor_gap(sample, constant_divisor(d), std::move(eps_grid), n_bins);
}

// ---------------------------------------------------------------------------
// Drift estimator

struct ProbeConfig {
    double probe_dt = 1.0;
    std::size_t n_probes = 4;
    double dt = 1e-2;
    std::uint64_t seed = 0;
    std::size_t n_batches = 20;
    unsigned workers = default_workers();
};

/// Mean over the sample of E[log ||rho_k(g_t)^-1 u||] / t, with g_t the deck word of a
/// Brownian probe of length t started at the point's fiber. Under the harmonic
/// measure this equals lambda(nu) for every t. Probe j of point i uses stream
/// (seed, "probe", i * n_probes + j). The interval is from batch means over points.
inline BatchEstimate lambda_from_measure(const Representation& rep, const SurfaceModel& surface, const FiberSample& sample,
                                         const ProbeConfig& pc) {
    if (sample.points.empty()) throw DomainError("lambda_from_measure: empty sample");
    if (pc.n_probes == 0) throw DomainError("lambda_from_measure: n_probes must be positive");
    const Representation ext = detail::fiber_rep(rep, sample.k);
    if (ext.n != sample.points.front().size()) throw DomainError("lambda_from_measure: sample dimension does not match rep");
    PathConfig cfg;
    cfg.dt = pc.dt;
    cfg.horizon = pc.probe_dt;
    cfg.rng_seed = pc.seed;
    cfg.track_displacement = false;
    cfg.validate();
    std::vector<double> per_point(sample.size(), 0.0);
    std::vector<char> lost(sample.size(), 0);
    parallel_for(sample.size(), pc.workers, [&](std::size_t i) {
        // rho(g)^-1 u for a word g = l_1 ... l_m, one letter at a time; returns the log growth.
        auto apply_inverse = [&](const Letter& l, CVector& u) {
            u = ext.matrix(l.inverted()) * u;
            const double nrm = u.norm();
            if (!(nrm > 0.0) || !std::isfinite(nrm)) throw NumericalDegeneracy("lambda_from_measure: probe vector vanished");
            u /= nrm;
            return std::log(nrm);
        };
        // A lifted base point is first moved into the domain together with its fiber.
        const Reduction start = reduce_to_domain(surface, sample.base[i]);
        CVector start_vector = sample.points[i];
        for (const Letter& l : start.word) apply_inverse(l, start_vector);
        double acc = 0.0;
        std::size_t used = 0;
        for (std::size_t j = 0; j < pc.n_probes; ++j) {
            RandomStream rng(pc.seed, "probe", i * pc.n_probes + j);
            TrajectorySummary path;
            try {
                path = sample_trajectory(surface, start.point, cfg, rng);
            } catch (const CuspTrap&) {
                continue;
            }
            CVector u = start_vector;
            double log_norm = 0.0;
            for (const Letter& l : path.word) log_norm += apply_inverse(l, u);
            acc += log_norm / path.elapsed;
            ++used;
        }
        if (used == 0) lost[i] = 1;
        else per_point[i] = acc / static_cast<double>(used);
    });
    std::vector<double> kept;
    for (std::size_t i = 0; i < sample.size(); ++i)
        if (!lost[i]) kept.push_back(per_point[i]);
    return batch_means(kept, pc.n_batches);
}

// ---------------------------------------------------------------------------
// Degree reports

/// Exact rational p/q with q > 0.
struct Rational {
    long long num = 0;
    long long den = 1;

    double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
    std::string str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }

    /// Parses "p" or "p/q".
    static Rational parse(std::string_view s) {
        Rational r;
        const auto slash = s.find('/');
        auto read = [&](std::string_view t, long long& out) {
            while (!t.empty() && t.front() == ' ') t.remove_prefix(1);
            while (!t.empty() && t.back() == ' ') t.remove_suffix(1);
            if (!t.empty() && t.front() == '+') t.remove_prefix(1);
            const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
            if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
                throw DomainError("Rational: cannot parse '" + std::string(s) + "'");
        };
        read(s.substr(0, slash), r.num);
        if (slash != std::string_view::npos) read(s.substr(slash + 1), r.den);
        if (r.den == 0) throw DomainError("Rational: zero denominator");
        if (r.den < 0) {
            r.num = -r.num;
            r.den = -r.den;
        }
        return r;
    }
};

/// Subbundle data for a degree report: the divisor of F over each fiber and the
/// Chern number of F (the integral of c_1). The volume-normalized degree is the
/// Chern number divided by the area of the surface.
struct SubbundleData {
    DivisorField divisor;
    Rational chern_number;
    std::string label;
};

enum class Verdict { equality_plausible, strict_inequality, inconclusive };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::equality_plausible: return "equality-plausible";
        case Verdict::strict_inequality: return "strict-inequality";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

struct DegreeReport {
    std::string label;
    int k = 1;
    double lambda_sum = 0.0;   ///< lambda_1 + ... + lambda_k
    double lambda_sum_ci = 0.0;
    Rational chern_number;
    double degree = 0.0;       ///< chern_number / area
    double pi_deg = 0.0;
    double delta = 0.0;        ///< lambda_sum - pi_deg
    double margin = 0.0;       ///< same number, read as the inequality margin
    double support_gap = 0.0;
    double gap_threshold = 0.0;
    bool support_misses_divisor = false;
    Verdict verdict = Verdict::inconclusive;
    std::vector<std::string> warnings;
};

struct DegreeConfig {
    double gap_threshold = 1e-3;   ///< support gap above this counts as missing the divisor
    double strict_sigma = 3.0;     ///< delta above strict_sigma * CI is a strict inequality
};

/// Verdict rules, with c the 95% half-width of lambda_sum:
///   |delta| <= c            equality-plausible
///   delta > strict_sigma c  strict-inequality
///   otherwise               inconclusive (delta < -c also warns that the inequality failed)
/// The support gap is judged separately and a warning is raised when it disagrees.
inline DegreeReport assemble_degree_report(const std::string& label, int k, double lambda_sum, double lambda_sum_ci,
                                           Rational chern, double area, double support_gap, const DegreeConfig& dc = {}) {
    if (!(area > 0.0) || !std::isfinite(area))
        throw DomainError("degree_report: the volume-normalized degree needs a finite area");
    DegreeReport r;
    r.label = label;
    r.k = k;
    r.lambda_sum = lambda_sum;
    r.lambda_sum_ci = lambda_sum_ci;
    r.chern_number = chern;
    r.degree = chern.value() / area;
    r.pi_deg = std::numbers::pi * r.degree;
    r.delta = lambda_sum - r.pi_deg;
    r.margin = r.delta;
    r.support_gap = support_gap;
    r.gap_threshold = dc.gap_threshold;
    r.support_misses_divisor = support_gap > dc.gap_threshold;
    if (std::abs(r.delta) <= lambda_sum_ci) r.verdict = Verdict::equality_plausible;
    else if (r.delta > dc.strict_sigma * lambda_sum_ci) r.verdict = Verdict::strict_inequality;
    else r.verdict = Verdict::inconclusive;
    if (r.delta < -lambda_sum_ci) r.warnings.push_back("inequality lambda_sum >= pi*deg violated beyond the interval");
    if (r.verdict == Verdict::equality_plausible && !r.support_misses_divisor)
        r.warnings.push_back("inconsistent: delta is compatible with 0 but the support meets the divisor");
    if (r.verdict == Verdict::strict_inequality && r.support_misses_divisor)
        r.warnings.push_back("inconsistent: delta is positive but the sampled support misses the divisor");
    return r;
}

/// Full report: partial sum of the spectrum on the given paths, the fiber sample's
/// gap to the divisor, and delta = lambda_sum - pi * deg.
inline DegreeReport degree_report(const Representation& rep, const SurfaceModel& surface, const SpectrumConfig& cfg,
                                  const PathEnsemble& paths, const FiberSample& sample, const SubbundleData& f, int k,
                                  const DegreeConfig& dc = {}) {
    if (k < 1 || k > rep.n) throw DomainError("degree_report: k must lie in [1, n]");
    if (sample.k != k) throw DomainError("degree_report: fiber sample was drawn for a different k");
    const SpectrumEstimate spec = estimate_spectrum(rep, paths, cfg);
    std::vector<double> sums(spec.per_path.size());
    for (std::size_t i = 0; i < sums.size(); ++i) sums[i] = spec.per_path[i].head(k).sum();
    const BatchEstimate s = batch_means(sums, cfg.n_batches);
    const GapReport gap = support_divisor_gap(sample, f.divisor);
    return assemble_degree_report(f.label, k, s.mean, s.ci, f.chern_number, surface.area, gap.min_distance, dc);
}

// ---------------------------------------------------------------------------
// Complex-hyperbolic Poisson kernel

/// P(z, u) = (1 - |z|^2)^n / |1 - <z, u>|^(2n) on the unit ball of C^n, <z, u> = sum z_i conj(u_i).
inline double poisson_kernel(const CVector& z, const CVector& u) {
    if (z.size() != u.size() || z.size() == 0) throw DomainError("poisson_kernel: dimension mismatch");
    const double r2 = z.squaredNorm();
    if (!(r2 < 1.0)) throw DomainError("poisson_kernel: z must lie in the open unit ball");
    if (std::abs(u.norm() - 1.0) > 1e-9) throw DomainError("poisson_kernel: u must lie on the unit sphere");
    const auto n = static_cast<double>(z.size());
    const double denom = std::abs(Complex(1.0) - u.dot(z));
    return std::pow(1.0 - r2, n) / std::pow(denom, 2.0 * n);
}

/// Monte Carlo integral of P(z, .) against the normalized sphere measure.
inline MeanStderr poisson_normalization(const CVector& z, std::size_t n_samples, std::uint64_t seed) {
    std::vector<double> v(n_samples);
    RandomStream rng(seed, "poisson", 0);
    for (auto& x : v) x = poisson_kernel(z, random_unit_vector(static_cast<int>(z.size()), rng));
    return mean_stderr(v);
}

struct PluriharmonicResidual {
    double laplace_beltrami_residual = 0.0;  ///< |Delta_B P(., u)(z)|
    double levi_form_norm = 0.0;             ///< Frobenius norm of (d^2 P / dz_j dconj(z_k))
    bool accuracy_warning = false;
};

namespace detail {

/// Complex Hessian H_jk = d^2 f / dz_j dconj(z_k) from central differences in the
/// real coordinates, Richardson-extrapolated over steps h and h/2.
template <class F>
CMatrix complex_hessian(const F& f, const CVector& z, double h) {
    const auto n = z.size();
    const Eigen::Index m = 2 * n;
    auto at = [&](const Eigen::VectorXd& x) {
        CVector w(n);
        for (Eigen::Index j = 0; j < n; ++j) w(j) = Complex(x(2 * j), x(2 * j + 1));
        return f(w);
    };
    Eigen::VectorXd x0(m);
    for (Eigen::Index j = 0; j < n; ++j) {
        x0(2 * j) = z(j).real();
        x0(2 * j + 1) = z(j).imag();
    }
    auto real_hessian = [&](double s) {
        Eigen::MatrixXd r(m, m);
        const double f0 = at(x0);
        for (Eigen::Index a = 0; a < m; ++a) {
            Eigen::VectorXd xp = x0, xm = x0;
            xp(a) += s;
            xm(a) -= s;
            r(a, a) = (at(xp) - 2.0 * f0 + at(xm)) / (s * s);
            for (Eigen::Index b = a + 1; b < m; ++b) {
                Eigen::VectorXd pp = x0, pm = x0, mp = x0, mm = x0;
                pp(a) += s; pp(b) += s;
                pm(a) += s; pm(b) -= s;
                mp(a) -= s; mp(b) += s;
                mm(a) -= s; mm(b) -= s;
                r(a, b) = r(b, a) = (at(pp) - at(pm) - at(mp) + at(mm)) / (4.0 * s * s);
            }
        }
        return r;
    };
    const Eigen::MatrixXd r = (4.0 * real_hessian(0.5 * h) - real_hessian(h)) / 3.0;
    CMatrix hc(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) {
            const double xx = r(2 * j, 2 * k), yy = r(2 * j + 1, 2 * k + 1);
            const double xy = r(2 * j, 2 * k + 1), yx = r(2 * j + 1, 2 * k);
            hc(j, k) = 0.25 * Complex(xx + yy, xy - yx);
        }
    return hc;
}

}  // namespace detail

/// Bergman Laplace-Beltrami 4 (1 - |z|^2) sum_jk (delta_jk - z_j conj(z_k)) H_jk of P(., u)
/// and the norm of its complex Hessian. The warning is set when fd_step exceeds 5% of
/// the distance from z to the sphere.
inline PluriharmonicResidual pluriharmonicity_residual(const CVector& z, const CVector& u, double fd_step) {
    if (!(fd_step > 0.0) || fd_step > 1e-2) throw DomainError("pluriharmonicity_residual: fd_step must lie in (0, 1e-2]");
    const double r2 = z.squaredNorm();
    if (!(r2 < 1.0)) throw DomainError("pluriharmonicity_residual: z must lie in the open unit ball");
    auto p = [&](const CVector& w) { return poisson_kernel(w, u); };
    const CMatrix h = detail::complex_hessian(p, z, fd_step);
    const Eigen::Index n = z.size();
    const CMatrix metric = CMatrix::Identity(n, n) - z * z.adjoint();
    Complex lap = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) lap += metric(j, k) * h(j, k);
    PluriharmonicResidual out;
    out.laplace_beltrami_residual = 4.0 * (1.0 - r2) * std::abs(lap);
    out.levi_form_norm = h.norm();
    const double dist = 1.0 - std::sqrt(r2);
    if (fd_step > 0.05 * dist) out.accuracy_warning = true;
    return out;
}

}  // namespace flatlyap
