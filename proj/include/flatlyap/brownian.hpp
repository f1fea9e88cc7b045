#pragma once

// Brownian motion with generator Delta/2 on the upper half-plane, tracked in a
// fundamental domain. The ordinate follows its exact law; the abscissa uses the
// geometric-mean ordinate over the step.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "flatlyap/errors.hpp"
#include "flatlyap/geometry.hpp"
#include "flatlyap/parallel.hpp"
#include "flatlyap/rng.hpp"
#include "flatlyap/stats.hpp"

namespace flatlyap {

struct PathConfig {
    double dt = 1e-2;
    double horizon = 1.0;
    int max_substep_refinements = 20;  ///< bisection depth when localizing a side crossing
    std::uint64_t rng_seed = 0;
    double cusp_y_cap = 50.0;          ///< cusp height above which steps are shortened
    bool track_displacement = true;    ///< evaluate the lifted position after every step

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("PathConfig: dt must be positive");
        if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw DomainError("PathConfig: horizon must be finite and >= 0");
        if (horizon > 0.0 && horizon < dt) throw DomainError("PathConfig: horizon must be >= dt");
        if (max_substep_refinements < 0) throw DomainError("PathConfig: max_substep_refinements must be >= 0");
        if (!(cusp_y_cap > 0.0)) throw DomainError("PathConfig: cusp_y_cap must be positive");
    }

    std::size_t n_steps() const { return static_cast<std::size_t>(std::llround(horizon / dt)); }
};

/// Side crossings allowed inside one (sub)step before the crossing is declared unresolvable.
inline constexpr int kMaxCrossingsPerStep = 64;
/// Deepest cusp step refinement, dt * 2^-20.
inline constexpr int kMaxCuspHalvings = 20;

struct TrajectorySummary {
    Word word;                        ///< deck element g_T with gamma(T) in g_T . D
    std::vector<double> crossing_times;
    HPoint start;
    HPoint endpoint;                  ///< reduced coordinates
    HPoint unreduced_endpoint;
    Mobius deck;                      ///< product of the word, accumulated along the path
    double elapsed = 0.0;
    double sup_displacement = 0.0;
    std::uint64_t steps = 0;          ///< substeps taken, including cusp refinements
};

/// One step of the sampler. noise = (xi1, xi2) standard normals.
inline HPoint brownian_step(HPoint p, double dt, std::pair<double, double> noise) noexcept {
    const double sdt = std::sqrt(dt);
    const double log_ratio = sdt * noise.second - 0.5 * dt;
    const double y_mean = p.y * std::exp(0.5 * log_ratio);
    return {p.x + y_mean * sdt * noise.first, p.y * std::exp(log_ratio)};
}

namespace detail {

struct Lift {
    Word* word;
    std::vector<double>* times;
    Mobius* deck;
};

/// Moves `to` back into the domain. The first side met along the step is found by
/// bisection in (x, log y), which fixes the crossing time; any further walls in the
/// same step are undone greedily, which terminates for a Dirichlet domain and yields
/// a word for the same deck element.
inline HPoint resolve_crossings(const SurfaceModel& s, HPoint from, HPoint to, double t0, double h, int refinements,
                                Lift lift) {
    int side = s.exit_side(to);
    if (side < 0) return to;
    const double lx0 = from.x, ly0 = std::log(from.y);
    const double dx = to.x - from.x, dly = std::log(to.y) - ly0;
    auto at = [&](double u) { return HPoint{lx0 + u * dx, std::exp(ly0 + u * dly)}; };
    double lo = 0.0, hi = 1.0;
    for (int r = 0; r < refinements; ++r) {
        const double mid = 0.5 * (lo + hi);
        if (s.exit_side(at(mid)) < 0) lo = mid;
        else hi = mid;
    }
    side = s.exit_side(at(hi));
    const double t_cross = t0 + hi * h;
    for (int crossings = 0; side >= 0; ++crossings) {
        if (crossings >= kMaxCrossingsPerStep)
            throw CrossingLocalizationError("sample_trajectory: crossing cap exceeded within one step");
        const Letter letter = s.sides[static_cast<std::size_t>(side)].letter;
        to = mobius_apply(s.letter_mobius(letter).inverse(), to);
        lift.word->push_back(letter);
        lift.times->push_back(t_cross);
        *lift.deck = *lift.deck * s.letter_mobius(letter);
        side = s.exit_side(to);
    }
    return to;
}

}  // namespace detail

/// Simulates one path from `start` (which must lie in the domain). The observer
/// is called after every substep as observer(t, reduced_point, deck).
template <class Observer>
TrajectorySummary sample_trajectory(const SurfaceModel& s, HPoint start, const PathConfig& cfg, RandomStream& rng,
                                    Observer&& observer) {
    cfg.validate();
    if (!start.valid() || s.exit_side(start) >= 0) throw DomainError("sample_trajectory: start is not inside the domain");
    TrajectorySummary out;
    out.start = start;
    HPoint p = start;
    const std::size_t n = cfg.n_steps();
    const bool cusped = s.has_cusps();
    double t = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double remaining = cfg.dt;
        while (remaining > 0.0) {
            double h = remaining;
            if (cusped) {
                const double height = s.cusp_height(p);
                if (height > cfg.cusp_y_cap) {
                    const int m = static_cast<int>(std::ceil(2.0 * std::log2(height / cfg.cusp_y_cap)));
                    if (m > kMaxCuspHalvings)
                        throw CuspTrap("sample_trajectory: cusp refinement below dt * 2^-20");
                    h = std::min(remaining, std::ldexp(cfg.dt, -m));
                }
            }
            const HPoint q = brownian_step(p, h, rng.normal_pair());
            p = detail::resolve_crossings(s, p, q, t, h, cfg.max_substep_refinements,
                                          {&out.word, &out.crossing_times, &out.deck});
            remaining -= h;
            if (remaining < 1e-15 * cfg.dt) remaining = 0.0;
            t = static_cast<double>(k) * cfg.dt + (cfg.dt - remaining);
            ++out.steps;
            if (cfg.track_displacement) {
                const HPoint lifted = out.word.empty() ? p : mobius_apply(out.deck, p);
                out.sup_displacement = std::max(out.sup_displacement, hyperbolic_distance(start, lifted));
            }
            observer(t, p, out.deck);
        }
    }
    out.endpoint = p;
    out.elapsed = static_cast<double>(n) * cfg.dt;
    out.unreduced_endpoint = out.word.empty() ? p : mobius_apply(out.deck, p);
    out.sup_displacement = std::max(out.sup_displacement, hyperbolic_distance(start, out.unreduced_endpoint));
    return out;
}

inline TrajectorySummary sample_trajectory(const SurfaceModel& s, HPoint start, const PathConfig& cfg, RandomStream& rng) {
    return sample_trajectory(s, start, cfg, rng, [](double, const HPoint&, const Mobius&) {});
}

// ---------------------------------------------------------------------------
// Ensembles

enum class StartPolicy { basepoint, uniform };

/// Trajectories indexed by ensemble position. A path lost to a cusp trap keeps its
/// slot (discarded[i] = true) so index-based batching stays aligned across reruns.
struct PathEnsemble {
    std::string purpose;
    PathConfig config;
    std::vector<TrajectorySummary> paths;
    std::vector<bool> discarded;
    std::size_t discard_count = 0;

    std::size_t size() const noexcept { return paths.size(); }
    double discard_fraction() const noexcept {
        return paths.empty() ? 0.0 : static_cast<double>(discard_count) / static_cast<double>(paths.size());
    }
};

inline unsigned default_workers() noexcept { return std::max(1u, std::thread::hardware_concurrency()); }

/// Trajectory i draws from stream (cfg.rng_seed, purpose, i); a uniform start
/// is drawn from the same stream before the path itself.
inline PathEnsemble sample_ensemble(const SurfaceModel& s, const PathConfig& cfg, std::size_t n_paths,
                                    const std::string& purpose, StartPolicy policy = StartPolicy::basepoint,
                                    unsigned workers = default_workers()) {
    cfg.validate();
    PathEnsemble e;
    e.purpose = purpose;
    e.config = cfg;
    e.paths.resize(n_paths);
    std::vector<char> lost(n_paths, 0);
    parallel_for(n_paths, workers, [&](std::size_t i) {
        RandomStream rng(cfg.rng_seed, purpose, i);
        const HPoint start = policy == StartPolicy::uniform ? sample_uniform(s, rng) : s.basepoint;
        try {
            e.paths[i] = sample_trajectory(s, start, cfg, rng);
        } catch (const CuspTrap&) {
            e.paths[i] = TrajectorySummary{};
            e.paths[i].start = start;
            lost[i] = 1;
        } catch (const Error& err) {
            throw Error(std::string(err.what()) + " (trajectory " + purpose + ":" + std::to_string(i) + ")");
        }
    });
    e.discarded.assign(n_paths, false);
    for (std::size_t i = 0; i < n_paths; ++i)
        if (lost[i]) {
            e.discarded[i] = true;
            ++e.discard_count;
        }
    return e;
}

// ---------------------------------------------------------------------------
// Validation statistics

/// Scalar test function together with its hyperbolic Laplacian y^2 (f_xx + f_yy).
struct TestFunction {
    std::string name;
    std::function<double(HPoint)> f;
    std::function<double(HPoint)> laplacian;
};

/// Gaussian bump around i, the harmonic coordinate x, and log y (Laplacian -1).
inline std::vector<TestFunction> standard_test_functions() {
    return {
        {"gaussian_bump",
         [](HPoint p) { return std::exp(-(p.x * p.x + (p.y - 1.0) * (p.y - 1.0)) / 0.5); },
         [](HPoint p) {
             const double r2 = p.x * p.x + (p.y - 1.0) * (p.y - 1.0);
             // Euclidean Laplacian of exp(-r^2 / s) is (4 r^2 / s^2 - 4 / s) exp(-r^2 / s)
             return p.y * p.y * (16.0 * r2 - 8.0) * std::exp(-r2 / 0.5);
         }},
        {"abscissa", [](HPoint p) { return p.x; }, [](HPoint) { return 0.0; }},
        {"log_height", [](HPoint p) { return std::log(p.y); }, [](HPoint) { return -1.0; }},
    };
}

/// E[f(gamma_t)] - f(x) - 1/2 E[int_0^t Lap f(gamma_s) ds] on the plane, one
/// estimate per test function, all driven by the same paths. The time integral
/// uses the trapezoid rule on the step grid.
inline std::vector<MeanStderr> dynkin_residuals(const std::vector<TestFunction>& fns, HPoint start, double t,
                                                std::size_t n_paths, std::uint64_t seed, double dt = 1e-3,
                                                unsigned workers = default_workers()) {
    PathConfig cfg;
    cfg.dt = dt;
    cfg.horizon = t;
    cfg.rng_seed = seed;
    cfg.track_displacement = false;
    cfg.validate();
    const SurfaceModel plane = free_plane();
    const std::size_t m = fns.size();
    std::vector<double> values(n_paths * m, 0.0);
    parallel_for(n_paths, workers, [&](std::size_t i) {
        RandomStream rng(seed, "dynkin", i);
        std::vector<double> integral(m, 0.0), prev(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) prev[j] = fns[j].laplacian(start);
        double t_prev = 0.0;
        const TrajectorySummary path = sample_trajectory(plane, start, cfg, rng, [&](double now, const HPoint& p, const Mobius&) {
            for (std::size_t j = 0; j < m; ++j) {
                const double lap = fns[j].laplacian(p);
                integral[j] += 0.5 * (prev[j] + lap) * (now - t_prev);
                prev[j] = lap;
            }
            t_prev = now;
        });
        for (std::size_t j = 0; j < m; ++j)
            values[j * n_paths + i] = fns[j].f(path.endpoint) - fns[j].f(start) - 0.5 * integral[j];
    });
    std::vector<MeanStderr> out;
    for (std::size_t j = 0; j < m; ++j)
        out.push_back(mean_stderr(std::span<const double>(values).subspan(j * n_paths, n_paths)));
    return out;
}

inline MeanStderr dynkin_residual(const TestFunction& fn, HPoint start, double t, std::size_t n_paths, std::uint64_t seed,
                                  double dt = 1e-3, unsigned workers = default_workers()) {
    return dynkin_residuals({fn}, start, t, n_paths, seed, dt, workers).front();
}

/// Per-path d(start, gamma_T) / T on the plane.
inline std::vector<double> escape_samples(const PathConfig& cfg, std::size_t n_paths, HPoint start,
                                          unsigned workers = default_workers()) {
    PathConfig c = cfg;
    c.track_displacement = false;
    c.validate();
    const SurfaceModel plane = free_plane();
    std::vector<double> out(n_paths);
    parallel_for(n_paths, workers, [&](std::size_t i) {
        RandomStream rng(c.rng_seed, "escape", i);
        const TrajectorySummary p = sample_trajectory(plane, start, c, rng);
        out[i] = hyperbolic_distance(start, p.unreduced_endpoint) / p.elapsed;
    });
    return out;
}

/// Linear escape rate d(start, gamma_T)/T with a batch-means interval. Requires T >= 50.
inline BatchEstimate escape_rate(const PathConfig& cfg, std::size_t n_paths, HPoint start = {0.0, 1.0},
                                 std::size_t n_batches = 20, unsigned workers = default_workers()) {
    if (cfg.horizon < 50.0) throw DomainError("escape_rate: horizon must be >= 50");
    const auto samples = escape_samples(cfg, n_paths, start, workers);
    return batch_means(samples, n_batches);
}

struct SupTail {
    double t0 = 0.0;
    double envelope_constant = 0.0;
    std::vector<double> r;
    std::vector<double> probability;  ///< empirical P(sup_{t <= t0} d(x, gamma_t) >= r)
    std::vector<double> envelope;     ///< sqrt(2) exp(-r^2 / (4 t0) + C)
    std::vector<std::size_t> counts;
};

/// Empirical displacement tail on a grid of radii, all radii sharing the same paths.
inline SupTail sup_tail(const PathConfig& cfg, const std::vector<double>& radii, double t0, std::size_t n_paths,
                        double envelope_constant = 0.0, unsigned workers = default_workers()) {
    for (double r : radii)
        if (r < 0.0) throw DomainError("sup_tail: radii must be >= 0");
    PathConfig c = cfg;
    c.horizon = t0;
    c.track_displacement = true;
    c.validate();
    std::vector<double> sup(n_paths);
    const SurfaceModel plane = free_plane();
    parallel_for(n_paths, workers, [&](std::size_t i) {
        RandomStream rng(c.rng_seed, "sup_tail", i);
        sup[i] = sample_trajectory(plane, plane.basepoint, c, rng).sup_displacement;
    });
    SupTail out;
    out.t0 = t0;
    out.envelope_constant = envelope_constant;
    out.r = radii;
    for (double r : radii) {
        std::size_t hits = 0;
        if (r <= 0.0) hits = n_paths;
        else
            for (double v : sup) hits += v >= r ? 1 : 0;
        out.counts.push_back(hits);
        out.probability.push_back(static_cast<double>(hits) / static_cast<double>(n_paths));
        out.envelope.push_back(std::sqrt(2.0) * std::exp(-r * r / (4.0 * t0) + envelope_constant));
    }
    return out;
}

/// Least-squares slope of log P against r^2 over grid points with r in [r_min, r_max]
/// and at least `min_count` exceedances.
inline double sup_tail_slope(const SupTail& tail, double r_min, double r_max, std::size_t min_count = 20) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < tail.r.size(); ++i) {
        if (tail.r[i] < r_min || tail.r[i] > r_max || tail.counts[i] < min_count) continue;
        xs.push_back(tail.r[i] * tail.r[i]);
        ys.push_back(std::log(tail.probability[i]));
    }
    if (xs.size() < 2) throw DomainError("sup_tail_slope: fewer than two usable grid points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace flatlyap
