#pragma once

// Lyapunov spectrum along Brownian deck words: top exponent from product norms,
// full spectrum from QR-renormalized frames, both with batch-means intervals.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "flatlyap/brownian.hpp"
#include "flatlyap/cocycle.hpp"
#include "flatlyap/errors.hpp"
#include "flatlyap/linalg.hpp"
#include "flatlyap/parallel.hpp"
#include "flatlyap/stats.hpp"

namespace flatlyap {

struct SpectrumConfig {
    PathConfig path;
    std::size_t n_batches = 20;
    int renorm_interval = 16;
    double burn_in_fraction = 0.1;
    double discard_warn_fraction = 0.01;
    double discard_fail_fraction = 0.10;
    unsigned workers = default_workers();

    void validate() const {
        path.validate();
        if (renorm_interval < 1) throw DomainError("SpectrumConfig: renorm_interval must be >= 1");
        if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) throw DomainError("SpectrumConfig: burn_in_fraction must lie in [0, 1)");
        if (n_batches < 2) throw DomainError("SpectrumConfig: n_batches must be >= 2");
    }
};

/// Paths used by every spectral estimator: basepoint starts, purpose "spectrum".
inline PathEnsemble spectrum_paths(const SurfaceModel& surface, const SpectrumConfig& cfg, std::size_t n_paths) {
    cfg.validate();
    PathConfig pc = cfg.path;
    pc.track_displacement = false;
    PathEnsemble e = sample_ensemble(surface, pc, n_paths, "spectrum", StartPolicy::basepoint, cfg.workers);
    if (e.discard_fraction() > cfg.discard_fail_fraction)
        throw Error("spectrum: " + std::to_string(e.discard_count) + " of " + std::to_string(n_paths) +
                    " trajectories lost to cusp traps (above the hard limit)");
    return e;
}

/// Index of the first letter recorded at or after time t.
inline std::size_t word_index_at(const TrajectorySummary& path, double t) {
    return static_cast<std::size_t>(std::lower_bound(path.crossing_times.begin(), path.crossing_times.end(), t) -
                                    path.crossing_times.begin());
}

struct TopEstimate {
    BatchEstimate estimate;
    std::vector<double> per_path;  ///< kept paths only, in index order
    std::size_t discarded = 0;
    bool discard_warning = false;
};

/// Per-path (log ||P_T|| - log ||P_{T_b}||) / (T - T_b), with P_t the transport
/// along the word recorded up to time t and T_b the end of burn-in.
inline double path_top_rate(const Representation& rep, const TrajectorySummary& path, double burn_in_fraction) {
    const double tb = burn_in_fraction * path.elapsed;
    const std::size_t burn = word_index_at(path, tb);
    const std::span<const Letter> word(path.word);
    CocycleProduct p = transport(rep, word.first(burn));
    const double at_burn = cocycle_norm_log(p);
    extend(p, rep, word.subspan(burn));
    return (cocycle_norm_log(p) - at_burn) / (path.elapsed - tb);
}

inline TopEstimate estimate_top(const Representation& rep, const PathEnsemble& paths, const SpectrumConfig& cfg) {
    TopEstimate out;
    std::vector<double> rates(paths.size(), 0.0);
    parallel_for(paths.size(), cfg.workers, [&](std::size_t i) {
        if (!paths.discarded[i]) rates[i] = path_top_rate(rep, paths.paths[i], cfg.burn_in_fraction);
    });
    for (std::size_t i = 0; i < paths.size(); ++i)
        if (!paths.discarded[i]) out.per_path.push_back(rates[i]);
    out.discarded = paths.discard_count;
    out.discard_warning = paths.discard_fraction() > cfg.discard_warn_fraction;
    out.estimate = batch_means(out.per_path, cfg.n_batches);
    return out;
}

inline TopEstimate estimate_top(const Representation& rep, const SurfaceModel& surface, const SpectrumConfig& cfg,
                                std::size_t n_paths) {
    return estimate_top(rep, spectrum_paths(surface, cfg, n_paths), cfg);
}

// ---------------------------------------------------------------------------
// QR frames

/// Orthonormal frame propagated by adjoint generators; log_diag accumulates the
/// logarithms of the R diagonals after burn-in.
struct FrameState {
    CMatrix frame;
    Eigen::VectorXd log_diag;
    long steps = 0;
    int renorm_interval = 16;
};

/// Replaces frame by Q with R having a positive diagonal; returns log R_ii.
inline Eigen::VectorXd renormalize(FrameState& st) {
    const Eigen::Index n = st.frame.cols();
    Eigen::HouseholderQR<CMatrix> qr(st.frame);
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    CMatrix q = qr.householderQ() * CMatrix::Identity(st.frame.rows(), n);
    Eigen::VectorXd logs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mag = std::abs(r(i, i));
        if (!(mag > 1e-300) || !std::isfinite(mag)) throw DeflationError("QR frame lost rank", st.steps);
        q.col(i) *= r(i, i) / mag;  // absorb the phase so the diagonal is positive
        logs(i) = std::log(mag);
    }
    st.frame = std::move(q);
    return logs;
}

/// Deterministic generic unitary starting frame for path `index`.
inline CMatrix initial_frame(int n, std::uint64_t seed, std::uint64_t index) {
    RandomStream rng(seed, "frame", index);
    CMatrix g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const auto [a, b] = rng.normal_pair();
            g(i, j) = Complex(a, b);
        }
    FrameState st{g, Eigen::VectorXd::Zero(n), 0, 16};
    renormalize(st);
    return st.frame;
}

/// Per-path exponents in frame order. The singular values of rho(w_1)...rho(w_k)
/// equal those of its adjoint, which is built by left multiplication with rho(w_j)*.
inline Eigen::VectorXd path_spectrum(const Representation& rep, const TrajectorySummary& path, const CMatrix& start_frame,
                                     int renorm_interval, double burn_in_fraction) {
    const double tb = burn_in_fraction * path.elapsed;
    const std::size_t burn = word_index_at(path, tb);
    FrameState st{start_frame, Eigen::VectorXd::Zero(rep.n), 0, renorm_interval};
    CMatrix tmp(rep.n, rep.n);
    int since = 0;
    for (std::size_t j = 0; j < path.word.size(); ++j) {
        if (j == burn) {
            renormalize(st);
            since = 0;
        }
        tmp.noalias() = rep.matrix(path.word[j]).adjoint() * st.frame;
        st.frame.swap(tmp);
        ++st.steps;
        ++since;
        bool due = since >= renorm_interval;
        if (!due) {
            const Eigen::VectorXd norms = st.frame.colwise().norm();
            due = norms.maxCoeff() > 1e3 || norms.minCoeff() < 1e-3;
        }
        if (due) {
            const Eigen::VectorXd logs = renormalize(st);
            if (j >= burn) st.log_diag += logs;
            since = 0;
        }
    }
    if (since > 0 && path.word.size() > burn) st.log_diag += renormalize(st);
    return st.log_diag / (path.elapsed - tb);
}

struct SpectrumEstimate {
    std::vector<double> lambdas;         ///< non-increasing
    std::vector<double> ci_half_widths;  ///< 95% batch-means half-widths
    double total_time = 0.0;             ///< post-burn-in Brownian time summed over kept paths
    std::size_t n_batches = 0;
    std::size_t n_paths = 0;
    std::size_t discarded_trajectories = 0;
    bool discard_warning = false;
    std::vector<Eigen::VectorXd> per_path;  ///< kept paths, entries permuted to match `lambdas`
};

inline SpectrumEstimate estimate_spectrum(const Representation& rep, const PathEnsemble& paths, const SpectrumConfig& cfg) {
    cfg.validate();
    std::vector<Eigen::VectorXd> raw(paths.size());
    parallel_for(paths.size(), cfg.workers, [&](std::size_t i) {
        if (paths.discarded[i]) return;
        raw[i] = path_spectrum(rep, paths.paths[i], initial_frame(rep.n, paths.config.rng_seed, i), cfg.renorm_interval,
                               cfg.burn_in_fraction);
    });
    SpectrumEstimate out;
    out.discarded_trajectories = paths.discard_count;
    out.discard_warning = paths.discard_fraction() > cfg.discard_warn_fraction;
    for (std::size_t i = 0; i < paths.size(); ++i)
        if (!paths.discarded[i]) {
            out.per_path.push_back(raw[i]);
            out.total_time += (1.0 - cfg.burn_in_fraction) * paths.paths[i].elapsed;
        }
    out.n_paths = out.per_path.size();
    const auto n = static_cast<std::size_t>(rep.n);
    std::vector<BatchEstimate> est(n);
    std::vector<double> column(out.per_path.size());
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < out.per_path.size(); ++i) column[i] = out.per_path[i](static_cast<Eigen::Index>(k));
        est[k] = batch_means(column, cfg.n_batches);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return est[a].mean > est[b].mean; });
    for (std::size_t k : order) {
        out.lambdas.push_back(est[k].mean);
        out.ci_half_widths.push_back(est[k].ci);
    }
    for (auto& v : out.per_path) {
        Eigen::VectorXd p(v.size());
        for (std::size_t k = 0; k < n; ++k) p(static_cast<Eigen::Index>(k)) = v(static_cast<Eigen::Index>(order[k]));
        v = std::move(p);
    }
    out.n_batches = est.empty() ? 0 : est.front().n_batches;
    return out;
}

inline SpectrumEstimate estimate_spectrum(const Representation& rep, const SurfaceModel& surface, const SpectrumConfig& cfg,
                                          std::size_t n_paths) {
    return estimate_spectrum(rep, spectrum_paths(surface, cfg, n_paths), cfg);
}

struct SymmetryCheck {
    double residual = 0.0;                 ///< max_i |lambda_i + lambda_{n+1-i}|
    bool within_ci = true;
    std::vector<double> pair_residuals;    ///< pairs (1, n), (2, n-1), ...
    std::vector<double> pair_tolerances;   ///< sum of the two half-widths
};

/// Pairing lambda_i = -lambda_{n+1-i}. The tolerance for each pair is the sum
/// of the two half-widths, a conservative bound for correlated estimates.
inline constexpr double kRoundoffFloor = 1e-12;

inline SymmetryCheck symmetry_residual(const SpectrumEstimate& est) {
    SymmetryCheck out;
    const std::size_t n = est.lambdas.size();
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        const std::size_t j = n - 1 - i;
        const double r = std::abs(est.lambdas[i] + est.lambdas[j]);
        // batch CIs of exponents that vanish identically sit below rounding, hence the floor
        const double tol = est.ci_half_widths[i] + est.ci_half_widths[j] + kRoundoffFloor;
        out.pair_residuals.push_back(r);
        out.pair_tolerances.push_back(tol);
        out.residual = std::max(out.residual, r);
        if (r > tol) out.within_ci = false;
    }
    return out;
}

struct ExteriorConsistency {
    double top_exterior = 0.0;  ///< lambda(Lambda^k rep)
    double partial_sum = 0.0;   ///< lambda_1 + ... + lambda_k
    double discrepancy = 0.0;   ///< |top_exterior - partial_sum|
    double joint_ci = 0.0;      ///< sum of the half-widths of the two estimates
    double paired_ci = 0.0;     ///< half-width of the per-path difference (finer, ignores O(1/T) bias)
    bool within_ci = true;
};

/// Compares the top exponent of the k-th exterior power with the sum of the k
/// largest exponents, both on the same paths. For k = 1 both sides are read from
/// the same spectrum run, so the discrepancy is zero by construction.
inline ExteriorConsistency exterior_consistency(const Representation& rep, const PathEnsemble& paths, const SpectrumConfig& cfg,
                                                int k) {
    const SpectrumEstimate spec = estimate_spectrum(rep, paths, cfg);
    ExteriorConsistency out;
    if (k < 1 || k > rep.n) throw DomainError("exterior_consistency: k must lie in [1, n]");
    const auto kk = static_cast<std::size_t>(k);
    std::vector<double> sums(spec.per_path.size());
    for (std::size_t i = 0; i < sums.size(); ++i) sums[i] = spec.per_path[i].head(static_cast<Eigen::Index>(kk)).sum();
    const BatchEstimate sum_est = batch_means(sums, cfg.n_batches);
    out.partial_sum = sum_est.mean;
    if (k == 1) {
        out.top_exterior = spec.lambdas[0];
        out.joint_ci = 2.0 * spec.ci_half_widths[0];
        return out;
    }
    const Representation ext = exterior_power_rep(rep, k);
    const TopEstimate top = estimate_top(ext, paths, cfg);
    std::vector<double> diff(top.per_path.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = top.per_path[i] - sums[i];
    out.top_exterior = top.estimate.mean;
    out.discrepancy = std::abs(out.top_exterior - out.partial_sum);
    out.joint_ci = top.estimate.ci + sum_est.ci;
    out.paired_ci = batch_means(diff, cfg.n_batches).ci;
    out.within_ci = out.discrepancy <= out.joint_ci + kRoundoffFloor;
    return out;
}

inline ExteriorConsistency exterior_consistency(const Representation& rep, const SurfaceModel& surface,
                                                const SpectrumConfig& cfg, int k, std::size_t n_paths) {
    return exterior_consistency(rep, spectrum_paths(surface, cfg, n_paths), cfg, k);
}

}  // namespace flatlyap
