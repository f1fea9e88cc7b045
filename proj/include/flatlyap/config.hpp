#pragma once

// Strict YAML experiment configuration. Unknown keys, type errors and invariant
// failures are rejected with the field path and source line.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "flatlyap/catalog.hpp"
#include "flatlyap/errors.hpp"
#include "flatlyap/harmonic.hpp"
#include "flatlyap/rng.hpp"

namespace flatlyap {

/// Path and trajectory settings. Statistical quantities have no defaults: a
/// pipeline that needs an unset one refuses to run.
struct EstimatorSettings {
    std::optional<double> dt;
    std::optional<double> horizon;
    std::optional<std::size_t> n_paths;
    std::optional<std::size_t> n_batches;
    std::optional<double> burn_in_fraction;
    int renorm_interval = 16;
    double cusp_y_cap = 50.0;
    int exterior_k = 0;  ///< 0: skip the exterior-power consistency check
};

struct FiberSettings {
    std::optional<double> horizon;
    std::optional<std::size_t> n_paths;
    std::optional<double> probe_dt;
    std::optional<std::size_t> n_probes;
    int k = 1;
    double discrepancy_threshold = 0.02;
};

enum class SubbundleSource { preset, covector, basis, random };

struct SubbundleSettings {
    SubbundleSource source = SubbundleSource::preset;
    CVector covector;
    CMatrix basis;                       ///< columns span F
    std::optional<Rational> chern_number;
    std::string label;
};

struct DegreeSettings {
    int k = 1;
    double gap_threshold = 1e-3;
    double strict_sigma = 3.0;
};

struct DiagnosticsSettings {
    std::optional<std::size_t> escape_paths;
    std::optional<double> escape_horizon;
    std::optional<std::size_t> dynkin_paths;
    std::optional<std::size_t> sup_tail_paths;
    std::optional<double> sup_tail_t0;
    std::optional<std::size_t> norm_bound_samples;
};

struct ExperimentConfig {
    std::string path;
    std::string source;               ///< file contents
    std::uint64_t hash = 0;           ///< FNV-1a of the file contents
    std::string name;
    std::uint64_t seed = 0;
    std::string output_dir;
    unsigned workers = 0;             ///< 0: hardware concurrency
    std::string cusp_policy = "discard";

    std::string surface_kind;         ///< empty: the preset's own surface
    double y_floor = 1e-4;

    std::string preset;               ///< empty: inline matrices
    PresetParams preset_params;
    std::vector<CMatrix> inline_generators;
    std::vector<int> generator_lines;
    PreservedForm inline_form;
    bool unitary = false;
    std::optional<bool> strongly_irreducible;

    EstimatorSettings estimator;
    FiberSettings fiber;
    std::optional<SubbundleSettings> subbundle;
    DegreeSettings degree;
    DiagnosticsSettings diagnostics;
};

inline std::string hash_hex(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

namespace detail {

inline int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

inline std::string join(const std::string& parent, const std::string& key) { return parent.empty() ? key : parent + "." + key; }

/// Rejects keys outside `allowed` for a mapping node.
inline void check_keys(const YAML::Node& map, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!map.IsMap()) throw ConfigError(where, line_of(map), "expected a mapping");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : map) {
        const auto key = kv.first.as<std::string>();
        if (!ok.count(key)) throw ConfigError(join(where, key), line_of(kv.first), "unknown key");
    }
}

template <class T>
T scalar(const YAML::Node& n, const std::string& field) {
    if (!n.IsScalar()) throw ConfigError(field, line_of(n), "expected a scalar");
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(field, line_of(n), "cannot convert '" + n.Scalar() + "'");
    }
}

template <class T>
std::optional<T> optional_scalar(const YAML::Node& parent, const std::string& where, const char* key) {
    const YAML::Node n = parent[key];
    if (!n) return std::nullopt;
    return scalar<T>(n, join(where, key));
}

inline double positive(double v, const YAML::Node& n, const std::string& field) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field, line_of(n), "must be positive and finite");
    return v;
}

inline std::optional<double> optional_positive(const YAML::Node& parent, const std::string& where, const char* key) {
    auto v = optional_scalar<double>(parent, where, key);
    if (v) positive(*v, parent[key], join(where, key));
    return v;
}

inline std::optional<std::size_t> optional_count(const YAML::Node& parent, const std::string& where, const char* key) {
    const YAML::Node n = parent[key];
    if (!n) return std::nullopt;
    const auto v = scalar<long long>(n, join(where, key));
    if (v < 1) throw ConfigError(join(where, key), line_of(n), "must be >= 1");
    return static_cast<std::size_t>(v);
}

inline Complex complex_entry(const YAML::Node& n, const std::string& field) {
    if (n.IsScalar()) return {scalar<double>(n, field), 0.0};
    if (!n.IsSequence() || n.size() != 2) throw ConfigError(field, line_of(n), "complex entry must be [re, im]");
    return {scalar<double>(n[0], field), scalar<double>(n[1], field)};
}

/// Square matrix from a flat row-major list of n^2 complex entries.
inline CMatrix square_matrix(const YAML::Node& n, const std::string& field) {
    if (!n.IsSequence() || n.size() == 0) throw ConfigError(field, line_of(n), "matrix must be a non-empty list of entries");
    const auto count = static_cast<int>(n.size());
    const int dim = static_cast<int>(std::lround(std::sqrt(static_cast<double>(count))));
    if (dim * dim != count) throw ConfigError(field, line_of(n), "matrix needs a square number of entries, got " + std::to_string(count));
    CMatrix m(dim, dim);
    for (int i = 0; i < count; ++i) m(i / dim, i % dim) = complex_entry(n[static_cast<std::size_t>(i)], field + "[" + std::to_string(i) + "]");
    return m;
}

inline CVector complex_vector(const YAML::Node& n, const std::string& field) {
    if (!n.IsSequence() || n.size() == 0) throw ConfigError(field, line_of(n), "expected a non-empty list of entries");
    CVector v(static_cast<Eigen::Index>(n.size()));
    for (std::size_t i = 0; i < n.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_entry(n[i], field + "[" + std::to_string(i) + "]");
    return v;
}

inline std::array<double, 4> four_reals(const YAML::Node& n, const std::string& field) {
    if (!n.IsSequence() || n.size() != 4) throw ConfigError(field, line_of(n), "expected four reals");
    std::array<double, 4> out{};
    for (std::size_t i = 0; i < 4; ++i) out[i] = scalar<double>(n[i], field);
    return out;
}

inline void parse_representation(const YAML::Node& r, ExperimentConfig& c) {
    const std::string w = "representation";
    check_keys(r, w, {"preset", "params", "generators", "form", "unitary", "strongly_irreducible"});
    const bool has_preset = static_cast<bool>(r["preset"]);
    const bool has_inline = static_cast<bool>(r["generators"]);
    if (has_preset == has_inline) throw ConfigError(w, line_of(r), "give exactly one of 'preset' and 'generators'");
    if (r["strongly_irreducible"]) c.strongly_irreducible = scalar<bool>(r["strongly_irreducible"], w + ".strongly_irreducible");
    if (has_preset) {
        c.preset = scalar<std::string>(r["preset"], w + ".preset");
        bool known = false;
        for (const auto& p : catalog()) known = known || p.name == c.preset;
        if (!known) throw ConfigError(w + ".preset", line_of(r["preset"]), "unknown preset '" + c.preset + "'");
        if (r["form"] || r["unitary"]) throw ConfigError(w, line_of(r), "'form' and 'unitary' apply to inline matrices only");
        if (const YAML::Node p = r["params"]) {
            const std::string pw = w + ".params";
            check_keys(p, pw, {"seed", "k", "slot", "alpha", "beta", "label"});
            if (p["seed"]) c.preset_params.seed = scalar<std::uint64_t>(p["seed"], pw + ".seed");
            if (p["k"]) {
                c.preset_params.weight2_k = scalar<int>(p["k"], pw + ".k");
                if (c.preset_params.weight2_k < 1) throw ConfigError(pw + ".k", line_of(p["k"]), "must be >= 1");
            }
            if (p["slot"]) {
                c.preset_params.slot = scalar<std::string>(p["slot"], pw + ".slot");
                const auto slots = hypergeometric_slots();
                if (std::find(slots.begin(), slots.end(), c.preset_params.slot) == slots.end())
                    throw ConfigError(pw + ".slot", line_of(p["slot"]), "unknown slot '" + c.preset_params.slot + "'");
            }
            if (p["alpha"] || p["beta"]) {
                if (!p["alpha"] || !p["beta"]) throw ConfigError(pw, line_of(p), "'alpha' and 'beta' go together");
                HypergeometricParams h;
                h.alpha = four_reals(p["alpha"], pw + ".alpha");
                h.beta = four_reals(p["beta"], pw + ".beta");
                if (p["label"]) {
                    h.label = scalar<std::string>(p["label"], pw + ".label");
                    if (h.label != "thin" && h.label != "thick" && h.label != "unlabelled")
                        throw ConfigError(pw + ".label", line_of(p["label"]), "label must be thin, thick or unlabelled");
                }
                c.preset_params.hypergeometric = h;
            } else if (p["label"]) {
                throw ConfigError(pw + ".label", line_of(p["label"]), "label needs alpha and beta");
            }
        }
        return;
    }
    if (r["params"]) throw ConfigError(w + ".params", line_of(r["params"]), "'params' applies to presets only");
    const YAML::Node g = r["generators"];
    if (!g.IsSequence() || g.size() == 0) throw ConfigError(w + ".generators", line_of(g), "expected a non-empty list of matrices");
    for (std::size_t i = 0; i < g.size(); ++i)
    {
        c.inline_generators.push_back(square_matrix(g[i], w + ".generators[" + std::to_string(i) + "]"));
        c.generator_lines.push_back(line_of(g[i]));
    }
    if (const YAML::Node f = r["form"]) {
        check_keys(f, w + ".form", {"kind", "matrix"});
        if (!f["kind"] || !f["matrix"]) throw ConfigError(w + ".form", line_of(f), "needs 'kind' and 'matrix'");
        const auto kind = scalar<std::string>(f["kind"], w + ".form.kind");
        if (kind == "hermitian") c.inline_form.kind = FormKind::hermitian;
        else if (kind == "symplectic") c.inline_form.kind = FormKind::symplectic;
        else throw ConfigError(w + ".form.kind", line_of(f["kind"]), "must be hermitian or symplectic");
        c.inline_form.matrix = square_matrix(f["matrix"], w + ".form.matrix");
    }
    if (r["unitary"]) c.unitary = scalar<bool>(r["unitary"], w + ".unitary");
}

}  // namespace detail

/// Builds the surface and representation named by the config, applying overrides.
/// Representation invariant failures surface as ConfigError citing the generator and residual.
inline BuiltPreset build_experiment(const ExperimentConfig& c) {
    BuiltPreset p;
    const std::string field = c.preset.empty() ? "representation.generators" : "representation.preset";
    try {
        if (!c.preset.empty()) {
            p = build_preset(c.preset, c.preset_params);
        } else {
            p.name = "inline";
            p.rep = make_representation(c.inline_generators, c.inline_form, c.unitary, c.strongly_irreducible.value_or(false),
                                        "inline");
        }
        if (!c.surface_kind.empty() || c.preset.empty()) {
            const std::string kind = c.surface_kind.empty() ? "genus2_octagon" : c.surface_kind;
            p.surface = kind == "genus2_octagon" ? genus2_octagon() : thrice_punctured_sphere(c.y_floor);
        }
        if (c.strongly_irreducible) p.rep.strongly_irreducible = *c.strongly_irreducible;
        if (p.rep.generator_count() != p.surface.generator_count())
            throw DomainError("representation has " + std::to_string(p.rep.generator_count()) + " generators but the surface has " +
                              std::to_string(p.surface.generator_count()));
        check_relation(p.rep, p.surface);
    } catch (const InvariantViolation& e) {
        const int g = e.generator();
        if (c.preset.empty() && g >= 0 && static_cast<std::size_t>(g) < c.generator_lines.size())
            throw ConfigError(field + "[" + std::to_string(g) + "]", c.generator_lines[static_cast<std::size_t>(g)], e.what());
        throw ConfigError(field, 0, e.what());
    } catch (const DomainError& e) {
        throw ConfigError(field, 0, e.what());
    }
    if (c.subbundle) {
        const SubbundleSettings& s = *c.subbundle;
        const int n = p.rep.n;
        auto need_dim = [&](Eigen::Index d, const std::string& what) {
            if (d != n) throw ConfigError("subbundle." + what, 0, "dimension " + std::to_string(d) + " does not match rank " + std::to_string(n));
        };
        SubbundleData d;
        d.label = s.label;
        switch (s.source) {
            case SubbundleSource::preset:
                if (!p.subbundle) throw ConfigError("subbundle", 0, "preset '" + p.name + "' has no subbundle; give covector, basis or random");
                d = *p.subbundle;
                if (!s.label.empty()) d.label = s.label;
                break;
            case SubbundleSource::covector:
                need_dim(s.covector.size(), "covector");
                d.divisor = constant_divisor(DivisorForm{s.covector / s.covector.norm()});
                break;
            case SubbundleSource::basis:
                need_dim(s.basis.rows(), "basis");
                try {
                    d.divisor = constant_divisor(fhat_form(Subspace::span(s.basis)));
                } catch (const Error& e) {
                    throw ConfigError("subbundle.basis", 0, e.what());
                }
                break;
            case SubbundleSource::random: {
                // a uniform random constant hyperplane, drawn from the run seed
                RandomStream rng(c.seed, "random_divisor", 0);
                d.divisor = constant_divisor(DivisorForm{random_unit_vector(n, rng)});
                break;
            }
        }
        if (s.chern_number) d.chern_number = *s.chern_number;
        else if (s.source != SubbundleSource::preset) throw ConfigError("subbundle.chern_number", 0, "required for this source");
        if (d.label.empty()) d.label = "F";
        p.subbundle = d;
    }
    return p;
}

inline ExperimentConfig parse_config(const std::string& text, const std::string& path = "<string>") {
    ExperimentConfig c;
    c.path = path;
    c.source = text;
    c.hash = fnv1a64(text);
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("", e.mark.line + 1, std::string("YAML syntax: ") + e.msg);
    }
    if (!root || !root.IsMap()) throw ConfigError("", 1, "top level must be a mapping");
    detail::check_keys(root, "", {"name", "seed", "output_dir", "workers", "surface", "representation", "estimator", "fiber",
                                  "subbundle", "degree", "diagnostics", "flags"});
    if (!root["seed"]) throw ConfigError("seed", 0, "required (seeds are never taken from the clock)");
    c.seed = detail::scalar<std::uint64_t>(root["seed"], "seed");
    if (!root["representation"]) throw ConfigError("representation", 0, "required");
    c.name = root["name"] ? detail::scalar<std::string>(root["name"], "name") : "experiment";
    c.output_dir = root["output_dir"] ? detail::scalar<std::string>(root["output_dir"], "output_dir") : "out/" + c.name;
    if (root["workers"]) c.workers = detail::scalar<unsigned>(root["workers"], "workers");

    if (const YAML::Node s = root["surface"]) {
        detail::check_keys(s, "surface", {"kind", "y_floor"});
        if (!s["kind"]) throw ConfigError("surface.kind", detail::line_of(s), "required");
        c.surface_kind = detail::scalar<std::string>(s["kind"], "surface.kind");
        if (c.surface_kind != "genus2_octagon" && c.surface_kind != "thrice_punctured_sphere")
            throw ConfigError("surface.kind", detail::line_of(s["kind"]), "must be genus2_octagon or thrice_punctured_sphere");
        if (auto y = detail::optional_positive(s, "surface", "y_floor")) c.y_floor = *y;
    }
    detail::parse_representation(root["representation"], c);

    if (const YAML::Node e = root["estimator"]) {
        const std::string w = "estimator";
        detail::check_keys(e, w, {"dt", "horizon", "n_paths", "n_batches", "burn_in_fraction", "renorm_interval", "cusp_y_cap",
                                  "exterior_k"});
        auto& s = c.estimator;
        s.dt = detail::optional_positive(e, w, "dt");
        s.horizon = detail::optional_positive(e, w, "horizon");
        s.n_paths = detail::optional_count(e, w, "n_paths");
        s.n_batches = detail::optional_count(e, w, "n_batches");
        if (s.n_batches && *s.n_batches < 2) throw ConfigError(w + ".n_batches", detail::line_of(e["n_batches"]), "must be >= 2");
        s.burn_in_fraction = detail::optional_scalar<double>(e, w, "burn_in_fraction");
        if (s.burn_in_fraction && !(*s.burn_in_fraction >= 0.0 && *s.burn_in_fraction < 1.0))
            throw ConfigError(w + ".burn_in_fraction", detail::line_of(e["burn_in_fraction"]), "must lie in [0, 1)");
        if (auto v = detail::optional_count(e, w, "renorm_interval")) s.renorm_interval = static_cast<int>(*v);
        if (auto v = detail::optional_positive(e, w, "cusp_y_cap")) s.cusp_y_cap = *v;
        if (auto v = detail::optional_count(e, w, "exterior_k")) s.exterior_k = static_cast<int>(*v);
        if (s.dt && s.horizon && *s.horizon < *s.dt) throw ConfigError(w + ".horizon", detail::line_of(e["horizon"]), "must be >= dt");
    }
    if (const YAML::Node f = root["fiber"]) {
        const std::string w = "fiber";
        detail::check_keys(f, w, {"horizon", "n_paths", "probe_dt", "n_probes", "k", "discrepancy_threshold"});
        auto& s = c.fiber;
        s.horizon = detail::optional_positive(f, w, "horizon");
        s.n_paths = detail::optional_count(f, w, "n_paths");
        s.probe_dt = detail::optional_positive(f, w, "probe_dt");
        s.n_probes = detail::optional_count(f, w, "n_probes");
        if (auto v = detail::optional_count(f, w, "k")) s.k = static_cast<int>(*v);
        if (auto v = detail::optional_positive(f, w, "discrepancy_threshold")) s.discrepancy_threshold = *v;
    }
    if (const YAML::Node b = root["subbundle"]) {
        const std::string w = "subbundle";
        detail::check_keys(b, w, {"source", "covector", "basis", "chern_number", "label"});
        SubbundleSettings s;
        const std::string src = b["source"] ? detail::scalar<std::string>(b["source"], w + ".source") : "preset";
        if (src == "preset") s.source = SubbundleSource::preset;
        else if (src == "covector") s.source = SubbundleSource::covector;
        else if (src == "basis") s.source = SubbundleSource::basis;
        else if (src == "random") s.source = SubbundleSource::random;
        else throw ConfigError(w + ".source", detail::line_of(b["source"]), "must be preset, covector, basis or random");
        if (s.source == SubbundleSource::covector) {
            if (!b["covector"]) throw ConfigError(w + ".covector", detail::line_of(b), "required for source covector");
            s.covector = detail::complex_vector(b["covector"], w + ".covector");
            if (!(s.covector.norm() > 0.0)) throw ConfigError(w + ".covector", detail::line_of(b["covector"]), "must be non-zero");
        } else if (b["covector"]) {
            throw ConfigError(w + ".covector", detail::line_of(b["covector"]), "only valid with source covector");
        }
        if (s.source == SubbundleSource::basis) {
            const YAML::Node bn = b["basis"];
            if (!bn || !bn.IsSequence() || bn.size() == 0)
                throw ConfigError(w + ".basis", detail::line_of(b), "expected a list of column vectors");
            std::vector<CVector> cols;
            for (std::size_t i = 0; i < bn.size(); ++i) cols.push_back(detail::complex_vector(bn[i], w + ".basis[" + std::to_string(i) + "]"));
            s.basis.resize(cols.front().size(), static_cast<Eigen::Index>(cols.size()));
            for (std::size_t i = 0; i < cols.size(); ++i) {
                if (cols[i].size() != cols.front().size()) throw ConfigError(w + ".basis", detail::line_of(bn), "columns differ in length");
                s.basis.col(static_cast<Eigen::Index>(i)) = cols[i];
            }
        } else if (b["basis"]) {
            throw ConfigError(w + ".basis", detail::line_of(b["basis"]), "only valid with source basis");
        }
        if (b["chern_number"]) {
            try {
                s.chern_number = Rational::parse(detail::scalar<std::string>(b["chern_number"], w + ".chern_number"));
            } catch (const DomainError& e) {
                throw ConfigError(w + ".chern_number", detail::line_of(b["chern_number"]), e.what());
            }
        }
        if (b["label"]) s.label = detail::scalar<std::string>(b["label"], w + ".label");
        c.subbundle = s;
    }
    if (const YAML::Node d = root["degree"]) {
        const std::string w = "degree";
        detail::check_keys(d, w, {"k", "gap_threshold", "strict_sigma"});
        if (auto v = detail::optional_count(d, w, "k")) c.degree.k = static_cast<int>(*v);
        if (auto v = detail::optional_positive(d, w, "gap_threshold")) c.degree.gap_threshold = *v;
        if (auto v = detail::optional_positive(d, w, "strict_sigma")) c.degree.strict_sigma = *v;
    }
    if (const YAML::Node d = root["diagnostics"]) {
        const std::string w = "diagnostics";
        detail::check_keys(d, w, {"escape_paths", "escape_horizon", "dynkin_paths", "sup_tail_paths", "sup_tail_t0",
                                  "norm_bound_samples"});
        auto& s = c.diagnostics;
        s.escape_paths = detail::optional_count(d, w, "escape_paths");
        s.escape_horizon = detail::optional_positive(d, w, "escape_horizon");
        if (s.escape_horizon && *s.escape_horizon < 50.0)
            throw ConfigError("diagnostics.escape_horizon", detail::line_of(d["escape_horizon"]), "must be >= 50");
        s.dynkin_paths = detail::optional_count(d, w, "dynkin_paths");
        s.sup_tail_paths = detail::optional_count(d, w, "sup_tail_paths");
        s.sup_tail_t0 = detail::optional_positive(d, w, "sup_tail_t0");
        s.norm_bound_samples = detail::optional_count(d, w, "norm_bound_samples");
    }
    if (const YAML::Node f = root["flags"]) {
        detail::check_keys(f, "flags", {"strongly_irreducible", "cusp_policy"});
        if (f["strongly_irreducible"]) {
            if (c.strongly_irreducible)
                throw ConfigError("flags.strongly_irreducible", detail::line_of(f["strongly_irreducible"]),
                                  "already set under representation");
            c.strongly_irreducible = detail::scalar<bool>(f["strongly_irreducible"], "flags.strongly_irreducible");
        }
        if (f["cusp_policy"]) {
            c.cusp_policy = detail::scalar<std::string>(f["cusp_policy"], "flags.cusp_policy");
            if (c.cusp_policy != "discard")
                throw ConfigError("flags.cusp_policy", detail::line_of(f["cusp_policy"]), "only 'discard' is supported");
        }
    }
    // builds once so invariant failures are reported at load time
    (void)build_experiment(c);
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", 0, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

}  // namespace flatlyap
