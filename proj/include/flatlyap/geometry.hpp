#pragma once

// Upper half-plane geometry: points, real Moebius maps, fundamental polygons
// with side pairings, and Schottky data on the Riemann sphere.
//
// Side convention: the Moebius map attached to side i carries the fundamental
// domain D onto the neighbouring copy across side i, and maps the partner side
// onto side i. Words are read left to right: a path whose lift ends in
// (g_1 g_2 ... g_k) . D records the letters g_1, ..., g_k in crossing order.

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "flatlyap/errors.hpp"
#include "flatlyap/rng.hpp"

namespace flatlyap {

struct HPoint {
    double x = 0.0;
    double y = 1.0;

    bool valid() const noexcept { return std::isfinite(x) && std::isfinite(y) && y > 0.0; }
    std::complex<double> z() const noexcept { return {x, y}; }
    friend bool operator==(const HPoint&, const HPoint&) = default;
};

struct Mobius {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    static constexpr Mobius identity() noexcept { return {}; }
    double det() const noexcept { return a * d - b * c; }

    /// Rescaled to determinant one; throws for non-positive determinant.
    Mobius normalized() const {
        const double dt = det();
        if (!(dt > 0.0) || !std::isfinite(dt)) throw NumericalDegeneracy("Mobius: determinant must be positive");
        const double s = 1.0 / std::sqrt(dt);
        return {a * s, b * s, c * s, d * s};
    }

    Mobius inverse() const noexcept { return {d, -b, -c, a}; }

    /// Composition (this after rhs), renormalised to determinant one. Once the
    /// entries are so large that ad - bc cancels below 1e-6 relative accuracy the
    /// determinant is no longer measurable and the raw product is kept.
    Mobius operator*(const Mobius& r) const {
        const Mobius m{a * r.a + b * r.c, a * r.b + b * r.d, c * r.a + d * r.c, c * r.b + d * r.d};
        const double dt = m.det();
        const double scale = std::abs(m.a * m.d) + std::abs(m.b * m.c);
        if (dt > 1e-6 * scale) return m.normalized();
        return m;
    }

    double max_abs_diff(const Mobius& o) const noexcept {
        return std::max({std::abs(a - o.a), std::abs(b - o.b), std::abs(c - o.c), std::abs(d - o.d)});
    }
};

/// z -> (az + b)/(cz + d). Throws NumericalDegeneracy when the image leaves the half-plane.
inline HPoint mobius_apply(const Mobius& m, HPoint p) {
    const double re = m.c * p.x + m.d;
    const double im = m.c * p.y;
    const double den = re * re + im * im;
    const double x = ((m.a * p.x + m.b) * re + m.a * p.y * im) / den;
    const double y = p.y / den;  // det m = 1
    if (!(y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
        throw NumericalDegeneracy("mobius_apply: image left the upper half-plane");
    return {x, y};
}

/// cosh d = 1 + |p - q|^2 / (2 y_p y_q), evaluated as 2 asinh(|p - q| / (2 sqrt(y_p y_q))).
inline double hyperbolic_distance(HPoint p, HPoint q) noexcept {
    const double e = std::hypot(p.x - q.x, p.y - q.y);
    return 2.0 * std::asinh(e / (2.0 * std::sqrt(p.y * q.y)));
}

/// Cayley map from the Poincare disk to the upper half-plane, w -> i(1 + w)/(1 - w).
inline HPoint from_disk(std::complex<double> w) {
    const std::complex<double> z = std::complex<double>(0.0, 1.0) * (1.0 + w) / (1.0 - w);
    return {z.real(), z.imag()};
}

inline std::complex<double> to_disk(HPoint p) {
    const std::complex<double> z = p.z();
    const std::complex<double> i(0.0, 1.0);
    return (z - i) / (z + i);
}

// ---------------------------------------------------------------------------
// Words

/// A generator or its inverse. Serialised as +-(generator + 1).
struct Letter {
    int generator = 0;
    bool inverse = false;

    int signed_index() const noexcept { return inverse ? -(generator + 1) : generator + 1; }
    static Letter from_signed(int s) {
        if (s == 0) throw DomainError("Letter: signed index 0 is not a generator");
        return s > 0 ? Letter{s - 1, false} : Letter{-s - 1, true};
    }
    Letter inverted() const noexcept { return {generator, !inverse}; }
    friend bool operator==(const Letter&, const Letter&) = default;
};

using Word = std::vector<Letter>;

// ---------------------------------------------------------------------------
// Geodesics and polygons

/// A complete geodesic: the vertical line x = center, or the semicircle |z - center| = radius.
struct Geodesic {
    bool vertical = false;
    double center = 0.0;
    double radius = 0.0;

    /// sinh of the signed hyperbolic distance; positive right of a vertical line / outside a circle.
    double signed_sinh_distance(HPoint p) const noexcept {
        if (vertical) return (p.x - center) / p.y;
        const double dx = p.x - center;
        return (dx * dx + p.y * p.y - radius * radius) / (2.0 * radius * p.y);
    }

    /// Geodesic through two distinct points.
    static Geodesic through(HPoint p, HPoint q) {
        if (std::abs(p.x - q.x) <= 1e-14 * (1.0 + std::abs(p.x))) return {true, 0.5 * (p.x + q.x), 0.0};
        const double c = (p.x * p.x + p.y * p.y - q.x * q.x - q.y * q.y) / (2.0 * (p.x - q.x));
        return {false, c, std::hypot(p.x - c, p.y)};
    }
};

/// Boundary tolerance: a point within this sinh-distance of a side counts as inside.
inline constexpr double kBoundaryTolerance = 1e-12;

struct PolygonSide {
    Geodesic geodesic;
    double orientation = 1.0;  ///< sign making the interior negative
    Letter letter;             ///< map carrying D across this side
    int partner = -1;
    double t0 = 0.0;           ///< segment parameter range: angle on a circle, ordinate on a vertical line
    double t1 = 0.0;

    /// Interior point of the side segment, u in (0, 1).
    HPoint at(double u) const {
        if (geodesic.vertical) {
            double y;
            if (std::isinf(t1)) y = t0 + u / (1.0 - u);
            else if (t0 <= 0.0) y = t1 * u;
            else y = std::exp(std::log(t0) + u * (std::log(t1) - std::log(t0)));
            return {geodesic.center, y};
        }
        const double th = t0 + u * (t1 - t0);
        return {geodesic.center + geodesic.radius * std::cos(th), geodesic.radius * std::sin(th)};
    }

    double beyond(HPoint p) const noexcept { return orientation * geodesic.signed_sinh_distance(p); }
};

struct Inside {
    friend bool operator==(const Inside&, const Inside&) = default;
};
struct ExitedThroughSide {
    int side = -1;
    friend bool operator==(const ExitedThroughSide&, const ExitedThroughSide&) = default;
};
using Location = std::variant<Inside, ExitedThroughSide>;

/// Hyperbolic surface given by a fundamental polygon in the upper half-plane.
/// A model with no sides is the plane itself (trivial deck group).
struct SurfaceModel {
    std::string name;
    std::vector<PolygonSide> sides;
    std::vector<Mobius> generators;
    std::vector<bool> ideal_vertex;  ///< cusp flags per polygon vertex
    HPoint basepoint{0.0, 1.0};
    double area = std::numeric_limits<double>::infinity();
    Word relation;                   ///< defining relation of the deck group (empty if free)
    std::vector<double> finite_cusps;  ///< abscissae of ideal vertices on the real axis
    bool cusp_at_infinity = false;

    /// Bounding box used for uniform sampling (y_max may be infinite for cusped models).
    double box_x_min = -1.0, box_x_max = 1.0, box_y_min = 1e-4, box_y_max = 1.0;

    bool has_cusps() const noexcept {
        for (bool b : ideal_vertex)
            if (b) return true;
        return false;
    }
    /// Height in the most nearby cusp chart: y at infinity, y / |z - v|^2 at a finite cusp v.
    /// Zero for models without cusps.
    double cusp_height(HPoint p) const noexcept {
        double h = cusp_at_infinity ? p.y : 0.0;
        for (double v : finite_cusps) h = std::max(h, p.y / ((p.x - v) * (p.x - v) + p.y * p.y));
        return h;
    }

    bool compact() const noexcept { return !sides.empty() && !has_cusps(); }
    int generator_count() const noexcept { return static_cast<int>(generators.size()); }

    Mobius letter_mobius(Letter l) const {
        const Mobius& m = generators.at(static_cast<std::size_t>(l.generator));
        return l.inverse ? m.inverse() : m;
    }

    Mobius side_mobius(int side) const { return letter_mobius(sides.at(static_cast<std::size_t>(side)).letter); }

    /// Product g_1 g_2 ... g_k of the word's Moebius maps.
    Mobius word_mobius(const Word& w) const {
        Mobius m = Mobius::identity();
        for (const Letter& l : w) m = m * letter_mobius(l);
        return m;
    }

    /// Index of the first side (in side order) that p lies strictly beyond, or -1.
    int exit_side(HPoint p) const noexcept {
        for (std::size_t i = 0; i < sides.size(); ++i)
            if (sides[i].beyond(p) > kBoundaryTolerance) return static_cast<int>(i);
        return -1;
    }

    /// Throws DomainError if a pairing or basepoint invariant fails.
    void validate() const;
};

/// Sides are tested in index order; points within kBoundaryTolerance of a side are Inside.
inline Location locate(const SurfaceModel& s, HPoint p) {
    const int side = s.exit_side(p);
    if (side < 0) return Inside{};
    return ExitedThroughSide{side};
}

struct Reduction {
    HPoint point;
    Word word;
};

/// Moves p into the fundamental domain by repeatedly undoing the first violated
/// side pairing. The returned word's Moebius product maps the point back to p.
inline Reduction reduce_to_domain(const SurfaceModel& s, HPoint p, std::size_t max_word_length = 100000) {
    Reduction out{p, {}};
    while (true) {
        const int side = s.exit_side(out.point);
        if (side < 0) return out;
        if (out.word.size() >= max_word_length)
            throw NonTermination("reduce_to_domain: word length cap exceeded (bad domain data or cusp excursion)");
        const PolygonSide& ps = s.sides[static_cast<std::size_t>(side)];
        out.point = mobius_apply(s.letter_mobius(ps.letter).inverse(), out.point);
        out.word.push_back(ps.letter);
    }
}

inline void SurfaceModel::validate() const {
    if (!basepoint.valid() || exit_side(basepoint) >= 0) throw DomainError(name + ": basepoint is not interior");
    for (std::size_t i = 0; i < sides.size(); ++i) {
        const PolygonSide& side = sides[i];
        if (side.beyond(basepoint) >= 0.0) throw DomainError(name + ": side orientation inconsistent with basepoint");
        if (side.partner < 0 || static_cast<std::size_t>(side.partner) >= sides.size())
            throw DomainError(name + ": side without partner");
        const PolygonSide& partner = sides[static_cast<std::size_t>(side.partner)];
        if (partner.partner != static_cast<int>(i) || !(partner.letter == side.letter.inverted()))
            throw DomainError(name + ": side pairing is not symmetric");
        const Mobius g = letter_mobius(side.letter);
        for (int k = 1; k <= 9; ++k) {
            const HPoint q = mobius_apply(g, partner.at(0.1 * k));
            if (std::abs(side.geodesic.signed_sinh_distance(q)) > 1e-9)
                throw DomainError(name + ": pairing map does not carry partner side onto side " + std::to_string(i));
        }
        if (side.beyond(mobius_apply(g, basepoint)) <= 0.0)
            throw DomainError(name + ": pairing map of side " + std::to_string(i) + " does not cross that side");
    }
}

/// Uniform sample from hyperbolic area on the domain: x uniform and 1/y uniform
/// on the bounding box, rejecting points outside the polygon.
inline HPoint sample_uniform(const SurfaceModel& s, RandomStream& rng, std::size_t max_tries = 1000000) {
    const double inv_lo = std::isinf(s.box_y_max) ? 0.0 : 1.0 / s.box_y_max;
    const double inv_hi = 1.0 / s.box_y_min;
    for (std::size_t t = 0; t < max_tries; ++t) {
        const double x = s.box_x_min + (s.box_x_max - s.box_x_min) * rng.uniform();
        const double y = 1.0 / (inv_lo + (inv_hi - inv_lo) * rng.uniform());
        const HPoint p{x, y};
        if (s.exit_side(p) < 0) return p;
    }
    throw NonTermination("sample_uniform: rejection sampler did not accept a point");
}

// ---------------------------------------------------------------------------
// Presets

namespace detail {

inline PolygonSide side_between(HPoint from, HPoint to, HPoint interior) {
    PolygonSide s;
    s.geodesic = Geodesic::through(from, to);
    s.orientation = s.geodesic.signed_sinh_distance(interior) < 0.0 ? 1.0 : -1.0;
    if (s.geodesic.vertical) {
        s.t0 = std::min(from.y, to.y);
        s.t1 = std::max(from.y, to.y);
    } else {
        const double a0 = std::atan2(from.y, from.x - s.geodesic.center);
        const double a1 = std::atan2(to.y, to.x - s.geodesic.center);
        s.t0 = std::min(a0, a1);
        s.t1 = std::max(a0, a1);
    }
    return s;
}

/// Ideal endpoints of the geodesic through p then q: (behind p, beyond q).
inline std::pair<double, double> ideal_ends(HPoint p, HPoint q) {
    const Geodesic g = Geodesic::through(p, q);
    if (g.vertical) throw DomainError("ideal_ends: vertical geodesic");
    return q.x > p.x ? std::pair{g.center - g.radius, g.center + g.radius}
                     : std::pair{g.center + g.radius, g.center - g.radius};
}

/// Isometry carrying the oriented segment (p0 -> p1) onto (q0 -> q1); segments must have equal length.
inline Mobius segment_map(HPoint p0, HPoint p1, HPoint q0, HPoint q1) {
    auto to_axis = [](HPoint u, HPoint v) {
        const auto [alpha, beta] = ideal_ends(u, v);
        const double s = alpha > beta ? 1.0 : -1.0;
        return Mobius{s, -s * alpha, 1.0, -beta}.normalized();
    };
    const Mobius m1 = to_axis(p0, p1);
    const Mobius m2 = to_axis(q0, q1);
    const double h1 = mobius_apply(m1, p0).y;
    const double h2 = mobius_apply(m2, q0).y;
    const double k = std::sqrt(h2 / h1);
    return m2.inverse() * (Mobius{k, 0.0, 0.0, 1.0 / k} * m1);
}

}  // namespace detail

/// Regular octagon with interior angles pi/4, centred at i.
/// Sides are numbered counter-clockwise; side k+2 is paired with side k for k in {0,1,4,5}.
/// Generators (a1, b1, a2, b2) carry D across sides 2, 3, 6, 7 and satisfy
/// a1^-1 b1 a1 b1^-1 a2^-1 b2 a2 b2^-1 = 1.
inline SurfaceModel genus2_octagon() {
    SurfaceModel s;
    s.name = "genus2_octagon";
    const double cosh_r = 3.0 + 2.0 * std::numbers::sqrt2;  // cot^2(pi/8)
    const double circumradius = std::acosh(cosh_r);
    const double euclid = std::tanh(circumradius / 2.0);
    std::vector<HPoint> v;
    for (int k = 0; k < 8; ++k)
        v.push_back(from_disk(std::polar(euclid, std::numbers::pi / 8.0 + k * std::numbers::pi / 4.0)));

    s.basepoint = {0.0, 1.0};
    s.sides.resize(8);
    for (int k = 0; k < 8; ++k) s.sides[static_cast<std::size_t>(k)] = detail::side_between(v[static_cast<std::size_t>(k)], v[static_cast<std::size_t>((k + 1) % 8)], s.basepoint);

    const int lower[4] = {0, 1, 4, 5};
    s.generators.resize(4);
    for (int g = 0; g < 4; ++g) {
        const int k = lower[g];
        const auto at = [&](int i) { return v[static_cast<std::size_t>(i % 8)]; };
        // carries side k (v_k -> v_{k+1}) onto side k+2 traversed backwards (v_{k+3} -> v_{k+2})
        s.generators[static_cast<std::size_t>(g)] = detail::segment_map(at(k), at(k + 1), at(k + 3), at(k + 2));
        auto& hi = s.sides[static_cast<std::size_t>(k + 2)];
        auto& lo = s.sides[static_cast<std::size_t>(k)];
        hi.letter = {g, false};
        lo.letter = {g, true};
        hi.partner = k;
        lo.partner = k + 2;
    }
    s.ideal_vertex.assign(8, false);
    s.area = 4.0 * std::numbers::pi;  // 2 pi (2g - 2)
    s.relation = {{0, true}, {1, false}, {0, false}, {1, true}, {2, true}, {3, false}, {2, false}, {3, true}};
    s.box_x_min = -std::sinh(circumradius);
    s.box_x_max = std::sinh(circumradius);
    s.box_y_min = std::exp(-circumradius);
    s.box_y_max = std::exp(circumradius);
    s.validate();
    return s;
}

/// Ideal quadrilateral with vertices infinity, -1, 0, 1 and generators
/// T: z -> z + 2 and S: z -> z / (2z + 1) (thrice-punctured sphere, free of rank 2).
/// Sides: 0 = {x = -1}, 1 = arc (-1, 0), 2 = arc (0, 1), 3 = {x = 1}.
inline SurfaceModel thrice_punctured_sphere(double y_floor = 1e-4) {
    SurfaceModel s;
    s.name = "thrice_punctured_sphere";
    s.generators = {Mobius{1.0, 2.0, 0.0, 1.0}, Mobius{1.0, 0.0, 2.0, 1.0}};
    const double inf = std::numeric_limits<double>::infinity();
    s.sides.resize(4);
    s.sides[0] = {Geodesic{true, -1.0, 0.0}, -1.0, Letter{0, true}, 3, 0.0, inf};
    s.sides[1] = {Geodesic{false, -0.5, 0.5}, -1.0, Letter{1, true}, 2, 0.0, std::numbers::pi};
    s.sides[2] = {Geodesic{false, 0.5, 0.5}, -1.0, Letter{1, false}, 1, 0.0, std::numbers::pi};
    s.sides[3] = {Geodesic{true, 1.0, 0.0}, 1.0, Letter{0, false}, 0, 0.0, inf};
    s.ideal_vertex.assign(4, true);
    s.finite_cusps = {-1.0, 0.0, 1.0};
    s.cusp_at_infinity = true;
    s.basepoint = {0.0, 1.0};
    s.area = 2.0 * std::numbers::pi;
    s.box_x_min = -1.0;
    s.box_x_max = 1.0;
    s.box_y_min = y_floor;
    s.box_y_max = inf;
    s.validate();
    return s;
}

/// The hyperbolic plane itself: no sides, every word is empty.
inline SurfaceModel free_plane() {
    SurfaceModel s;
    s.name = "free_plane";
    s.basepoint = {0.0, 1.0};
    return s;
}

// ---------------------------------------------------------------------------
// Schottky groups on the Riemann sphere

struct ComplexMobius {
    std::complex<double> a{1.0}, b{0.0}, c{0.0}, d{1.0};

    std::complex<double> apply(std::complex<double> z) const { return (a * z + b) / (c * z + d); }
    ComplexMobius inverse() const { return {d, -b, -c, a}; }
    ComplexMobius operator*(const ComplexMobius& r) const {
        ComplexMobius m{a * r.a + b * r.c, a * r.b + b * r.d, c * r.a + d * r.c, c * r.b + d * r.d};
        const std::complex<double> s = std::sqrt(m.a * m.d - m.b * m.c);
        return {m.a / s, m.b / s, m.c / s, m.d / s};
    }
};

struct Circle {
    std::complex<double> center;
    double radius = 1.0;

    bool contains(std::complex<double> z, double tol = 0.0) const { return std::abs(z - center) < radius + tol; }
};

/// One Schottky generator: maps the exterior of `source` onto the interior of `target`.
struct SchottkyPair {
    Circle source;
    Circle target;
    ComplexMobius map;
};

struct SchottkyData {
    std::vector<SchottkyPair> pairs;

    /// Disk attached to a letter: target for a generator, source for its inverse.
    const Circle& disk(Letter l) const {
        const SchottkyPair& p = pairs.at(static_cast<std::size_t>(l.generator));
        return l.inverse ? p.source : p.target;
    }
    ComplexMobius letter_map(Letter l) const {
        const ComplexMobius& m = pairs.at(static_cast<std::size_t>(l.generator)).map;
        return l.inverse ? m.inverse() : m;
    }

    /// Checks disjointness of the closed disks and the exterior-to-interior property at sampled points.
    void validate() const {
        std::vector<Circle> all;
        for (const auto& p : pairs) {
            all.push_back(p.source);
            all.push_back(p.target);
        }
        for (std::size_t i = 0; i < all.size(); ++i)
            for (std::size_t j = i + 1; j < all.size(); ++j)
                if (std::abs(all[i].center - all[j].center) <= all[i].radius + all[j].radius)
                    throw DomainError("SchottkyData: closed disks are not pairwise disjoint");
        for (std::size_t g = 0; g < pairs.size(); ++g) {
            const SchottkyPair& p = pairs[g];
            for (int k = 0; k < 16; ++k) {
                const double th = 2.0 * std::numbers::pi * k / 16.0;
                const auto on_source = p.source.center + std::polar(p.source.radius, th);
                const auto img = p.map.apply(on_source);
                if (std::abs(std::abs(img - p.target.center) - p.target.radius) > 1e-9 * (1.0 + p.target.radius))
                    throw DomainError("SchottkyData: generator " + std::to_string(g) + " does not map circle to circle");
                const auto outside = p.source.center + std::polar(2.0 * p.source.radius + 1.0, th);
                if (!p.target.contains(p.map.apply(outside)))
                    throw DomainError("SchottkyData: generator " + std::to_string(g) + " does not map exterior into target");
            }
        }
    }
};

/// Maps the exterior of the circle (-c, r) onto the interior of (c, r): z -> c - r^2 / (z + c).
inline SchottkyPair symmetric_schottky_pair(std::complex<double> c, double r) {
    ComplexMobius m{c, c * c - r * r, 1.0, c};
    const auto s = std::sqrt(m.a * m.d - m.b * m.c);
    m = {m.a / s, m.b / s, m.c / s, m.d / s};
    return {Circle{-c, r}, Circle{c, r}, m};
}

/// Images of disk centres under all reduced words of length `depth`: for the word
/// s_1 ... s_d the point s_1 ... s_d(centre of the disk of s_d), which lies in the
/// disk of s_1. Returns 2m (2m - 1)^(depth - 1) points in lexicographic word order.
inline std::vector<std::complex<double>> limit_set_sample(const SchottkyData& s, int depth,
                                                          std::size_t max_points = std::size_t{1} << 22) {
    if (depth < 1) throw DomainError("limit_set_sample: depth must be >= 1");
    const std::size_t m = s.pairs.size();
    if (m == 0) return {};
    double count = 2.0 * static_cast<double>(m) * std::pow(2.0 * static_cast<double>(m) - 1.0, depth - 1);
    if (count > static_cast<double>(max_points)) throw ResourceLimit("limit_set_sample: depth too large for the point cap");

    std::vector<Letter> letters;
    for (std::size_t g = 0; g < m; ++g) {
        letters.push_back({static_cast<int>(g), false});
        letters.push_back({static_cast<int>(g), true});
    }
    std::vector<std::complex<double>> out;
    out.reserve(static_cast<std::size_t>(count));
    struct Frame {
        ComplexMobius prefix;
        Letter last;
        int length;
    };
    // explicit DFS keeps lexicographic order without recursion
    std::vector<Frame> stack;
    for (auto it = letters.rbegin(); it != letters.rend(); ++it) stack.push_back({s.letter_map(*it), *it, 1});
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.length == depth) {
            out.push_back(f.prefix.apply(s.disk(f.last).center));
            continue;
        }
        for (auto it = letters.rbegin(); it != letters.rend(); ++it) {
            if (*it == f.last.inverted()) continue;
            stack.push_back({f.prefix * s.letter_map(*it), *it, f.length + 1});
        }
    }
    return out;
}

/// Euclidean Hausdorff distance between finite planar point sets.
inline double hausdorff_distance(const std::vector<std::complex<double>>& a, const std::vector<std::complex<double>>& b) {
    auto directed = [](const auto& from, const auto& to) {
        double worst = 0.0;
        for (const auto& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : to) best = std::min(best, std::abs(p - q));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

}  // namespace flatlyap
