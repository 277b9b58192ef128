#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dfls/core.hpp"

/// \file criticality.hpp
/// First-order geometry of the box: eps-active constraint sets, the tangent
/// and normal cones they generate, projections onto those cones, the
/// criticality measure chi, and the stationarity / strict-complementarity
/// report. Everything here is pure and needs a gradient; the solver itself
/// never calls into this module.

namespace dfls {

/// Index sets of bounds within eps of the current point (non-strict
/// comparisons on both sides, so the bands may overlap).
struct EpsActiveSets {
    std::size_t n = 0;
    std::vector<std::size_t> at_lower;
    std::vector<std::size_t> at_upper;
    std::vector<bool> lower_mask;
    std::vector<bool> upper_mask;
};

inline EpsActiveSets eps_active_sets(const Vector& x, double eps, const Bounds& bounds) {
    if (!(eps >= 0.0))
        throw std::invalid_argument("eps_active_sets: eps must be >= 0");
    EpsActiveSets s;
    s.n = x.size();
    s.lower_mask.assign(s.n, false);
    s.upper_mask.assign(s.n, false);
    for (std::size_t i = 0; i < s.n; ++i) {
        if (x[i] <= bounds.lower[i] + eps) {
            s.lower_mask[i] = true;
            s.at_lower.push_back(i);
        }
        if (x[i] >= bounds.upper[i] - eps) {
            s.upper_mask[i] = true;
            s.at_upper.push_back(i);
        }
    }
    return s;
}

/// Signed unit coordinate directions generating the tangent cone of the
/// eps-active bounds: -e_i for i not at-lower, +e_i for i not at-upper.
/// The zero vector is an implicit generator.
struct ConeGenerators {
    struct Direction {
        std::size_t index;
        int sign;
    };
    std::vector<Direction> directions;
};

inline ConeGenerators tangent_generators(const EpsActiveSets& sets, std::size_t n) {
    ConeGenerators g;
    for (std::size_t i = 0; i < n; ++i)
        if (!sets.lower_mask[i]) g.directions.push_back({i, -1});
    for (std::size_t i = 0; i < n; ++i)
        if (!sets.upper_mask[i]) g.directions.push_back({i, +1});
    return g;
}

/// The tangent cone is a coordinatewise product of rays, so its projection
/// clamps each component: at-lower keeps the nonnegative part, at-upper the
/// nonpositive part, both-active forces zero, free passes through.
inline Vector project_tangent(const Vector& v, const EpsActiveSets& sets) {
    Vector t(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const bool lo = sets.lower_mask[i];
        const bool up = sets.upper_mask[i];
        if (lo && up)
            t[i] = 0.0;
        else if (lo)
            t[i] = std::max(v[i], 0.0);
        else if (up)
            t[i] = std::min(v[i], 0.0);
        else
            t[i] = v[i];
    }
    return t;
}

/// Complement of project_tangent; the two add back to v exactly and are
/// orthogonal componentwise.
inline Vector project_normal(const Vector& v, const EpsActiveSets& sets) {
    Vector w(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const bool lo = sets.lower_mask[i];
        const bool up = sets.upper_mask[i];
        if (lo && up)
            w[i] = v[i];
        else if (lo)
            w[i] = std::min(v[i], 0.0);
        else if (up)
            w[i] = std::max(v[i], 0.0);
        else
            w[i] = 0.0;
    }
    return w;
}

inline double norm2(const Vector& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return std::sqrt(s);
}

inline double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Criticality measure: the maximum of -g.d over feasible directions d with
/// l - x <= d <= u - x and ||d|| <= 1. Zero exactly at stationary points.
///
/// The maximizer is d_i(lambda) = clamp(-g_i/(2 lambda), l_i - x_i, u_i - x_i)
/// with lambda >= 0 the multiplier of the ball constraint. ||d(lambda)|| is
/// non-increasing in lambda, so either the lambda -> 0 box-only solution
/// already has norm <= 1 (ball slack; zero-gradient coordinates stay at 0),
/// or lambda is found by monotone bisection on ||d(lambda)|| = 1.
inline double chi(const Vector& x, const Vector& g, const Bounds& bounds) {
    const std::size_t n = x.size();
    if (g.size() != n)
        throw std::invalid_argument("chi: gradient has wrong dimension");
    for (double gi : g)
        if (!std::isfinite(gi))
            throw std::invalid_argument("chi: gradient must be finite");

    Vector lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
        lo[i] = bounds.lower[i] - x[i];
        hi[i] = bounds.upper[i] - x[i];
    }

    // Box-only candidate: each coordinate runs to its feasible extreme in
    // the descent direction; zero-gradient coordinates stay at 0.
    double box_norm_sq = 0.0;
    double box_value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double di = g[i] < 0.0 ? hi[i] : (g[i] > 0.0 ? lo[i] : 0.0);
        box_norm_sq += di * di;
        box_value += -g[i] * di;
    }
    if (box_norm_sq <= 1.0) return box_value;

    auto clamped = [&](double lambda, std::size_t i) {
        const double raw = -g[i] / (2.0 * lambda);
        return std::min(std::max(raw, lo[i]), hi[i]);
    };
    auto norm_at = [&](double lambda) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double di = clamped(lambda, i);
            s += di * di;
        }
        return std::sqrt(s);
    };
    auto value_at = [&](double lambda) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += -g[i] * clamped(lambda, i);
        return s;
    };

    // Bracket: at lambda_hi = ||g||/2 the unclamped components already have
    // norm 1, so clamping gives norm <= 1; the geometric expansion is a
    // safety net. At tiny lambda the clamps saturate to the box-only
    // solution, whose norm exceeds 1.
    double lambda_hi = 0.5 * norm2(g);
    for (int guard = 0; guard < 200 && norm_at(lambda_hi) > 1.0; ++guard) lambda_hi *= 2.0;
    double lambda_lo = std::numeric_limits<double>::min();

    double chi_hi = value_at(lambda_hi); // feasible side: lower bound on chi
    double chi_lo = value_at(lambda_lo); // relaxed side: upper bound on chi
    for (int it = 0; it < 500; ++it) {
        if (std::abs(chi_lo - chi_hi) < 1e-12 * (1.0 + std::abs(chi_hi))) break;
        const double mid = std::sqrt(lambda_lo * lambda_hi);
        if (!(mid > lambda_lo && mid < lambda_hi)) break;
        if (norm_at(mid) >= 1.0) {
            lambda_lo = mid;
            chi_lo = value_at(mid);
        } else {
            lambda_hi = mid;
            chi_hi = value_at(mid);
        }
    }
    return 0.5 * (chi_lo + chi_hi);
}

/// Componentwise first-order optimality report at a feasible point, using
/// exact bound comparison by default (atol 0); the solver's bound snapping
/// makes that meaningful.
struct StationarityReport {
    Vector residual;                             ///< per-coordinate violation of the sign conditions
    std::vector<std::size_t> active_set;         ///< coordinates sitting on a bound
    std::vector<std::size_t> strict_active_set;  ///< active coordinates with nonzero gradient
    std::optional<double> zeta;                  ///< min |g_i| over the strict active set

    double max_residual() const {
        double m = 0.0;
        for (double r : residual) m = std::max(m, r);
        return m;
    }
};

inline StationarityReport stationarity_report(const Vector& x, const Vector& g,
                                              const Bounds& bounds, double atol = 0.0) {
    const std::size_t n = x.size();
    if (g.size() != n)
        throw std::invalid_argument("stationarity_report: gradient has wrong dimension");
    StationarityReport rep;
    rep.residual.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const bool at_lower = x[i] <= bounds.lower[i] + atol;
        const bool at_upper = x[i] >= bounds.upper[i] - atol;
        if (at_lower)
            rep.residual[i] = std::max(0.0, -g[i]);
        else if (at_upper)
            rep.residual[i] = std::max(0.0, g[i]);
        else
            rep.residual[i] = std::abs(g[i]);
        if (at_lower || at_upper) {
            rep.active_set.push_back(i);
            if (g[i] != 0.0) rep.strict_active_set.push_back(i);
        }
    }
    if (!rep.strict_active_set.empty()) {
        double z = kInfinity;
        for (std::size_t i : rep.strict_active_set) z = std::min(z, std::abs(g[i]));
        rep.zeta = z;
    }
    return rep;
}

} // namespace dfls
