#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "dfls/core.hpp"

/// \file line_search.hpp
/// Two-sided coordinate line search with extrapolation. Given a feasible
/// point and a stepsize nu, the search first checks that nu fits inside the
/// box along at least one of -e_i / +e_i, then probes -e_i and +e_i (in that
/// fixed order) for sufficient decrease, and finally expands an accepted
/// step geometrically while the decrease condition keeps holding and the
/// bound has not been reached.

namespace dfls {

struct LineSearchOutcome {
    int direction_sign = +1;  ///< sign s of the explored direction d = s*e_i
    double step = 0.0;        ///< accepted stepsize; 0 means failure
    int probes = 0;           ///< objective evaluations performed by this call
    int expansions = 0;       ///< accepted expansion steps beyond the first probe
    bool hit_bound = false;   ///< step equals the feasible distance along d
    double f_new = 0.0;       ///< objective at the accepted point; f(x) when step == 0
    bool budget_exhausted = false; ///< ran out of evaluations; step is the best accepted so far
};

/// Hard cap on accepted expansions per line search. The expansion loop is
/// finite whenever the objective is bounded below on the box; reaching the
/// cap signals a misconfigured problem and is reported as an error.
inline constexpr int kMaxExpansions = 200;

namespace detail {

/// Coordinate value of the point x + s*alpha*e_i. When the step equals the
/// feasible distance the coordinate is assigned the stored bound value
/// verbatim; otherwise the sum is guarded against the 1-ulp overshoot that
/// x_i +- alpha can produce right next to a bound.
inline double probe_coordinate(double xi, int sign, double alpha, bool at_bound,
                               double li, double ui) {
    if (at_bound) return sign < 0 ? li : ui;
    double c = sign < 0 ? xi - alpha : xi + alpha;
    if (c < li) c = li;
    if (c > ui) c = ui;
    return c;
}

} // namespace detail

/// Coordinate value produced by applying an accepted outcome at x_i.
/// Matches bitwise the point whose objective value the search reported.
inline double accepted_coordinate(double xi, const LineSearchOutcome& out,
                                  double li, double ui) {
    return detail::probe_coordinate(xi, out.direction_sign, out.step, out.hit_bound, li, ui);
}

/// Explores coordinate i of x with stepsize nu. f_x is the objective value
/// at x, supplied by the caller and never re-evaluated, so a failed
/// two-sided probe costs exactly 2 evaluations and a failed gate costs 0.
///
/// max_evaluations is an absolute cap on counter.count; when it would be
/// exceeded the search returns the best accepted step so far with
/// budget_exhausted set.
inline LineSearchOutcome line_search(const Vector& x, std::size_t i, double gamma,
                                     double delta, double nu, const Bounds& bounds,
                                     const Problem& problem, EvalCounter& counter,
                                     double f_x, long long max_evaluations) {
    const double li = bounds.lower[i];
    const double ui = bounds.upper[i];
    const double xi = x[i];
    const double dist_up = ui - xi;   // extended reals: may be +inf
    const double dist_down = xi - li;

    LineSearchOutcome out;
    out.f_new = f_x;

    // Gate: nu must fit inside the box along at least one direction. The
    // comparison is strict, so nu exactly equal to the larger distance
    // proceeds to the probes.
    if (nu > std::max(dist_up, dist_down)) return out;

    Vector probe = x;
    auto eval_at = [&](int sign, double alpha, bool at_bound) {
        probe[i] = detail::probe_coordinate(xi, sign, alpha, at_bound, li, ui);
        ++out.probes;
        double f = evaluate(problem, counter, probe);
        if (!std::isfinite(f))
            throw std::runtime_error("line_search: non-finite objective value while exploring coordinate " +
                                     std::to_string(i));
        return f;
    };
    auto budget_left = [&]() { return counter.count < max_evaluations; };

    const double abar = nu;
    int sign = 0;
    double alpha_max = 0.0;
    double f_alpha = 0.0;

    // The sufficient decrease f(new) <= f(old) - gamma*s^2 is evaluated as
    // f(old) - f(new) >= gamma*s^2. The forms agree in exact arithmetic, but
    // once gamma*s^2 falls below one ulp of f the right-hand side of the
    // first form rounds back to f(old) and ties would count as decrease,
    // leaving the iterate free to bounce between equal-valued points.
    auto decreased = [gamma](double f_old, double f_new, double s) {
        return f_old - f_new >= gamma * s * s;
    };

    // Probe -e_i first, then +e_i. A probe runs only if the step fits the
    // box on its side.
    if (abar <= dist_down) {
        if (!budget_left()) { out.budget_exhausted = true; return out; }
        const double f_minus = eval_at(-1, abar, abar == dist_down);
        if (decreased(f_x, f_minus, abar)) {
            sign = -1;
            alpha_max = dist_down;
            f_alpha = f_minus;
        }
    }
    if (sign == 0 && abar <= dist_up) {
        if (!budget_left()) { out.budget_exhausted = true; return out; }
        const double f_plus = eval_at(+1, abar, abar == dist_up);
        if (decreased(f_x, f_plus, abar)) {
            sign = +1;
            alpha_max = dist_up;
            f_alpha = f_plus;
        }
    }
    if (sign == 0) return out; // both probes failed or were infeasible

    // Extrapolation: grow the accepted step by 1/delta, capped at the
    // distance to the bound, while the sufficient decrease persists.
    double alpha = abar;
    while (alpha < alpha_max) {
        const double omega = std::min(alpha / delta, alpha_max);
        if (!budget_left()) { out.budget_exhausted = true; break; }
        const double f_omega = eval_at(sign, omega, omega == alpha_max);
        if (!decreased(f_alpha, f_omega, omega - alpha)) break;
        alpha = omega;
        f_alpha = f_omega;
        if (++out.expansions >= kMaxExpansions)
            throw std::runtime_error("line_search: expansion cap (" + std::to_string(kMaxExpansions) +
                                     ") reached on coordinate " + std::to_string(i) +
                                     "; objective appears unbounded below along this direction");
    }

    out.direction_sign = sign;
    out.step = alpha;
    out.hit_bound = alpha == alpha_max;
    out.f_new = f_alpha;
    return out;
}

} // namespace dfls
