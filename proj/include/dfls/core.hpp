#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

/// \file core.hpp
/// Domain types shared by the whole library: box bounds, the counted
/// objective oracle, solver parameters and their validation.

namespace dfls {

using Vector = std::vector<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Per-coordinate box constraints l <= x <= u. Entries may be -inf (lower)
/// or +inf (upper); lower[i] < upper[i] must hold strictly for every i.
struct Bounds {
    Vector lower;
    Vector upper;

    std::size_t size() const noexcept { return lower.size(); }

    void validate() const {
        if (lower.size() != upper.size())
            throw std::invalid_argument("bounds: lower and upper must have the same length");
        for (std::size_t i = 0; i < lower.size(); ++i) {
            if (std::isnan(lower[i]) || std::isnan(upper[i]))
                throw std::invalid_argument("bounds: NaN entry at coordinate " + std::to_string(i));
            if (!(lower[i] < upper[i]))
                throw std::invalid_argument("bounds: lower[" + std::to_string(i) +
                                            "] must be strictly below upper[" + std::to_string(i) + "]");
        }
    }

    /// Exact componentwise feasibility, no tolerance. NaN entries fail.
    bool contains(const Vector& x) const noexcept {
        if (x.size() != lower.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (!(lower[i] <= x[i] && x[i] <= upper[i])) return false;
        return true;
    }
};

/// All coordinates share the same interval [lo, hi].
inline Bounds uniform_box(std::size_t n, double lo, double hi) {
    return Bounds{Vector(n, lo), Vector(n, hi)};
}

/// Gradient smoothness metadata used by the verification layer.
/// All entries are valid upper bounds over the feasible box; Lmax is
/// always max_i Li by construction.
struct LipschitzInfo {
    double L = 0.0;  ///< Lipschitz constant of the full gradient
    Vector Li;       ///< per-coordinate Lipschitz constants
    double Lmax = 0.0;
    double Mg = 0.0; ///< upper bound on the gradient norm over the box

    static LipschitzInfo from_components(double L, Vector Li, double Mg) {
        LipschitzInfo info;
        info.L = L;
        info.Lmax = Li.empty() ? 0.0 : *std::max_element(Li.begin(), Li.end());
        info.Li = std::move(Li);
        info.Mg = Mg;
        return info;
    }
};

/// A bound-constrained minimization problem. The objective is a black-box
/// oracle; gradient and smoothness metadata are optional extras consumed
/// only by the verification layer, never by the solver.
struct Problem {
    std::size_t n = 0;
    std::function<double(const Vector&)> objective;
    Bounds bounds;
    std::function<Vector(const Vector&)> gradient; ///< may be empty
    std::optional<LipschitzInfo> lipschitz;
    std::optional<Vector> known_solution;
    std::optional<double> f_min; ///< analytic minimum over the box, when known
};

/// Counts objective evaluations. One counter is owned by exactly one
/// solve session; sessions never share counters.
struct EvalCounter {
    long long count = 0;
};

struct SolverParams {
    double theta = 0.5;  ///< stepsize contraction factor, in (0,1)
    double delta = 0.5;  ///< extrapolation growth is 1/delta, delta in (0,1)
    double gamma = 1e-6; ///< sufficient-decrease coefficient, > 0
    double c = 0.5;      ///< couples per-coordinate stepsizes to their max, in (0,1]
    Vector initial_steps;           ///< per-coordinate initial tentative steps; empty means all ones
    double stop_delta = 1e-8;       ///< stop once the max tentative stepsize falls below this
    long long max_iterations = 1'000'000;
    long long max_evaluations = 10'000'000;

    Vector resolved_initial_steps(std::size_t n) const {
        if (initial_steps.empty()) return Vector(n, 1.0);
        return initial_steps;
    }
};

/// Validates every range constraint; throws std::invalid_argument naming
/// the first violated one.
inline void validate_params(const SolverParams& p, std::size_t n) {
    if (!(p.theta > 0.0 && p.theta < 1.0))
        throw std::invalid_argument("theta must lie in (0,1)");
    if (!(p.delta > 0.0 && p.delta < 1.0))
        throw std::invalid_argument("delta must lie in (0,1)");
    if (!(p.gamma > 0.0) || !std::isfinite(p.gamma))
        throw std::invalid_argument("gamma must be positive and finite");
    if (!(p.c > 0.0 && p.c <= 1.0))
        throw std::invalid_argument("c must lie in (0,1]");
    const Vector steps = p.resolved_initial_steps(n);
    if (steps.size() != n)
        throw std::invalid_argument("initial_steps must have length " + std::to_string(n));
    for (std::size_t i = 0; i < steps.size(); ++i)
        if (!(steps[i] > 0.0) || !std::isfinite(steps[i]))
            throw std::invalid_argument("initial_steps[" + std::to_string(i) + "] must be positive and finite");
    if (!(p.stop_delta > 0.0))
        throw std::invalid_argument("stop_delta must be positive");
    if (p.max_iterations <= 0)
        throw std::invalid_argument("max_iterations must be positive");
    if (p.max_evaluations <= 0)
        throw std::invalid_argument("max_evaluations must be positive");
}

/// The single choke point for objective evaluations. Feasibility is checked
/// exactly and never silently repaired; the counter is incremented once per
/// successful call.
inline double evaluate(const Problem& problem, EvalCounter& counter, const Vector& x) {
    if (x.size() != problem.n)
        throw std::invalid_argument("evaluate: point has dimension " + std::to_string(x.size()) +
                                    ", expected " + std::to_string(problem.n));
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!(problem.bounds.lower[i] <= x[i] && x[i] <= problem.bounds.upper[i]))
            throw std::domain_error("evaluate: infeasible point at coordinate " + std::to_string(i));
    ++counter.count;
    return problem.objective(x);
}

} // namespace dfls
