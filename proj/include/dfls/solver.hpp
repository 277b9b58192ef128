#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "dfls/core.hpp"
#include "dfls/line_search.hpp"

/// \file solver.hpp
/// The outer loop: sweep coordinates 1..n in fixed order, run the line
/// search at each intermediate point, classify the iteration as successful
/// (the iterate moved) or unsuccessful, update the per-coordinate tentative
/// stepsizes, and emit one trace record per iteration.

namespace dfls {

struct SolverState {
    long long k = 0;
    Vector x;                ///< current iterate, feasible at all times
    Vector tentative_steps;  ///< strictly positive at all times
    double f_x = 0.0;        ///< cached objective value at x
    EvalCounter counter;
};

/// One iteration's full state, the substrate of every trace check.
struct IterateRecord {
    long long k = 0;
    Vector x_before;
    Vector x_after;
    double delta_k = 0.0;        ///< max tentative stepsize at entry
    Vector nu;                   ///< per-coordinate stepsizes handed to the line search
    Vector alpha;                ///< per-coordinate accepted steps (0 on failure)
    std::vector<int> dir_sign;   ///< sign of the explored direction; not meaningful when alpha == 0
    std::vector<int> probes;     ///< per-coordinate objective evaluations
    std::vector<int> expansions; ///< per-coordinate accepted expansion steps
    std::vector<bool> hit_bound; ///< per-coordinate exact bound hits
    bool success = false;        ///< true iff some alpha[i] > 0
    bool truncated = false;      ///< the evaluation budget ran out mid-sweep
    double f_before = 0.0;
    double f_after = 0.0;
    long long evals_cumulative = 0;
    std::vector<Vector> y_stages; ///< intermediate points y^1..y^{n+1}; verbose mode only
};

enum class StopReason { DeltaTolerance, MaxIterations, Budget };

inline std::string to_string(StopReason r) {
    switch (r) {
        case StopReason::DeltaTolerance: return "delta-tol";
        case StopReason::MaxIterations: return "max-iterations";
        case StopReason::Budget: return "budget";
    }
    return "unknown";
}

inline StopReason stop_reason_from_string(const std::string& s) {
    if (s == "delta-tol") return StopReason::DeltaTolerance;
    if (s == "max-iterations") return StopReason::MaxIterations;
    if (s == "budget") return StopReason::Budget;
    throw std::invalid_argument("unknown stop reason: " + s);
}

struct TerminalSummary {
    StopReason reason = StopReason::DeltaTolerance;
    Vector final_x;
    double final_f = 0.0;
    double final_delta = 0.0;
    long long iterations = 0;
    long long total_evaluations = 0;
};

/// Records are append-only and never rewritten once emitted.
struct Trace {
    std::vector<IterateRecord> records;
    TerminalSummary terminal;
};

struct SolveOptions {
    bool record_stages = false; ///< record intermediate sweep points in each record
};

inline double max_tentative_step(const Vector& steps) {
    return *std::max_element(steps.begin(), steps.end());
}

/// Runs one full coordinate sweep from the current state and advances it.
/// The objective value at the evolving intermediate point is threaded
/// through the sweep, so each coordinate costs at most two probe
/// evaluations plus its accepted expansions.
inline IterateRecord step(SolverState& state, const Problem& problem,
                          const SolverParams& params, bool record_stages = false) {
    const std::size_t n = problem.n;
    IterateRecord rec;
    rec.k = state.k;
    rec.x_before = state.x;
    rec.f_before = state.f_x;
    rec.delta_k = max_tentative_step(state.tentative_steps);

    rec.nu.assign(n, 0.0);
    rec.alpha.assign(n, 0.0);
    rec.dir_sign.assign(n, +1);
    rec.probes.assign(n, 0);
    rec.expansions.assign(n, 0);
    rec.hit_bound.assign(n, false);
    for (std::size_t i = 0; i < n; ++i)
        rec.nu[i] = std::max(state.tentative_steps[i], params.c * rec.delta_k);

    Vector y = state.x;
    double f_y = state.f_x;
    if (record_stages) rec.y_stages.push_back(y);

    for (std::size_t i = 0; i < n; ++i) {
        const LineSearchOutcome out =
            line_search(y, i, params.gamma, params.delta, rec.nu[i], problem.bounds,
                        problem, state.counter, f_y, params.max_evaluations);
        rec.alpha[i] = out.step;
        rec.dir_sign[i] = out.direction_sign;
        rec.probes[i] = out.probes;
        rec.expansions[i] = out.expansions;
        rec.hit_bound[i] = out.hit_bound;
        if (out.step > 0.0) {
            y[i] = accepted_coordinate(y[i], out, problem.bounds.lower[i], problem.bounds.upper[i]);
            f_y = out.f_new;
        }
        if (record_stages) rec.y_stages.push_back(y);
        if (out.budget_exhausted) {
            rec.truncated = true;
            break;
        }
    }

    rec.x_after = y;
    rec.f_after = f_y;
    rec.evals_cumulative = state.counter.count;
    for (std::size_t i = 0; i < n; ++i)
        if (rec.alpha[i] > 0.0) { rec.success = true; break; }

    // Tentative stepsize update. A truncated sweep never feeds another
    // iteration, so its update is skipped.
    if (!rec.truncated) {
        if (rec.success) {
            for (std::size_t i = 0; i < n; ++i)
                state.tentative_steps[i] = rec.alpha[i] > 0.0 ? rec.alpha[i] : rec.nu[i];
        } else {
            for (std::size_t i = 0; i < n; ++i)
                state.tentative_steps[i] = params.theta * rec.nu[i];
        }
    }

    state.x = y;
    state.f_x = f_y;
    ++state.k;
    return rec;
}

/// Iterates step() until the max tentative stepsize reaches stop_delta or a
/// budget runs out. Returns the full trace and the final iterate.
inline std::pair<Trace, Vector> solve(const Problem& problem, const SolverParams& params,
                                      const Vector& x0, const SolveOptions& opts = {}) {
    validate_params(params, problem.n);
    problem.bounds.validate();
    if (x0.size() != problem.n)
        throw std::invalid_argument("x0 has dimension " + std::to_string(x0.size()) +
                                    ", expected " + std::to_string(problem.n));
    if (!problem.bounds.contains(x0))
        throw std::domain_error("x0 is infeasible");

    SolverState state;
    state.x = x0;
    state.tentative_steps = params.resolved_initial_steps(problem.n);
    state.f_x = evaluate(problem, state.counter, x0);
    if (!std::isfinite(state.f_x))
        throw std::runtime_error("objective is not finite at x0");

    Trace trace;
    StopReason reason;
    while (true) {
        const double delta = max_tentative_step(state.tentative_steps);
        if (delta <= params.stop_delta) { reason = StopReason::DeltaTolerance; break; }
        if (state.k >= params.max_iterations) { reason = StopReason::MaxIterations; break; }
        if (state.counter.count >= params.max_evaluations) { reason = StopReason::Budget; break; }
        IterateRecord rec = step(state, problem, params, opts.record_stages);
        const bool truncated = rec.truncated;
        trace.records.push_back(std::move(rec));
        if (truncated) { reason = StopReason::Budget; break; }
    }

    trace.terminal.reason = reason;
    trace.terminal.final_x = state.x;
    trace.terminal.final_f = state.f_x;
    trace.terminal.final_delta = max_tentative_step(state.tentative_steps);
    trace.terminal.iterations = state.k;
    trace.terminal.total_evaluations = state.counter.count;
    return {std::move(trace), state.x};
}

} // namespace dfls
