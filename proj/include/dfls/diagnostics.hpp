#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfls/core.hpp"
#include "dfls/criticality.hpp"
#include "dfls/solver.hpp"

/// \file diagnostics.hpp
/// Read-only verification over solve traces: the Lyapunov sequence
/// Phi_k = f(x_k) + eta*Delta_k^2, the constants eta/c1/c2/c3 built from the
/// solver parameters and the problem's smoothness metadata, the complexity
/// counters |K_eps| / j_eps / Nf, the per-record inequality checks, and the
/// active-set identification report. Nothing here re-runs the solver, so
/// every check is replayable from a persisted trace file.

namespace dfls {

/// Constants governing the guaranteed per-iteration decrease and the
/// worst-case complexity bounds, with their inputs echoed.
struct ConvergenceConstants {
    double eta = 0.0; ///< Lyapunov weight, in (0, gamma*(delta*(1-delta))^2)
    double c1 = 0.0;  ///< per-iteration decrease: Phi_k - Phi_{k-1} <= -c1*Delta_k^2
    double c2 = 0.0;  ///< |K_eps| bound coefficient
    double c3 = 0.0;  ///< j_eps bound coefficient
    double gamma = 0.0, delta = 0.0, theta = 0.0, c = 0.0;
    std::size_t n = 0;
    double L = 0.0, Lmax = 0.0, Mg = 0.0;

    /// Coefficient of Delta_{k+1} bounding chi(x_k) after a successful iteration.
    double chi_bound_success() const {
        const double rn = std::sqrt(static_cast<double>(n));
        return rn * ((gamma + L) / delta + L * rn + Mg / theta);
    }
    /// Same bound after an unsuccessful iteration.
    double chi_bound_failure() const { return std::sqrt(static_cast<double>(n)) * c3; }
};

inline double default_eta(double gamma, double delta) {
    const double t = delta * (1.0 - delta);
    return 0.5 * gamma * t * t;
}

/// The Lyapunov decrease constant; needs no smoothness metadata.
inline double lyapunov_c1(const SolverParams& p, double eta) {
    const double t = p.delta * (1.0 - p.delta);
    const double cap = p.gamma * t * t;
    if (!(eta > 0.0 && eta < cap))
        throw std::invalid_argument("eta must lie in (0, gamma*(delta*(1-delta))^2)");
    return std::min({p.gamma * p.c * p.c, cap - eta,
                     eta * (1.0 - p.theta * p.theta) / (p.theta * p.theta)});
}

/// Evaluates eta, c1, c2, c3 exactly as defined. eta defaults to half its
/// admissible upper limit.
inline ConvergenceConstants convergence_constants(const SolverParams& params, std::size_t n,
                                                  const std::optional<LipschitzInfo>& lipschitz,
                                                  std::optional<double> eta_opt = {}) {
    if (!lipschitz)
        throw std::invalid_argument("constants require L, Lmax, M_g");
    ConvergenceConstants k;
    k.gamma = params.gamma;
    k.delta = params.delta;
    k.theta = params.theta;
    k.c = params.c;
    k.n = n;
    k.L = lipschitz->L;
    k.Lmax = lipschitz->Lmax;
    k.Mg = lipschitz->Mg;
    k.eta = eta_opt.value_or(default_eta(params.gamma, params.delta));
    k.c1 = lyapunov_c1(params, k.eta);
    k.c3 = (params.gamma + k.Lmax + k.Mg) / params.theta;
    const double rn = std::sqrt(static_cast<double>(n));
    k.c2 = rn * std::max((params.gamma + k.L) / params.delta + k.L * rn + k.Mg / params.theta, k.c3);
    return k;
}

struct LyapunovSequence {
    std::vector<double> phi;   ///< phi[k] = f(x_k) + eta*Delta_k^2, one per record
    std::vector<double> drops; ///< drops[k-1] = phi[k] - phi[k-1]
};

inline LyapunovSequence lyapunov_sequence(const Trace& trace, double eta) {
    if (trace.records.empty())
        throw std::invalid_argument("lyapunov_sequence: trace has no records");
    LyapunovSequence seq;
    seq.phi.reserve(trace.records.size());
    for (const IterateRecord& r : trace.records)
        seq.phi.push_back(r.f_before + eta * r.delta_k * r.delta_k);
    for (std::size_t k = 1; k < seq.phi.size(); ++k)
        seq.drops.push_back(seq.phi[k] - seq.phi[k - 1]);
    return seq;
}

/// chi(x_k) at every record's entry point; requires a gradient oracle.
inline std::vector<double> record_chi_values(const Trace& trace, const Problem& problem) {
    if (!problem.gradient)
        throw std::invalid_argument("record_chi_values: problem has no gradient oracle");
    std::vector<double> out;
    out.reserve(trace.records.size());
    for (const IterateRecord& r : trace.records)
        out.push_back(chi(r.x_before, problem.gradient(r.x_before), problem.bounds));
    return out;
}

struct ComplexityCounters {
    long long k_eps_count = 0;            ///< records with chi(x_k) >= eps
    std::optional<long long> j_eps;       ///< first record index with chi(x_k) < eps
    std::optional<long long> nf_at_j_eps; ///< cumulative evaluations at that record
};

inline ComplexityCounters complexity_counters(const Trace& trace,
                                              const std::vector<double>& chi_values,
                                              double eps) {
    if (chi_values.size() != trace.records.size())
        throw std::invalid_argument("complexity_counters: chi values and records differ in length");
    ComplexityCounters out;
    for (std::size_t k = 0; k < chi_values.size(); ++k) {
        if (chi_values[k] >= eps) {
            ++out.k_eps_count;
        } else if (!out.j_eps) {
            out.j_eps = static_cast<long long>(k);
            out.nf_at_j_eps = trace.records[k].evals_cumulative;
        }
    }
    return out;
}

struct CheckResult {
    enum class Status { Pass, Fail, Skipped };
    std::string name;
    Status status = Status::Pass;
    std::string detail;
    double worst_margin = kInfinity; ///< min over items of (allowed - actual); >= 0 passes
    long long items_checked = 0;
    long long violations = 0;

    bool failed() const { return status == Status::Fail; }
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    std::vector<std::string> notes;

    bool all_passed() const {
        for (const CheckResult& c : checks)
            if (c.failed()) return false;
        return true;
    }
};

namespace detail {

inline void fold(CheckResult& c, double slack) {
    ++c.items_checked;
    c.worst_margin = std::min(c.worst_margin, slack);
    if (!(slack >= 0.0)) {
        ++c.violations;
        c.status = CheckResult::Status::Fail;
    }
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace detail

/// Runs every inequality the trace is supposed to satisfy and reports each
/// with its worst margin:
///   (a) stepsize dynamics across consecutive records,
///   (b) Lyapunov decrease with constant c1,
///   (c) the chi(x_k) <= C * Delta_{k+1} bound, case split on success,
///   (d) |K_eps| against its complexity bound,
///   (e) j_eps against its bound,
///   (f) evaluations up to j_eps against the two-term bound.
/// (a) and (b) need no metadata; (c)-(f) are skipped with a marker when the
/// gradient or the smoothness metadata is missing.
inline VerificationReport check_trace(const Trace& trace, const Problem& problem,
                                      const SolverParams& params,
                                      const std::vector<double>& eps_list = {1e-1, 1e-2},
                                      std::optional<double> eta_opt = {}) {
    VerificationReport report;
    const auto& recs = trace.records;
    const std::size_t n_rec = recs.size();
    const double eta = eta_opt.value_or(default_eta(params.gamma, params.delta));
    const double c1 = lyapunov_c1(params, eta);

    if (trace.terminal.reason == StopReason::Budget)
        report.notes.push_back("budget-truncated run: |K_eps| is a lower bound on the full count");

    // Delta_{k+1} for record k: the next record's entry value, or the
    // terminal stepsize after the last complete sweep.
    auto next_delta = [&](std::size_t k) -> std::optional<double> {
        if (k + 1 < n_rec) return recs[k + 1].delta_k;
        if (!recs[k].truncated) return trace.terminal.final_delta;
        return std::nullopt;
    };

    {
        CheckResult a;
        a.name = "stepsize-dynamics";
        for (std::size_t k = 0; k < n_rec; ++k) {
            const auto nd = next_delta(k);
            if (!nd) continue;
            if (recs[k].success) {
                detail::fold(a, *nd - recs[k].delta_k + 1e-12);
            } else {
                const double target = params.theta * recs[k].delta_k;
                detail::fold(a, 1e-12 * target - std::abs(*nd - target));
            }
        }
        a.detail = a.items_checked == 0 ? "insufficient records"
                                        : std::to_string(a.items_checked) + " pairs, worst margin " +
                                              detail::fmt(a.worst_margin);
        report.checks.push_back(std::move(a));
    }

    {
        CheckResult b;
        b.name = "lyapunov-decrease";
        if (n_rec >= 2) {
            const LyapunovSequence seq = lyapunov_sequence(trace, eta);
            for (std::size_t k = 1; k < n_rec; ++k) {
                const double allowed = -c1 * recs[k].delta_k * recs[k].delta_k + 1e-12;
                detail::fold(b, allowed - seq.drops[k - 1]);
            }
        }
        b.detail = b.items_checked == 0 ? "insufficient records"
                                        : std::to_string(b.items_checked) + " pairs, worst margin " +
                                              detail::fmt(b.worst_margin);
        report.checks.push_back(std::move(b));
    }

    const bool have_gradient = static_cast<bool>(problem.gradient);
    const bool have_lipschitz = problem.lipschitz.has_value();
    const bool have_fmin = problem.f_min.has_value();

    std::vector<double> chis;
    std::optional<ConvergenceConstants> constants;
    if (have_gradient && have_lipschitz) {
        chis = record_chi_values(trace, problem);
        constants = convergence_constants(params, problem.n, problem.lipschitz, eta);
    }

    {
        CheckResult c;
        c.name = "criticality-bound";
        if (!have_gradient || !have_lipschitz) {
            c.status = CheckResult::Status::Skipped;
            c.detail = "skipped: gradient or smoothness metadata missing";
        } else {
            for (std::size_t k = 0; k < n_rec; ++k) {
                const auto nd = next_delta(k);
                if (!nd) continue;
                const double coeff = recs[k].success ? constants->chi_bound_success()
                                                     : constants->chi_bound_failure();
                detail::fold(c, coeff * (*nd) * (1.0 + 1e-9) - chis[k]);
            }
            c.detail = c.items_checked == 0 ? "insufficient records"
                                            : std::to_string(c.items_checked) + " records, worst margin " +
                                                  detail::fmt(c.worst_margin);
        }
        report.checks.push_back(std::move(c));
    }

    for (double eps : eps_list) {
        const std::string suffix = "[eps=" + detail::fmt(eps) + "]";
        CheckResult d, e, f;
        d.name = "k-eps-bound" + suffix;
        e.name = "j-eps-bound" + suffix;
        f.name = "nf-bound" + suffix;
        if (!have_gradient || !have_lipschitz || !have_fmin) {
            for (CheckResult* r : {&d, &e, &f}) {
                r->status = CheckResult::Status::Skipped;
                r->detail = "skipped: gradient, smoothness metadata or f_min missing";
            }
        } else if (n_rec == 0) {
            for (CheckResult* r : {&d, &e, &f}) r->detail = "insufficient records";
        } else {
            const ComplexityCounters counters = complexity_counters(trace, chis, eps);
            const double phi0 = recs[0].f_before + eta * recs[0].delta_k * recs[0].delta_k;
            const double f0 = recs[0].f_before;
            const double gap_phi = phi0 - *problem.f_min;
            const double gap_f = f0 - *problem.f_min;
            const double inv_eps2 = 1.0 / (eps * eps);

            const double bound_d = std::floor(constants->c2 * constants->c2 * gap_phi / c1 * inv_eps2);
            detail::fold(d, bound_d - static_cast<double>(counters.k_eps_count));
            d.detail = "measured " + std::to_string(counters.k_eps_count) + " <= bound " + detail::fmt(bound_d);

            const double nd = static_cast<double>(problem.n);
            const double bound_e = std::floor(nd * constants->c3 * constants->c3 * gap_phi / c1 * inv_eps2);
            if (counters.j_eps) {
                detail::fold(e, bound_e - static_cast<double>(*counters.j_eps));
                e.detail = "measured " + std::to_string(*counters.j_eps) + " <= bound " + detail::fmt(bound_e);

                const double ratio = params.delta / (1.0 - params.delta);
                const double bound_f =
                    2.0 * nd * bound_e +
                    std::floor(nd * constants->c3 * constants->c3 * gap_f /
                               (params.gamma * params.c * params.c) * std::max(1.0, ratio * ratio) * inv_eps2);
                detail::fold(f, bound_f - static_cast<double>(*counters.nf_at_j_eps));
                f.detail = "measured " + std::to_string(*counters.nf_at_j_eps) + " <= bound " + detail::fmt(bound_f);
            } else {
                e.detail = "j_eps not reached within the trace; bound vacuous";
                f.detail = "j_eps not reached within the trace; bound vacuous";
            }
        }
        report.checks.push_back(std::move(d));
        report.checks.push_back(std::move(e));
        report.checks.push_back(std::move(f));
    }

    return report;
}

/// Where and when the strict-active coordinates of the reference solution
/// were placed exactly on their bounds, permanently within the trace.
struct IdentificationReport {
    Vector reference_point;
    std::vector<std::size_t> strict_active;
    std::optional<double> zeta;
    std::optional<long long> first_identified_iteration; ///< nullopt = never identified
    bool vacuous = false;
    std::string note;
};

inline IdentificationReport identification_report(const Trace& trace, const Problem& problem) {
    if (!problem.known_solution)
        throw std::invalid_argument("identification_report: problem has no known solution");
    if (!problem.gradient)
        throw std::invalid_argument("identification_report: problem has no gradient oracle");
    IdentificationReport rep;
    rep.reference_point = *problem.known_solution;
    const Vector g = problem.gradient(rep.reference_point);
    const StationarityReport stat = stationarity_report(rep.reference_point, g, problem.bounds);
    if (stat.max_residual() > 1e-8)
        throw std::invalid_argument("reference point not stationary");
    rep.strict_active = stat.strict_active_set;
    rep.zeta = stat.zeta;

    if (rep.strict_active.empty()) {
        rep.vacuous = true;
        rep.note = "no strict-active coordinates; identification vacuous";
        return rep;
    }
    if (trace.records.empty()) {
        rep.note = "never: trace has no records";
        return rep;
    }

    // Smallest index after which every record keeps all strict-active
    // coordinates bitwise on the reference values.
    long long last_bad = -1;
    for (std::size_t k = 0; k < trace.records.size(); ++k)
        for (std::size_t i : rep.strict_active)
            if (trace.records[k].x_after[i] != rep.reference_point[i]) {
                last_bad = static_cast<long long>(k);
                break;
            }
    if (last_bad + 1 == static_cast<long long>(trace.records.size())) {
        rep.note = "never: last record still off the reference bounds";
        return rep;
    }
    rep.first_identified_iteration = last_bad + 1;
    return rep;
}

} // namespace dfls
