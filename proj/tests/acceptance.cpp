// Acceptance suite: runs every property the library promises end-to-end and
// prints one PASS/FAIL line per criterion. Exits nonzero if any criterion
// fails. Everything is pinned here: dimensions, seed counts, thresholds and
// tolerances.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "dfls/dfls.hpp"
#include "oracles.hpp"

using namespace dfls;
namespace fs = std::filesystem;

namespace {

struct Failures {
    long long checked = 0;
    std::vector<std::string> messages;

    void require(bool ok, const std::string& message) {
        ++checked;
        if (!ok && messages.size() < 8) messages.push_back(message);
        if (!ok && messages.size() >= 8) messages.back() = "... more failures suppressed";
    }
    bool ok() const { return messages.empty(); }
};

const std::vector<std::string> kAllProblems = {"quad-interior",    "quad-corner",
                                               "linear-edge",      "degenerate-bound",
                                               "rosenbrock-box",   "illcond-quad"};
const std::vector<std::string> kQuadratic = {"quad-interior", "quad-corner", "illcond-quad",
                                             "degenerate-bound"};
constexpr int kSeeds = 20;

std::vector<std::size_t> dims_for(const std::string& name) {
    if (name == "rosenbrock-box") return {2, 10};
    return {1, 2, 5, 10};
}

bool is_quadratic(const std::string& name) {
    for (const auto& q : kQuadratic)
        if (q == name) return true;
    return false;
}

Vector random_x0(const Bounds& bounds, std::uint64_t seed) {
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull ^ (seed * 2654435761ull + 17));
    Vector x(bounds.size());
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        std::uniform_real_distribution<double> d(bounds.lower[i], bounds.upper[i]);
        x[i] = d(rng);
    }
    return x;
}

struct RunContext {
    std::string name;
    std::size_t n;
    std::uint64_t seed;
    SuiteProblem sp;
    Trace trace;
    std::vector<double> chis; // filled for quadratic problems only

    std::string tag() const {
        return name + " n=" + std::to_string(n) + " seed=" + std::to_string(seed);
    }
    std::optional<double> next_delta(std::size_t k) const {
        if (k + 1 < trace.records.size()) return trace.records[k + 1].delta_k;
        if (!trace.records[k].truncated) return trace.terminal.final_delta;
        return std::nullopt;
    }
};

// ---- criteria accumulated over the shared run matrix ----------------------

void criterion1_stepsize(const RunContext& run, Failures& f) {
    const SolverParams params; // defaults
    const auto& recs = run.trace.records;
    for (std::size_t k = 0; k < recs.size(); ++k) {
        const auto nd = run.next_delta(k);
        if (!nd) continue;
        if (recs[k].success) {
            f.require(*nd >= recs[k].delta_k,
                      run.tag() + " k=" + std::to_string(k) + ": successful pair shrank Delta");
        } else {
            const double target = params.theta * recs[k].delta_k;
            f.require(std::abs(*nd - target) <= 1e-12 * target,
                      run.tag() + " k=" + std::to_string(k) + ": contraction is not theta*Delta");
        }
    }
}

void criterion2_lyapunov(const RunContext& run, Failures& f) {
    const SolverParams params;
    const double eta = default_eta(params.gamma, params.delta);
    const double c1 = lyapunov_c1(params, eta);
    const auto seq = lyapunov_sequence(run.trace, eta);
    for (std::size_t k = 1; k < seq.phi.size(); ++k) {
        const double d = run.trace.records[k].delta_k;
        f.require(seq.drops[k - 1] <= -c1 * d * d + 1e-12,
                  run.tag() + " k=" + std::to_string(k) + ": Lyapunov drop too small");
    }
}

void criterion3_chi_bound(const RunContext& run, Failures& f) {
    const SolverParams params;
    const auto constants =
        convergence_constants(params, run.sp.problem.n, run.sp.problem.lipschitz);
    for (std::size_t k = 0; k < run.trace.records.size(); ++k) {
        const auto nd = run.next_delta(k);
        if (!nd) continue;
        const double coeff = run.trace.records[k].success ? constants.chi_bound_success()
                                                          : constants.chi_bound_failure();
        f.require(run.chis[k] <= coeff * (*nd) * (1.0 + 1e-9),
                  run.tag() + " k=" + std::to_string(k) + ": chi exceeds its Delta bound");
    }
}

void criterion4_complexity(const RunContext& run, Failures& f) {
    const SolverParams params;
    const double eta = default_eta(params.gamma, params.delta);
    const double c1 = lyapunov_c1(params, eta);
    const auto constants =
        convergence_constants(params, run.sp.problem.n, run.sp.problem.lipschitz);
    const auto& rec0 = run.trace.records.front();
    const double phi0 = rec0.f_before + eta * rec0.delta_k * rec0.delta_k;
    const double gap_phi = phi0 - run.sp.f_min_over_box;
    const double gap_f = rec0.f_before - run.sp.f_min_over_box;
    const double nd = static_cast<double>(run.n);

    f.require(run.trace.terminal.reason == StopReason::DeltaTolerance,
              run.tag() + ": run was cut by a budget");
    for (double eps : {1e-1, 1e-2}) {
        const auto counters = complexity_counters(run.trace, run.chis, eps);
        const double inv_eps2 = 1.0 / (eps * eps);
        const double bound_k = std::floor(constants.c2 * constants.c2 * gap_phi / c1 * inv_eps2);
        f.require(static_cast<double>(counters.k_eps_count) <= bound_k,
                  run.tag() + ": |K_eps| exceeds its bound at eps=" + std::to_string(eps));
        f.require(counters.j_eps.has_value(),
                  run.tag() + ": chi never fell below eps=" + std::to_string(eps));
        if (!counters.j_eps) continue;
        const double bound_j = std::floor(nd * constants.c3 * constants.c3 * gap_phi / c1 * inv_eps2);
        f.require(static_cast<double>(*counters.j_eps) <= bound_j,
                  run.tag() + ": j_eps exceeds its bound at eps=" + std::to_string(eps));
        const double ratio = params.delta / (1.0 - params.delta);
        const double bound_nf =
            2.0 * nd * bound_j +
            std::floor(nd * constants.c3 * constants.c3 * gap_f /
                       (params.gamma * params.c * params.c) * std::max(1.0, ratio * ratio) *
                       inv_eps2);
        f.require(static_cast<double>(*counters.nf_at_j_eps) <= bound_nf,
                  run.tag() + ": Nf exceeds its bound at eps=" + std::to_string(eps));
    }
}

void criterion5_identification(const RunContext& run, Failures& f) {
    const auto rep = identification_report(run.trace, run.sp.problem);
    if (run.name == "degenerate-bound") {
        f.require(rep.vacuous, run.tag() + ": degenerate problem should give a vacuous report");
        return;
    }
    f.require(!rep.vacuous, run.tag() + ": expected strict-active coordinates");
    f.require(rep.first_identified_iteration.has_value(),
              run.tag() + ": active set never identified");
    if (!rep.first_identified_iteration) return;
    const Vector& xs = *run.sp.problem.known_solution;
    for (std::size_t k = static_cast<std::size_t>(*rep.first_identified_iteration);
         k < run.trace.records.size(); ++k)
        for (std::size_t i : rep.strict_active)
            f.require(run.trace.records[k].x_after[i] == xs[i],
                      run.tag() + " k=" + std::to_string(k) +
                          ": strict-active coordinate left its bound");
}

void criterion9_convergence(const RunContext& run, Failures& f) {
    if (run.trace.terminal.reason != StopReason::DeltaTolerance) return;
    const SolverParams params;
    const Problem& p = run.sp.problem;
    const Vector& x = run.trace.terminal.final_x;
    const Vector g = p.gradient(x);
    const double residual = stationarity_report(x, g, p.bounds).max_residual();
    f.require(residual <= 1e-5,
              run.tag() + ": final stationarity residual " + std::to_string(residual));
    const auto constants = convergence_constants(params, p.n, p.lipschitz);
    const double chi_cap = std::sqrt(static_cast<double>(p.n)) * constants.c3 * 1e-8 /
                           params.theta * (1.0 + 1e-9);
    const double chi_final = chi(x, g, p.bounds);
    f.require(chi_final <= chi_cap, run.tag() + ": final chi " + std::to_string(chi_final) +
                                        " above cap " + std::to_string(chi_cap));
}

// ---- standalone criteria ---------------------------------------------------

void criterion6_chi_oracle(Failures& f) {
    std::mt19937_64 rng(616);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + trial % 5;
        const auto inst = oracles::random_instance(rng, n);
        const double fast = chi(inst.x, inst.g, inst.bounds);
        const double slow = oracles::chi_enumeration(inst.x, inst.g, inst.bounds);
        f.require(std::abs(fast - slow) <= 1e-8 * std::abs(slow) + 1e-12,
                  "chi mismatch: bisection " + std::to_string(fast) + " vs enumeration " +
                      std::to_string(slow));
    }
}

void criterion7_cone_algebra(Failures& f) {
    std::mt19937_64 rng(717);
    std::uniform_real_distribution<double> eps_pick(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + trial % 5;
        const auto inst = oracles::random_instance(rng, n);
        Vector v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = -inst.g[i];

        const double chi_value = chi(inst.x, inst.g, inst.bounds);
        for (double eps : {0.0, 0.1, 1.0}) {
            const auto sets = eps_active_sets(inst.x, eps, inst.bounds);
            const Vector vt = project_tangent(v, sets);
            const Vector vn = project_normal(v, sets);
            for (std::size_t i = 0; i < n; ++i)
                f.require(vt[i] + vn[i] == v[i], "Moreau sum is not exact");
            f.require(std::abs(dot(vt, vn)) <= 1e-12, "Moreau parts are not orthogonal");

            const double bound = norm2(vt) +
                                 eps * std::sqrt(static_cast<double>(n)) * norm2(vn);
            f.require(chi_value <= bound + 1e-9 * (1.0 + bound),
                      "chi exceeds the projection bound");

            const double vt_norm = norm2(vt);
            if (vt_norm > 0.0) {
                double best = 0.0;
                for (const auto& d : tangent_generators(sets, n).directions)
                    best = std::max(best, -inst.g[d.index] * d.sign);
                f.require(vt_norm / std::sqrt(static_cast<double>(n)) <=
                              best + 1e-12 * (1.0 + best),
                          "no generator captures 1/sqrt(n) of the tangent part");
            }
        }
    }
}

void criterion8_hand_traces(Failures& f) {
    // (i) square objective from x=1: accept 0.5, expand to 1.0, reject 2.0
    {
        std::vector<double> points;
        Problem p;
        p.n = 1;
        p.bounds = uniform_box(1, -10.0, 10.0);
        p.objective = [&points](const Vector& x) {
            points.push_back(x[0]);
            return x[0] * x[0];
        };
        EvalCounter counter;
        const auto out = line_search({1.0}, 0, 1e-6, 0.5, 0.5, p.bounds, p, counter, 1.0, 1000);
        f.require(out.direction_sign == -1 && out.step == 1.0 && out.probes == 3,
                  "square hand trace: wrong outcome");
        f.require(points == std::vector<double>{0.5, 0.0, -1.0},
                  "square hand trace: wrong evaluation sequence");
    }
    // (ii) linear objective from x=1 on [0,10]: two evaluations, exact bound hit
    {
        std::vector<double> points;
        Problem p;
        p.n = 1;
        p.bounds = uniform_box(1, 0.0, 10.0);
        p.objective = [&points](const Vector& x) {
            points.push_back(x[0]);
            return x[0];
        };
        EvalCounter counter;
        const auto out = line_search({1.0}, 0, 1e-6, 0.5, 0.5, p.bounds, p, counter, 1.0, 1000);
        f.require(out.direction_sign == -1 && out.step == 1.0 && out.hit_bound &&
                      out.probes == 2,
                  "linear hand trace: wrong outcome");
        f.require(points == std::vector<double>{0.5, 0.0} &&
                      accepted_coordinate(1.0, out, 0.0, 10.0) == 0.0,
                  "linear hand trace: wrong evaluation sequence or bound value");
    }
    // (iii) two sweeps of the outer loop on (t-3)^2 from 0 on [0,10]
    {
        std::vector<double> points;
        Problem p;
        p.n = 1;
        p.bounds = uniform_box(1, 0.0, 10.0);
        p.objective = [&points](const Vector& x) {
            points.push_back(x[0]);
            return (x[0] - 3.0) * (x[0] - 3.0);
        };
        SolverParams params;
        params.initial_steps = {1.0};
        SolverState state;
        state.x = {0.0};
        state.tentative_steps = params.resolved_initial_steps(1);
        state.f_x = evaluate(p, state.counter, state.x);

        const IterateRecord r0 = step(state, p, params);
        f.require(r0.delta_k == 1.0 && r0.nu[0] == 1.0 && r0.alpha[0] == 2.0 &&
                      r0.dir_sign[0] == +1 && r0.success && r0.evals_cumulative == 4,
                  "outer-loop hand trace: iteration 0 mismatch");
        const IterateRecord r1 = step(state, p, params);
        f.require(r1.delta_k == 2.0 && r1.nu[0] == 2.0 && r1.alpha[0] == 0.0 && !r1.success &&
                      r1.evals_cumulative == 6 && state.tentative_steps[0] == 1.0,
                  "outer-loop hand trace: iteration 1 mismatch");
        f.require(points == std::vector<double>{0.0, 1.0, 2.0, 4.0, 0.0, 4.0},
                  "outer-loop hand trace: wrong evaluation sequence");
    }
}

void criterion10_determinism(Failures& f, const char* cli_path) {
    auto slurp = [](const fs::path& p) {
        std::ifstream is(p, std::ios::binary);
        std::ostringstream os;
        os << is.rdbuf();
        return os.str();
    };
    auto shell = [&](const std::string& args) {
        const std::string cmd = std::string(cli_path) + " " + args + " > /dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    };
    const std::vector<std::string> configs = {
        "run --problem quad-corner --n 4 --seed 1 --x0 random --trace ",
        "run --problem rosenbrock-box --n 2 --seed 3 --x0 center --trace ",
        "run --problem illcond-quad --n 5 --seed 7 --x0 random --trace ",
    };
    for (const auto& config : configs) {
        const fs::path a = fs::temp_directory_path() / "dfls_acc_det_a.jsonl";
        const fs::path b = fs::temp_directory_path() / "dfls_acc_det_b.jsonl";
        f.require(shell(config + a.string()) == 0, "determinism: run failed: " + config);
        f.require(shell(config + b.string()) == 0, "determinism: rerun failed: " + config);
        const std::string bytes = slurp(a);
        f.require(!bytes.empty() && bytes == slurp(b),
                  "determinism: traces differ for: " + config);
        fs::remove(a);
        fs::remove(b);
    }
}

struct CriterionLine {
    int id;
    std::string label;
    Failures failures;
};

} // namespace

int main(int, char**) {
    std::vector<CriterionLine> lines = {
        {1, "stepsize dynamics: contraction by theta on failures, monotone on successes", {}},
        {2, "Lyapunov decrease by at least c1*Delta^2", {}},
        {3, "chi bounded by the case-appropriate constant times the next Delta", {}},
        {4, "complexity counters within their bounds at eps in {1e-1, 1e-2}", {}},
        {5, "finite identification with bitwise bound equality; vacuous when degenerate", {}},
        {6, "chi bisection matches the 3^n enumeration oracle", {}},
        {7, "cone algebra: Moreau decomposition and projection inequalities", {}},
        {8, "line-search and outer-loop hand traces reproduce exactly", {}},
        {9, "delta-tol runs end nearly stationary in residual and chi", {}},
        {10, "repeated runs produce byte-identical traces", {}},
    };
    auto& c1 = lines[0].failures;
    auto& c2 = lines[1].failures;
    auto& c3 = lines[2].failures;
    auto& c4 = lines[3].failures;
    auto& c5 = lines[4].failures;
    auto& c9 = lines[8].failures;

    long long runs = 0;
    for (const auto& name : kAllProblems) {
        for (std::size_t n : dims_for(name)) {
            for (int seed = 0; seed < kSeeds; ++seed) {
                RunContext run;
                run.name = name;
                run.n = n;
                run.seed = static_cast<std::uint64_t>(seed);
                run.sp = make_problem(name, n, run.seed);
                const Vector x0 = random_x0(run.sp.problem.bounds, run.seed * 1000 + n);
                auto [trace, final_x] = solve(run.sp.problem, SolverParams{}, x0);
                run.trace = std::move(trace);
                ++runs;

                criterion1_stepsize(run, c1);
                criterion2_lyapunov(run, c2);
                if (is_quadratic(name)) {
                    run.chis = record_chi_values(run.trace, run.sp.problem);
                    criterion3_chi_bound(run, c3);
                    criterion4_complexity(run, c4);
                }
                const bool ident_dims = n == 2 || n == 5 || n == 10;
                if ((name == "quad-corner" || name == "linear-edge") && ident_dims)
                    criterion5_identification(run, c5);
                if (name == "degenerate-bound" && ident_dims)
                    criterion5_identification(run, c5);
                criterion9_convergence(run, c9);
            }
        }
    }

    criterion6_chi_oracle(lines[5].failures);
    criterion7_cone_algebra(lines[6].failures);
    criterion8_hand_traces(lines[7].failures);
    criterion10_determinism(lines[9].failures, DFLS_CLI_PATH);

    std::printf("run matrix: %lld solves over %zu problems\n", runs, kAllProblems.size());
    bool all_ok = true;
    for (const auto& line : lines) {
        const bool ok = line.failures.ok();
        all_ok = all_ok && ok;
        std::printf("criterion %2d %s  %s (%lld checks)\n", line.id, ok ? "PASS" : "FAIL",
                    line.label.c_str(), line.failures.checked);
        for (const auto& m : line.failures.messages) std::printf("    -> %s\n", m.c_str());
    }
    return all_ok ? 0 : 1;
}
