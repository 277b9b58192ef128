// Command-line front end: run solves on the built-in problems, persist
// line-delimited traces, verify the recorded inequalities, and list the
// problem registry.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or validation
// error, 3 I/O or corrupt trace data.

#include <cstdio>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dfls/dfls.hpp"

namespace {

using namespace dfls;

std::string full_precision(double v) { return nlohmann::json(v).dump(); }

std::uint64_t mix_tag(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

Vector resolve_x0(const std::string& policy, const Vector& explicit_values, const Bounds& bounds,
                  std::uint64_t seed) {
    const std::size_t n = bounds.size();
    Vector x(n);
    if (policy == "explicit") {
        if (explicit_values.size() != n)
            throw std::invalid_argument("--x0-values must supply exactly " + std::to_string(n) +
                                        " entries");
        return explicit_values;
    }
    if (policy == "center") {
        for (std::size_t i = 0; i < n; ++i) {
            const bool lf = std::isfinite(bounds.lower[i]);
            const bool uf = std::isfinite(bounds.upper[i]);
            if (lf && uf)
                x[i] = 0.5 * (bounds.lower[i] + bounds.upper[i]);
            else if (lf)
                x[i] = bounds.lower[i] + 1.0;
            else if (uf)
                x[i] = bounds.upper[i] - 1.0;
            else
                x[i] = 0.0;
        }
        return x;
    }
    if (policy == "corner") {
        for (std::size_t i = 0; i < n; ++i) {
            if (std::isfinite(bounds.lower[i]))
                x[i] = bounds.lower[i];
            else if (std::isfinite(bounds.upper[i]))
                x[i] = bounds.upper[i];
            else
                x[i] = 0.0;
        }
        return x;
    }
    if (policy == "random") {
        std::mt19937_64 rng(mix_tag(seed, 0x0f0f));
        for (std::size_t i = 0; i < n; ++i) {
            const double lo = std::isfinite(bounds.lower[i]) ? bounds.lower[i]
                                                             : std::max(-1e3, bounds.lower[i]);
            const double hi = std::isfinite(bounds.upper[i]) ? bounds.upper[i]
                                                             : std::min(1e3, bounds.upper[i]);
            std::uniform_real_distribution<double> d(std::isfinite(lo) ? lo : -1e3,
                                                     std::isfinite(hi) ? hi : 1e3);
            x[i] = d(rng);
        }
        return x;
    }
    throw std::invalid_argument("unknown x0 policy '" + policy + "'");
}

struct RunFlags {
    std::string problem;
    std::size_t n = 2;
    std::uint64_t seed = 0;
    SolverParams params;
    Vector alpha0;
    std::string x0_policy = "center";
    Vector x0_values;
    std::string trace_path;
    bool verbose_trace = false;
    long long batch_seeds = 0; // > 0: run seeds 0..batch_seeds-1, emit a CSV summary
    std::vector<double> eps = {1e-1, 1e-2};
    std::string csv_path;
    unsigned jobs = 1;
};

struct RunResult {
    std::string summary_line;
    std::string csv_row;
};

RunResult run_single(const RunFlags& flags, std::uint64_t seed, bool want_csv) {
    const SuiteProblem sp = make_problem(flags.problem, flags.n, seed);
    SolverParams params = flags.params;
    if (!flags.alpha0.empty()) {
        params.initial_steps =
            flags.alpha0.size() == 1 ? Vector(flags.n, flags.alpha0[0]) : flags.alpha0;
    }
    validate_params(params, flags.n);
    const Vector x0 = resolve_x0(flags.x0_policy, flags.x0_values, sp.problem.bounds, seed);

    SolveOptions opts;
    opts.record_stages = flags.verbose_trace;
    const auto [trace, final_x] = solve(sp.problem, params, x0, opts);

    if (!flags.trace_path.empty()) {
        TraceHeader header;
        header.problem = flags.problem;
        header.n = flags.n;
        header.seed = seed;
        header.x0_policy = flags.x0_policy;
        header.x0 = x0;
        header.params = params;
        std::string path = flags.trace_path;
        if (flags.batch_seeds > 0) path += ".seed" + std::to_string(seed) + ".jsonl";
        write_trace_file(path, header, trace);
    }

    RunResult result;
    {
        std::ostringstream os;
        os << "problem=" << flags.problem << " n=" << flags.n << " seed=" << seed
           << " reason=" << to_string(trace.terminal.reason)
           << " iterations=" << trace.terminal.iterations
           << " evaluations=" << trace.terminal.total_evaluations
           << " final_f=" << full_precision(trace.terminal.final_f)
           << " final_delta=" << full_precision(trace.terminal.final_delta);
        result.summary_line = os.str();
    }
    if (want_csv) {
        std::ostringstream os;
        os << flags.problem << ',' << flags.n << ',' << seed << ',' << trace.terminal.iterations
           << ',' << trace.terminal.total_evaluations << ','
           << full_precision(trace.terminal.final_f) << ','
           << full_precision(trace.terminal.final_delta);
        const std::vector<double> chis = record_chi_values(trace, sp.problem);
        for (double eps : flags.eps) {
            const auto counters = complexity_counters(trace, chis, eps);
            os << ',' << (counters.j_eps ? std::to_string(*counters.j_eps) : "not-reached");
        }
        const auto ident = identification_report(trace, sp.problem);
        os << ',';
        if (ident.vacuous)
            os << "vacuous";
        else if (ident.first_identified_iteration)
            os << *ident.first_identified_iteration;
        else
            os << "never";
        result.csv_row = os.str();
    }
    return result;
}

int cmd_run(const RunFlags& flags) {
    if (flags.batch_seeds <= 0) {
        std::cout << run_single(flags, flags.seed, false).summary_line << '\n';
        return 0;
    }

    const long long count = flags.batch_seeds;
    std::vector<RunResult> results(static_cast<std::size_t>(count));
    std::vector<std::string> errors;
    std::mutex error_mutex;
    const unsigned jobs = std::max(1u, flags.jobs);

    auto worker = [&](unsigned offset) {
        for (long long s = offset; s < count; s += jobs) {
            try {
                results[static_cast<std::size_t>(s)] =
                    run_single(flags, static_cast<std::uint64_t>(s), true);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                errors.push_back("seed " + std::to_string(s) + ": " + e.what());
            }
        }
    };
    if (jobs == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker, j);
        for (auto& t : pool) t.join();
    }
    if (!errors.empty()) {
        for (const auto& e : errors) std::cerr << "error: " << e << '\n';
        return 2;
    }

    std::ostringstream csv;
    csv << "problem,n,seed,iters,evals,final_f,final_delta";
    for (double eps : flags.eps) {
        std::ostringstream tag;
        tag << eps;
        csv << ",j_eps_" << tag.str();
    }
    csv << ",identified_at\n";
    for (const auto& r : results) csv << r.csv_row << '\n';

    if (flags.csv_path.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream os(flags.csv_path, std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open CSV output: " + flags.csv_path);
        os << csv.str();
        std::cout << "wrote " << flags.csv_path << " (" << count << " runs)\n";
    }
    return 0;
}

const char* status_label(CheckResult::Status s) {
    switch (s) {
        case CheckResult::Status::Pass: return "PASS";
        case CheckResult::Status::Fail: return "FAIL";
        case CheckResult::Status::Skipped: return "SKIP";
    }
    return "?";
}

int cmd_verify(const std::string& trace_path, const std::vector<double>& eps, bool as_json) {
    const TraceFile tf = read_trace_file(trace_path);
    const SuiteProblem sp = make_problem(tf.header.problem, tf.header.n, tf.header.seed);
    const VerificationReport report =
        check_trace(tf.trace, sp.problem, tf.header.params, eps);

    bool any_skipped = false;
    for (const auto& c : report.checks) any_skipped |= c.status == CheckResult::Status::Skipped;

    if (as_json) {
        nlohmann::json j;
        j["trace"] = {{"problem", tf.header.problem},
                      {"n", tf.header.n},
                      {"seed", tf.header.seed},
                      {"records", tf.trace.records.size()},
                      {"reason", to_string(tf.trace.terminal.reason)},
                      {"evaluations", tf.trace.terminal.total_evaluations}};
        j["checks"] = nlohmann::json::array();
        for (const auto& c : report.checks) {
            nlohmann::json cj{{"name", c.name},
                              {"status", status_label(c.status)},
                              {"detail", c.detail},
                              {"items_checked", c.items_checked},
                              {"violations", c.violations}};
            if (c.items_checked > 0 && std::isfinite(c.worst_margin))
                cj["worst_margin"] = c.worst_margin;
            j["checks"].push_back(std::move(cj));
        }
        j["notes"] = report.notes;
        j["all_passed"] = report.all_passed();
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << "trace: " << tf.header.problem << " n=" << tf.header.n
                  << " seed=" << tf.header.seed << " records=" << tf.trace.records.size()
                  << " reason=" << to_string(tf.trace.terminal.reason)
                  << " evaluations=" << tf.trace.terminal.total_evaluations << '\n';
        for (const auto& c : report.checks)
            std::cout << "[ " << status_label(c.status) << " ] " << c.name << "  " << c.detail
                      << '\n';
        for (const auto& n : report.notes) std::cout << "note: " << n << '\n';
        std::cout << "verification: " << (report.all_passed() ? "PASS" : "FAIL") << '\n';
        if (any_skipped)
            std::cerr << "warning: some checks were skipped for missing metadata\n";
    }
    return report.all_passed() ? 0 : 1;
}

int cmd_list(bool as_json) {
    const auto& reg = problem_registry();
    if (as_json) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& e : reg)
            j.push_back({{"name", e.name},
                         {"summary", e.summary},
                         {"degenerate", e.degenerate},
                         {"dims", e.dims}});
        std::cout << j.dump(2) << '\n';
    } else {
        for (const auto& e : reg) {
            std::printf("%-18s %-8s degenerate=%s  %s\n", e.name.c_str(), e.dims.c_str(),
                        e.degenerate ? "yes" : "no", e.summary.c_str());
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"derivative-free coordinate line-search solver for box-constrained problems"};
    app.require_subcommand(1);

    RunFlags flags;
    auto* run = app.add_subcommand("run", "solve a registry problem and optionally persist a trace");
    run->add_option("--problem", flags.problem, "registry problem name")->required();
    run->add_option("--n", flags.n, "dimension")->required();
    run->add_option("--seed", flags.seed, "problem/start seed");
    run->add_option("--theta", flags.params.theta, "stepsize contraction factor");
    run->add_option("--delta", flags.params.delta, "extrapolation growth is 1/delta");
    run->add_option("--gamma", flags.params.gamma, "sufficient-decrease coefficient");
    run->add_option("--c", flags.params.c, "stepsize coupling constant");
    run->add_option("--alpha0", flags.alpha0, "initial tentative stepsizes (one value or n comma-separated)")
        ->delimiter(',');
    run->add_option("--stop-delta", flags.params.stop_delta, "termination threshold on the max stepsize");
    run->add_option("--max-iterations", flags.params.max_iterations, "iteration budget");
    run->add_option("--max-evaluations", flags.params.max_evaluations, "objective evaluation budget");
    run->add_option("--x0", flags.x0_policy, "start policy: center | random | corner | explicit");
    run->add_option("--x0-values", flags.x0_values, "explicit start point (comma-separated)")
        ->delimiter(',');
    run->add_option("--trace", flags.trace_path,
                    "trace output path (batch mode appends .seed<k>.jsonl)");
    run->add_flag("--verbose-trace", flags.verbose_trace,
                  "record intermediate sweep points in the trace");
    run->add_option("--seeds", flags.batch_seeds,
                    "batch mode: run seeds 0..K-1 and print a CSV summary");
    run->add_option("--eps", flags.eps, "thresholds for the j_eps summary columns")->delimiter(',');
    run->add_option("--csv", flags.csv_path, "write the batch CSV here instead of stdout");
    run->add_option("--jobs", flags.jobs, "concurrent sessions in batch mode");

    std::string trace_path;
    std::vector<double> verify_eps = {1e-1, 1e-2};
    bool verify_json = false;
    auto* verify = app.add_subcommand("verify", "check the recorded inequalities of a trace");
    verify->add_option("--trace", trace_path, "trace file to verify")->required();
    verify->add_option("--eps", verify_eps, "thresholds for the counter bounds")->delimiter(',');
    verify->add_flag("--json", verify_json, "machine-readable report");

    bool list_json = false;
    auto* list = app.add_subcommand("list", "print the problem registry");
    list->add_flag("--json", list_json, "machine-readable listing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (run->parsed()) return cmd_run(flags);
        if (verify->parsed()) return cmd_verify(trace_path, verify_eps, verify_json);
        if (list->parsed()) return cmd_list(list_json);
    } catch (const TraceFormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
