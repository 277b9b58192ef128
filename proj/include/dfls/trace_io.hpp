#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dfls/core.hpp"
#include "dfls/solver.hpp"

/// \file trace_io.hpp
/// Persistent trace format: line-delimited JSON. The first line is a header
/// object carrying everything needed to reconstruct the run (problem name,
/// n, seed, parameters, start point), followed by one object per iteration
/// record and a final terminal object. Floating-point values are written
/// with full round-trip precision, so re-reading a file reproduces the run
/// bit for bit.

namespace dfls {

inline constexpr int kTraceFormatVersion = 1;

class TraceFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TraceHeader {
    int format_version = kTraceFormatVersion;
    std::string problem;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::string x0_policy = "explicit";
    Vector x0;
    SolverParams params;
};

struct TraceFile {
    TraceHeader header;
    Trace trace;
};

namespace detail {

inline nlohmann::json params_to_json(const SolverParams& p) {
    return nlohmann::json{{"theta", p.theta},
                          {"delta", p.delta},
                          {"gamma", p.gamma},
                          {"c", p.c},
                          {"initial_steps", p.initial_steps},
                          {"stop_delta", p.stop_delta},
                          {"max_iterations", p.max_iterations},
                          {"max_evaluations", p.max_evaluations}};
}

inline SolverParams params_from_json(const nlohmann::json& j) {
    SolverParams p;
    p.theta = j.at("theta").get<double>();
    p.delta = j.at("delta").get<double>();
    p.gamma = j.at("gamma").get<double>();
    p.c = j.at("c").get<double>();
    p.initial_steps = j.at("initial_steps").get<Vector>();
    p.stop_delta = j.at("stop_delta").get<double>();
    p.max_iterations = j.at("max_iterations").get<long long>();
    p.max_evaluations = j.at("max_evaluations").get<long long>();
    return p;
}

inline nlohmann::json record_to_json(const IterateRecord& r) {
    nlohmann::json j{{"type", "record"},
                     {"k", r.k},
                     {"x_before", r.x_before},
                     {"x_after", r.x_after},
                     {"delta_k", r.delta_k},
                     {"nu", r.nu},
                     {"alpha", r.alpha},
                     {"dir_sign", r.dir_sign},
                     {"probes", r.probes},
                     {"expansions", r.expansions},
                     {"hit_bound", r.hit_bound},
                     {"success", r.success},
                     {"truncated", r.truncated},
                     {"f_before", r.f_before},
                     {"f_after", r.f_after},
                     {"evals_cumulative", r.evals_cumulative}};
    if (!r.y_stages.empty()) j["y_stages"] = r.y_stages;
    return j;
}

inline IterateRecord record_from_json(const nlohmann::json& j) {
    IterateRecord r;
    r.k = j.at("k").get<long long>();
    r.x_before = j.at("x_before").get<Vector>();
    r.x_after = j.at("x_after").get<Vector>();
    r.delta_k = j.at("delta_k").get<double>();
    r.nu = j.at("nu").get<Vector>();
    r.alpha = j.at("alpha").get<Vector>();
    r.dir_sign = j.at("dir_sign").get<std::vector<int>>();
    r.probes = j.at("probes").get<std::vector<int>>();
    r.expansions = j.at("expansions").get<std::vector<int>>();
    r.hit_bound = j.at("hit_bound").get<std::vector<bool>>();
    r.success = j.at("success").get<bool>();
    r.truncated = j.at("truncated").get<bool>();
    r.f_before = j.at("f_before").get<double>();
    r.f_after = j.at("f_after").get<double>();
    r.evals_cumulative = j.at("evals_cumulative").get<long long>();
    if (j.contains("y_stages")) r.y_stages = j.at("y_stages").get<std::vector<Vector>>();
    return r;
}

} // namespace detail

inline void write_trace(std::ostream& os, const TraceHeader& header, const Trace& trace) {
    nlohmann::json h{{"type", "header"},
                     {"format_version", header.format_version},
                     {"problem", header.problem},
                     {"n", header.n},
                     {"seed", header.seed},
                     {"x0_policy", header.x0_policy},
                     {"x0", header.x0},
                     {"params", detail::params_to_json(header.params)}};
    os << h.dump() << '\n';
    for (const IterateRecord& r : trace.records) os << detail::record_to_json(r).dump() << '\n';
    nlohmann::json t{{"type", "terminal"},
                     {"reason", to_string(trace.terminal.reason)},
                     {"final_x", trace.terminal.final_x},
                     {"final_f", trace.terminal.final_f},
                     {"final_delta", trace.terminal.final_delta},
                     {"iterations", trace.terminal.iterations},
                     {"total_evaluations", trace.terminal.total_evaluations}};
    os << t.dump() << '\n';
}

inline void write_trace_file(const std::string& path, const TraceHeader& header, const Trace& trace) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open trace file for writing: " + path);
    write_trace(os, header, trace);
    if (!os) throw std::runtime_error("failed while writing trace file: " + path);
}

inline TraceFile read_trace(std::istream& is) {
    TraceFile out;
    std::string line;
    bool have_header = false;
    bool have_terminal = false;
    long long expected_k = 0;
    try {
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const nlohmann::json j = nlohmann::json::parse(line);
            const std::string type = j.at("type").get<std::string>();
            if (type == "header") {
                if (have_header) throw TraceFormatError("duplicate header line");
                out.header.format_version = j.at("format_version").get<int>();
                if (out.header.format_version != kTraceFormatVersion)
                    throw TraceFormatError("unsupported trace format version " +
                                           std::to_string(out.header.format_version));
                out.header.problem = j.at("problem").get<std::string>();
                out.header.n = j.at("n").get<std::size_t>();
                out.header.seed = j.at("seed").get<std::uint64_t>();
                out.header.x0_policy = j.at("x0_policy").get<std::string>();
                out.header.x0 = j.at("x0").get<Vector>();
                out.header.params = detail::params_from_json(j.at("params"));
                have_header = true;
            } else if (type == "record") {
                if (!have_header) throw TraceFormatError("record before header");
                if (have_terminal) throw TraceFormatError("record after terminal");
                IterateRecord r = detail::record_from_json(j);
                if (r.k != expected_k)
                    throw TraceFormatError("record k out of sequence at k=" + std::to_string(r.k));
                const std::size_t n = out.header.n;
                if (r.x_before.size() != n || r.x_after.size() != n || r.nu.size() != n ||
                    r.alpha.size() != n || r.dir_sign.size() != n || r.probes.size() != n ||
                    r.expansions.size() != n || r.hit_bound.size() != n)
                    throw TraceFormatError("record arrays have wrong length at k=" + std::to_string(r.k));
                ++expected_k;
                out.trace.records.push_back(std::move(r));
            } else if (type == "terminal") {
                if (!have_header) throw TraceFormatError("terminal before header");
                if (have_terminal) throw TraceFormatError("duplicate terminal line");
                out.trace.terminal.reason = stop_reason_from_string(j.at("reason").get<std::string>());
                out.trace.terminal.final_x = j.at("final_x").get<Vector>();
                out.trace.terminal.final_f = j.at("final_f").get<double>();
                out.trace.terminal.final_delta = j.at("final_delta").get<double>();
                out.trace.terminal.iterations = j.at("iterations").get<long long>();
                out.trace.terminal.total_evaluations = j.at("total_evaluations").get<long long>();
                have_terminal = true;
            } else {
                throw TraceFormatError("unknown line type '" + type + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw TraceFormatError(std::string("malformed trace: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw TraceFormatError(std::string("malformed trace: ") + e.what());
    }
    if (!have_header) throw TraceFormatError("trace has no header line");
    if (!have_terminal) throw TraceFormatError("trace has no terminal line");
    return out;
}

inline TraceFile read_trace_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw TraceFormatError("cannot open trace file: " + path);
    return read_trace(is);
}

} // namespace dfls
