#include "npsd/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "npsd/net/precond.hpp"

namespace npsd {

bool parse_method_token(const std::string& token, std::string& solver, std::string& precond) {
    const auto plus = token.find('+');
    solver = token.substr(0, plus);
    precond = (plus == std::string::npos) ? "none" : token.substr(plus + 1);
    const bool solver_ok = solver == "cg" || solver == "pcg" || solver == "fpcg" ||
                           solver == "psd" || solver == "psdo";
    const bool precond_ok =
        precond == "none" || precond == "jacobi" || precond == "ic0" || precond == "neural";
    return solver_ok && precond_ok;
}

namespace {

using Clock = std::chrono::steady_clock;

BenchRow run_one(const BenchSystem& sys, const std::string& token, const BenchConfig& cfg,
                 const std::optional<net::NetParams>& model, BenchTrace& trace) {
    BenchRow row;
    row.system = sys.id;
    row.method = token;
    row.n_f = sys.A.n_rows;

    std::string solver, precond;
    if (!parse_method_token(token, solver, precond)) {
        row.error = "unknown method token";
        return row;
    }

    SolveConfig scfg;
    scfg.tol_reduction = cfg.tol_reduction;
    scfg.max_iters = cfg.max_iters;
    scfg.n_ortho = cfg.n_ortho;
    scfg.nullspace_projection = is_pure_neumann(sys.I);

    try {
        const auto t0 = Clock::now();
        std::unique_ptr<Preconditioner> P;
        if (precond == "none")
            P = identity_precond(sys.A.n_rows);
        else if (precond == "jacobi")
            P = jacobi_precond(sys.A);
        else if (precond == "ic0")
            P = ic0_precond(sys.A);
        else {
            if (!model) throw std::runtime_error("neural method requires a model");
            P = net::neural_precond(*model, sys.I, sys.map);
        }
        const double setup = std::chrono::duration<double>(Clock::now() - t0).count();

        SolveResult sol;
        if (solver == "cg")
            sol = cg_solve(sys.A, sys.b, scfg);
        else if (solver == "pcg")
            sol = pcg_solve(sys.A, sys.b, *P, scfg);
        else if (solver == "fpcg")
            sol = flexible_pcg_solve(sys.A, sys.b, *P, scfg);
        else if (solver == "psd")
            sol = psd_solve(sys.A, sys.b, *P, scfg);
        else
            sol = psdo_solve(sys.A, sys.b, *P, scfg);

        row.iterations = sol.report.iterations;
        row.converged = sol.report.converged;
        row.setup_seconds = setup + sol.report.setup_seconds;
        row.iterate_seconds = sol.report.iterate_seconds;
        row.precond_seconds = sol.report.precond_seconds;
        row.total_seconds = setup + sol.report.setup_seconds + sol.report.iterate_seconds;
        const double r0 = sol.report.residual_history.front();
        row.final_rel_residual =
            r0 > 0.0 ? sol.report.residual_history.back() / r0 : 0.0;
        trace.residual_history = sol.report.residual_history;
        trace.cumulative_seconds = sol.report.cumulative_seconds;
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    trace.system = sys.id;
    trace.method = token;
    return row;
}

std::string sanitize(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (c == '/' || c == '+' || c == ' ') c = '_';
    return out;
}

}  // namespace

BenchReport run_bench(const std::vector<BenchSystem>& systems,
                      const std::vector<std::string>& methods, const BenchConfig& cfg) {
    std::optional<net::NetParams> model;
    const bool needs_model = std::any_of(methods.begin(), methods.end(), [](const std::string& m) {
        return m.find("neural") != std::string::npos;
    });
    if (needs_model) {
        require(!cfg.model_path.empty(), "run_bench: neural method requested without --model");
        model = net::load_npm(cfg.model_path);
    }

    BenchReport report;
    const std::size_t total = systems.size() * methods.size();
    report.rows.resize(total);
    report.traces.resize(total);

#ifdef _OPENMP
    const int nthreads = std::max(1, cfg.threads);
#pragma omp parallel for schedule(dynamic) num_threads(nthreads) if (nthreads > 1)
#endif
    for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(systems.size()); ++si) {
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            const std::size_t slot = static_cast<std::size_t>(si) * methods.size() + mi;
            report.rows[slot] = run_one(systems[static_cast<std::size_t>(si)], methods[mi], cfg,
                                        model, report.traces[slot]);
        }
    }
    return report;
}

void write_bench_outputs(const BenchReport& report, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir + "/traces");
    std::FILE* f = std::fopen((dir + "/rows.csv").c_str(), "w");
    if (!f) throw std::runtime_error("write_bench_outputs: cannot open rows.csv in " + dir);
    std::fprintf(f,
                 "system,method,n_f,iterations,converged,setup_seconds,iterate_seconds,"
                 "precond_seconds,total_seconds,final_rel_residual,error\n");
    for (const BenchRow& r : report.rows)
        std::fprintf(f, "%s,%s,%lld,%lld,%d,%.9f,%.9f,%.9f,%.9f,%.17g,%s\n", r.system.c_str(),
                     r.method.c_str(), static_cast<long long>(r.n_f),
                     static_cast<long long>(r.iterations), r.converged ? 1 : 0, r.setup_seconds,
                     r.iterate_seconds, r.precond_seconds, r.total_seconds, r.final_rel_residual,
                     r.error.c_str());
    std::fclose(f);

    for (const BenchTrace& t : report.traces) {
        if (t.residual_history.empty()) continue;
        const std::string path = dir + "/traces/" + sanitize(t.system) + "__" + sanitize(t.method) + ".csv";
        std::FILE* tf = std::fopen(path.c_str(), "w");
        if (!tf) throw std::runtime_error("write_bench_outputs: cannot open " + path);
        std::fprintf(tf, "iter,residual_norm,cumulative_seconds\n");
        for (std::size_t i = 0; i < t.residual_history.size(); ++i)
            std::fprintf(tf, "%zu,%.17g,%.9f\n", i, t.residual_history[i],
                         i < t.cumulative_seconds.size() ? t.cumulative_seconds[i] : 0.0);
        std::fclose(tf);
    }
}

std::vector<BenchRow> load_bench_rows(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("load_bench_rows: cannot open " + csv_path);
    std::vector<BenchRow> rows;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        BenchRow r;
        std::getline(ss, r.system, ',');
        std::getline(ss, r.method, ',');
        std::getline(ss, field, ',');
        r.n_f = std::stoll(field);
        std::getline(ss, field, ',');
        r.iterations = std::stoll(field);
        std::getline(ss, field, ',');
        r.converged = field == "1";
        std::getline(ss, field, ',');
        r.setup_seconds = std::stod(field);
        std::getline(ss, field, ',');
        r.iterate_seconds = std::stod(field);
        std::getline(ss, field, ',');
        r.precond_seconds = std::stod(field);
        std::getline(ss, field, ',');
        r.total_seconds = std::stod(field);
        std::getline(ss, field, ',');
        r.final_rel_residual = std::stod(field);
        std::getline(ss, r.error);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_bench_report(const std::vector<BenchRow>& rows, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    // per-method aggregates
    std::map<std::string, std::vector<const BenchRow*>> by_method;
    for (const BenchRow& r : rows) by_method[r.method].push_back(&r);

    std::FILE* f = std::fopen((dir + "/summary.csv").c_str(), "w");
    if (!f) throw std::runtime_error("write_bench_report: cannot open summary.csv");
    std::fprintf(f,
                 "method,n_rows,n_converged,mean_iterations,mean_total_seconds,"
                 "mean_setup_seconds,mean_precond_seconds\n");
    for (const auto& [method, list] : by_method) {
        double it = 0, tt = 0, st = 0, pt = 0;
        index_t conv = 0;
        for (const BenchRow* r : list) {
            it += static_cast<double>(r->iterations);
            tt += r->total_seconds;
            st += r->setup_seconds;
            pt += r->precond_seconds;
            if (r->converged) ++conv;
        }
        const double n = static_cast<double>(list.size());
        std::fprintf(f, "%s,%zu,%lld,%.4f,%.9f,%.9f,%.9f\n", method.c_str(), list.size(),
                     static_cast<long long>(conv), it / n, tt / n, st / n, pt / n);
    }
    std::fclose(f);

    // speedup histogram vs the cg baseline, converged rows only
    std::map<std::string, double> cg_time;
    for (const BenchRow& r : rows)
        if (r.method == "cg" && r.converged) cg_time[r.system] = r.total_seconds;

    const std::vector<double> edges = {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
    std::FILE* h = std::fopen((dir + "/speedup_hist.csv").c_str(), "w");
    if (!h) throw std::runtime_error("write_bench_report: cannot open speedup_hist.csv");
    std::fprintf(h, "method,bin_lo,bin_hi,count\n");
    for (const auto& [method, list] : by_method) {
        std::vector<index_t> counts(edges.size(), 0);  // last bin = overflow
        for (const BenchRow* r : list) {
            if (!r->converged) continue;
            const auto it = cg_time.find(r->system);
            if (it == cg_time.end() || r->total_seconds <= 0.0) continue;
            const double speedup = it->second / r->total_seconds;
            std::size_t bin = edges.size() - 1;
            for (std::size_t e = 0; e + 1 < edges.size(); ++e)
                if (speedup >= edges[e] && speedup < edges[e + 1]) {
                    bin = e;
                    break;
                }
            counts[bin]++;
        }
        for (std::size_t e = 0; e + 1 < edges.size(); ++e)
            std::fprintf(h, "%s,%.1f,%.1f,%lld\n", method.c_str(), edges[e], edges[e + 1],
                         static_cast<long long>(counts[e]));
        std::fprintf(h, "%s,%.1f,inf,%lld\n", method.c_str(), edges.back(),
                     static_cast<long long>(counts.back()));
    }
    std::fclose(h);
}

std::vector<BenchSystem> load_systems(const std::vector<std::string>& scene_dirs) {
    std::vector<BenchSystem> systems;
    for (const std::string& dir : scene_dirs) {
        const std::string scene_name = std::filesystem::path(dir).filename().string();
        for (CaptureFrame& f : load_scene_dir(dir)) {
            BenchSystem s;
            char buf[32];
            std::snprintf(buf, sizeof buf, "_f%04d", f.step);
            s.id = scene_name + buf;
            s.I = std::move(f.I);
            s.A = std::move(f.A_reduced);
            s.b = std::move(f.b_reduced);
            s.map = std::move(f.map);
            systems.push_back(std::move(s));
        }
    }
    return systems;
}

}  // namespace npsd
