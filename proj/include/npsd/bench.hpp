#pragma once

#include <optional>
#include <string>
#include <vector>

#include "npsd/fluid.hpp"
#include "npsd/net/params.hpp"
#include "npsd/solver.hpp"

namespace npsd {

struct BenchSystem {
    std::string id;
    IndicatorImage I;
    SparseMatrix A;  // reduced
    Vector b;        // reduced
    ReductionMap map;
};

struct BenchRow {
    std::string system;
    std::string method;
    index_t n_f = 0;
    index_t iterations = 0;
    bool converged = false;
    double setup_seconds = 0.0;    // preconditioner build + solver setup
    double iterate_seconds = 0.0;
    double precond_seconds = 0.0;  // time inside preconditioner applies
    double total_seconds = 0.0;
    double final_rel_residual = 0.0;
    std::string error;  // non-empty when the solve failed outright
};

struct BenchConfig {
    double tol_reduction = 1e-6;
    index_t max_iters = 2000;
    int n_ortho = 2;
    std::string model_path;  // required by *+neural methods
    int threads = 1;
};

struct BenchTrace {
    std::string system;
    std::string method;
    std::vector<double> residual_history;
    std::vector<double> cumulative_seconds;
};

struct BenchReport {
    std::vector<BenchRow> rows;
    std::vector<BenchTrace> traces;
};

/// Method tokens: "cg", or "<solver>+<precond>" with solver in
/// {cg,pcg,fpcg,psd,psdo} and precond in {none,jacobi,ic0,neural}.
bool parse_method_token(const std::string& token, std::string& solver, std::string& precond);

/// Runs every method on every system with one shared stopping criterion and
/// x0 = 0. Failures are recorded per row, never aborting the run. Rows over
/// distinct systems may run in parallel worker threads; iteration counts are
/// unaffected by the thread count.
BenchReport run_bench(const std::vector<BenchSystem>& systems,
                      const std::vector<std::string>& methods, const BenchConfig& cfg);

/// rows.csv plus per-row traces under traces/.
void write_bench_outputs(const BenchReport& report, const std::string& dir);
std::vector<BenchRow> load_bench_rows(const std::string& csv_path);

/// summary.csv (per-method means) and speedup_hist.csv (time(cg)/time(m)
/// histogram over converged rows).
void write_bench_report(const std::vector<BenchRow>& rows, const std::string& dir);

/// Loads every frame of every scene directory under `parent` as a system.
std::vector<BenchSystem> load_systems(const std::vector<std::string>& scene_dirs);

}  // namespace npsd
