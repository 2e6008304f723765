// Microbenchmark comparing the OpenMP kernels with their serial reference
// twins: spmv on grid Poisson matrices and the network's kernel build/apply
// and backward passes. Prints one table row per (kernel, size, threads).
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "npsd/discretization.hpp"
#include "npsd/net/kernels.hpp"
#include "npsd/rng.hpp"
#include "npsd/scene.hpp"
#include "npsd/sparse.hpp"

using namespace npsd;
using namespace npsd::net;

namespace {

double time_best_of(int reps, const std::function<void()>& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        best = std::min(best, s);
    }
    return best;
}

void print_row(const std::string& kernel, index_t n, const std::string& variant, int threads,
               double seconds, double ref_seconds) {
    std::printf("%-22s %8lld  %-8s %7d  %10.3f ms  %8.2fx\n", kernel.c_str(),
                static_cast<long long>(n), variant.c_str(), threads, seconds * 1e3,
                ref_seconds / seconds);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial-vs-OpenMP kernel benchmark"};
    std::vector<index_t> sizes{64, 128, 256, 512};
    int reps = 5;
    int max_threads = omp_get_max_threads();
    app.add_option("--sizes", sizes, "grid side lengths to benchmark");
    app.add_option("--reps", reps, "repetitions (best-of)");
    app.add_option("--threads", max_threads, "max thread count to sweep to");
    CLI11_PARSE(app, argc, argv);

    std::vector<int> thread_counts{1};
    for (int t = 2; t <= max_threads; t *= 2) thread_counts.push_back(t);

    std::printf("%-22s %8s  %-8s %7s  %13s  %9s\n", "kernel", "n", "variant", "threads",
                "time", "speedup");

    for (const index_t n : sizes) {
        const auto I = rasterize(random_scene(n, n, 7));
        const auto img = PaddedImage<float>::from_image(I);

        Rng rng(1);
        ConvParams<float> p;
        for (auto& w : p.W) w = static_cast<float>(rng.uniform(-0.5, 0.5));
        for (auto& b : p.B) b = static_cast<float>(rng.uniform(-0.5, 0.5));

        Field2D<float> x(n, n), g(n, n);
        for (auto& v : x.data) v = static_cast<float>(rng.normal());
        for (auto& v : g.data) v = static_cast<float>(rng.normal());
        PaddedField<float> xpad, gpad;
        xpad.load_interior(x);
        gpad.load_interior(g);

        // spmv operands
        const auto A = assemble_poisson(I);
        Vector xv(static_cast<std::size_t>(A.n_cols));
        for (auto& v : xv) v = rng.normal();
        Vector yv;

        KernelPlanes<float> K, S;
        Field2D<float> y, dx;
        ConvParams<float> grad;

        omp_set_num_threads(1);
        const double t_build_ref = time_best_of(reps, [&] { net::ref::build_kernels(p, img, K); });
        const double t_apply_ref = time_best_of(reps, [&] { net::ref::apply_kernels(K, xpad, y); });
        const double t_dx_ref = time_best_of(reps, [&] { net::ref::conv_input_grad(K, gpad, dx); });
        const double t_dw_ref = time_best_of(reps, [&] {
            S.zero();
            net::ref::accumulate_slot_products(g, xpad, S);
            net::ref::conv_param_grads(S, img, grad);
        });
        const double t_spmv_ref = time_best_of(reps, [&] { npsd::ref::spmv_serial(A, xv, yv); });

        print_row("build_kernels", n, "serial", 1, t_build_ref, t_build_ref);
        print_row("apply_kernels", n, "serial", 1, t_apply_ref, t_apply_ref);
        print_row("conv_input_grad", n, "serial", 1, t_dx_ref, t_dx_ref);
        print_row("conv_param_grads", n, "serial", 1, t_dw_ref, t_dw_ref);
        print_row("spmv", n, "serial", 1, t_spmv_ref, t_spmv_ref);

        for (const int threads : thread_counts) {
            omp_set_num_threads(threads);
            print_row("build_kernels", n, "omp", threads,
                      time_best_of(reps, [&] { build_kernels(p, img, K); }), t_build_ref);
            print_row("apply_kernels", n, "omp", threads,
                      time_best_of(reps, [&] { apply_kernels(K, xpad, y); }), t_apply_ref);
            print_row("conv_input_grad", n, "omp", threads,
                      time_best_of(reps, [&] { conv_input_grad(K, gpad, dx); }), t_dx_ref);
            print_row("conv_param_grads", n, "omp", threads, time_best_of(reps, [&] {
                          S.zero();
                          accumulate_slot_products(g, xpad, S);
                          conv_param_grads(S, img, grad);
                      }),
                      t_dw_ref);
            print_row("spmv", n, "omp", threads,
                      time_best_of(reps, [&] { spmv(A, xv, yv); }), t_spmv_ref);
        }
        std::printf("\n");
    }
    return 0;
}
