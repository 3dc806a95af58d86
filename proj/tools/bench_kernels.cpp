// Times the serial reference kernels against their OpenMP counterparts on a
// representative bootstrap workload and verifies that both produce identical
// bytes. Usage: bench_kernels [p] [rows] [n_boot]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "birs/kernels.hpp"
#include "birs/rng.hpp"

using namespace birs;

namespace {

template <typename F>
double time_ms(F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t p = argc > 1 ? std::stoull(argv[1]) : 4096;
    const std::size_t rows = argc > 2 ? std::stoull(argv[2]) : 500;
    const std::size_t n_boot = argc > 3 ? std::stoull(argv[3]) : 200;

    RngStream rng = make_rng(7);
    BootstrapDesign design;
    design.n_rows = rows;
    design.cols = p;
    design.g = rng.substream(0).normals(rows * p);
    const std::vector<double> mult = draw_multipliers(rng.substream(1), n_boot, rows);
    const Region all{0, p};

    std::vector<double> sup_serial, sup_omp;
    const double t_serial =
        time_ms([&] { sup_serial = replicate_sup_norms_serial(design, mult, n_boot, {&all, 1}); });
    const double t_omp =
        time_ms([&] { sup_omp = replicate_sup_norms_omp(design, mult, n_boot, {&all, 1}); });
    const bool sup_equal = sup_serial == sup_omp;

    const std::vector<std::size_t> windows = {p / 32, p / 48, p / 64};
    std::vector<double> scan_serial, scan_omp;
    const double s_serial = time_ms(
        [&] { scan_serial = scan_replicate_maxima_serial(design, mult, n_boot, windows); });
    const double s_omp =
        time_ms([&] { scan_omp = scan_replicate_maxima_omp(design, mult, n_boot, windows); });
    const bool scan_equal = scan_serial == scan_omp;

    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::printf("p=%zu rows=%zu n_boot=%zu threads=%d\n", p, rows, n_boot, threads);
    std::printf("kernel,serial_ms,omp_ms,speedup,identical\n");
    std::printf("replicate_sup_norms,%.1f,%.1f,%.2fx,%s\n", t_serial, t_omp, t_serial / t_omp,
                sup_equal ? "yes" : "NO");
    std::printf("scan_replicate_maxima,%.1f,%.1f,%.2fx,%s\n", s_serial, s_omp, s_serial / s_omp,
                scan_equal ? "yes" : "NO");
    return (sup_equal && scan_equal) ? 0 : 1;
}
