// Compares the OpenMP kernels against their serial reference implementations
// on sized inputs and reports timings plus agreement.

#include <cstdio>
#include <vector>

#include <omp.h>

#include "reference.hpp"
#include "xmorph/dynamics.hpp"
#include "xmorph/pipeline.hpp"
#include "xmorph/rng.hpp"
#include "xmorph/synth.hpp"

using namespace xmorph;

namespace {

template <typename F>
double time_best_of(F&& fn, int reps = 3) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const double t0 = omp_get_wtime();
        fn();
        best = std::min(best, omp_get_wtime() - t0);
    }
    return best;
}

void row(const char* name, double serial_s, double parallel_s, double abs_diff) {
    std::printf("%-28s serial %8.3f ms   openmp %8.3f ms   speedup %5.2fx   |diff| %.3g\n",
                name, serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s, abs_diff);
}

} // namespace

int main() {
    std::printf("threads: %d\n\n", omp_get_max_threads());

    Rng rng(2024);

    { // sample entropy, n = 6000
        std::vector<double> series(6000);
        for (auto& v : series) v = rng.uniform();
        double a = 0, b = 0;
        const double ts = time_best_of([&] { a = reference::sample_entropy_naive(series, 2, 0.2); });
        const double tp = time_best_of([&] { b = sample_entropy(series, 2, 0.2); });
        row("sample_entropy n=6000", ts, tp, std::abs(a - b));
    }

    { // approximate entropy, n = 6000
        std::vector<double> series(6000);
        for (auto& v : series) v = rng.uniform();
        double a = 0, b = 0;
        const double ts =
            time_best_of([&] { a = reference::approximate_entropy_naive(series, 2, 0.2); });
        const double tp = time_best_of([&] { b = approximate_entropy(series, 2, 0.2); });
        row("approximate_entropy n=6000", ts, tp, std::abs(a - b));
    }

    { // batch feature extraction over a phantom dataset
        const auto dir = std::filesystem::temp_directory_path() / "xmorph_bench_ds";
        generate_dataset(dir, 12, 99);
        const auto manifest = load_manifest(dir / "manifest.csv");
        const RunConfig cfg;

        std::vector<FeatureRecord> serial_out, parallel_out;
        const int saved = omp_get_max_threads();
        const double ts = time_best_of([&] {
            omp_set_num_threads(1);
            serial_out = extract_batch(manifest, dir, cfg);
        }, 1);
        omp_set_num_threads(saved);
        const double tp = time_best_of([&] { parallel_out = extract_batch(manifest, dir, cfg); }, 1);

        double max_diff = 0;
        for (std::size_t i = 0; i < serial_out.size(); ++i)
            for (int f = 0; f < kTsfCount; ++f)
                if (serial_out[i].present[f])
                    max_diff = std::max(max_diff, std::abs(serial_out[i].values[f] -
                                                           parallel_out[i].values[f]));
        row("extract_batch 36 samples", ts, tp, max_diff);
        std::filesystem::remove_all(dir);
    }

    return 0;
}
