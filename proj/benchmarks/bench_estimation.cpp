#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include <chanest/analysis.hpp>
#include <chanest/channel.hpp>
#include <chanest/estimation.hpp>
#include <chanest/geometry.hpp>
#include <chanest/observation.hpp>
#include <chanest/random.hpp>

using namespace chanest;

namespace {

PhysicalChannel make_channel(int side, std::uint64_t seed) {
    PathGenConfig pg;
    pg.total_paths = 60;
    pg.seed = seed;
    return PhysicalChannel(generate_paths(pg), make_upa(side, side, 1.0, 2.0), make_ula(1, 1.0, 2.0));
}

void bm_steering_vector(benchmark::State& state) {
    const auto tx = make_upa(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 1.0, 2.0);
    const Direction dir(0.3, -0.1);
    for (auto _ : state) benchmark::DoNotOptimize(steering_vector(tx, dir));
}
BENCHMARK(bm_steering_vector)->Arg(4)->Arg(8)->Arg(16);

void bm_build_dictionary(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const auto tx = make_upa(side, side, 1.0, 2.0);
    const auto rx = make_ula(1, 1.0, 2.0);
    for (auto _ : state) benchmark::DoNotOptimize(build_dictionary(tx, rx, GridSpec{}));
}
BENCHMARK(bm_build_dictionary)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void bm_omp_solve(benchmark::State& state) {
    const int side = 8;
    const auto ch = make_channel(side, 11);
    const auto dict = build_dictionary(ch.tx(), ch.rx(), GridSpec{});
    const auto setup = build_ls_optimal(side * side, 1, side * side, 1, 1.0).with_noise(
        solve_noise_for_psnr(ch, 1.0, 100.0));
    const OmpSolver solver(dict, setup.M());
    auto rng = make_rng(3);
    const Eigen::VectorXcd y = observe(setup, ch, rng);
    const int p = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solver.solve(y, p));
}
BENCHMARK(bm_omp_solve)->Arg(1)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void bm_omp_sequence(benchmark::State& state) {
    const int side = 8;
    const auto ch = make_channel(side, 11);
    const auto dict = build_dictionary(ch.tx(), ch.rx(), GridSpec{});
    const auto setup = build_ls_optimal(side * side, 1, side * side, 1, 1.0).with_noise(
        solve_noise_for_psnr(ch, 1.0, 100.0));
    const OmpSolver solver(dict, setup.M());
    auto rng = make_rng(3);
    const Eigen::VectorXcd y = observe(setup, ch, rng);
    for (auto _ : state) benchmark::DoNotOptimize(solver.solve_sequence(y, 24));
}
BENCHMARK(bm_omp_sequence)->Unit(benchmark::kMillisecond);

void bm_ls_solve(benchmark::State& state) {
    const int nt = static_cast<int>(state.range(0));
    const auto setup = build_ls_optimal(nt, 1, nt, 1, 1.0).with_noise(0.01);
    const LsSolver solver(setup);
    auto rng = make_rng(5);
    const Eigen::VectorXcd y = complex_gaussian_vector(rng, setup.M().rows());
    for (auto _ : state) benchmark::DoNotOptimize(solver.solve(y));
}
BENCHMARK(bm_ls_solve)->Arg(16)->Arg(64)->Arg(256);

void bm_lmmse_solve(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    const auto cov = make_covariance_with_unevenness(dim, 2.0, 9);
    const double sigma2 = cov.trace() / 1000.0;
    const auto setup = build_lmmse_optimal(cov.R(), 1, dim, 1, 1.0, sigma2);
    const LmmseSolver solver(setup.with_noise(sigma2), cov.R());
    auto rng = make_rng(5);
    const Eigen::VectorXcd y = complex_gaussian_vector(rng, setup.M().rows());
    for (auto _ : state) benchmark::DoNotOptimize(solver.solve(y));
}
BENCHMARK(bm_lmmse_solve)->Arg(16)->Arg(64);

void bm_water_fill(benchmark::State& state) {
    std::vector<double> gains(static_cast<size_t>(state.range(0)));
    auto rng = make_rng(8);
    std::uniform_real_distribution<double> unif(0.05, 3.0);
    for (auto& g : gains) g = unif(rng);
    for (auto _ : state) benchmark::DoNotOptimize(water_fill(gains, 10.0));
}
BENCHMARK(bm_water_fill)->Arg(4)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
