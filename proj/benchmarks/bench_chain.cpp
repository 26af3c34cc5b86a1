// Microbenchmarks for the hot paths: the simulated chain on vectors and
// images, and one digital training-gradient evaluation.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "optoconv/accel.hpp"
#include "optoconv/cnn.hpp"
#include "optoconv/comb.hpp"
#include "optoconv/matrix.hpp"

namespace {

using namespace optoconv;

accel::SimConfig chain_config(int n_lines) {
  accel::SimConfig cfg;
  cfg.comb = comb::generate_comb(n_lines, 48.9, 1550.0, 0.0, 42);
  cfg.tau_ps = 15.9;
  return cfg;
}

comb::KernelSet random_kernels(std::mt19937_64& rng, int q, int k) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Matrix> kernels;
  for (int i = 0; i < q; ++i) {
    Matrix m(k, k);
    for (double& v : m.v) v = u(rng);
    kernels.push_back(m);
  }
  return comb::make_kernel_set(std::move(kernels));
}

Matrix random_image(std::mt19937_64& rng, int rows, int cols) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix img(rows, cols);
  for (double& v : img.v) v = u(rng);
  return img;
}

void BM_VectorConvolve(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto ks = random_kernels(rng, 1, 3);
  const auto cfg = chain_config(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (double& v : x) v = u(rng);
  for (auto _ : state) {
    auto y = accel::convolve_vector(x, ks, cfg);
    benchmark::DoNotOptimize(y);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_VectorConvolve)->Arg(256)->Arg(1024)->Arg(4096);

void BM_MatrixConvolve(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const int side = static_cast<int>(state.range(0));
  const auto ks = random_kernels(rng, 3, 3);
  const auto cfg = chain_config(27);
  const Matrix img = random_image(rng, side, side);
  for (auto _ : state) {
    auto maps = accel::convolve_matrix(img, ks, cfg);
    benchmark::DoNotOptimize(maps);
  }
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_MatrixConvolve)->Arg(32)->Arg(64)->Arg(128);

void BM_GradientStep(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const Matrix img = random_image(rng, 30, 30);
  const auto model = cnn::init_model(7);
  for (auto _ : state) {
    auto g = cnn::loss_and_gradients(img, 4, model);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_GradientStep);

}  // namespace

BENCHMARK_MAIN();
