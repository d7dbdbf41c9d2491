#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "sceif/baseline_dct.hpp"
#include "sceif/folding.hpp"
#include "sceif/keystream.hpp"
#include "sceif/metrics.hpp"
#include "sceif/omp2d.hpp"

namespace {

Eigen::MatrixXd random_block(sceif::RandomStream& rng, int n, double amp = 120.0) {
  Eigen::MatrixXd m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = amp * rng.uniform();
  return m;
}

sceif::Image synthetic(int rows, int cols, int channels) {
  sceif::Image img(rows, cols, channels, 8);
  for (int z = 0; z < channels; ++z)
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        img.channels[static_cast<std::size_t>(z)](r, c) =
            128.0 + 70.0 * std::sin(r / 7.0 + z) * std::cos(c / 9.0);
  return img;
}

void BM_SelectAtom(benchmark::State& state) {
  const sceif::Dictionary1D dict = sceif::build_mixed(8);
  sceif::RandomStream rng(1);
  const std::vector<Eigen::MatrixXd> residuals{random_block(rng, 8)};
  const std::vector<std::uint8_t> blocked(1600, 0);
  for (auto _ : state) {
    auto pick = sceif::select_atom(residuals, dict, dict, blocked);
    benchmark::DoNotOptimize(pick);
  }
}
BENCHMARK(BM_SelectAtom);

void BM_ApproximateBlock(benchmark::State& state) {
  const sceif::Dictionary1D dict = sceif::build_mixed(8);
  const int z_count = static_cast<int>(state.range(0));
  sceif::RandomStream rng(2);
  std::vector<Eigen::MatrixXd> blocks;
  for (int z = 0; z < z_count; ++z) blocks.push_back(random_block(rng, 8));
  sceif::OmpConfig cfg;
  cfg.rho = sceif::rho_from_psnr(43.0, 8, 8, z_count);
  for (auto _ : state) {
    auto approx = sceif::approximate_block(blocks, dict, dict, cfg);
    benchmark::DoNotOptimize(approx);
  }
}
BENCHMARK(BM_ApproximateBlock)->Arg(1)->Arg(3);

void BM_ApproximateImage128(benchmark::State& state) {
  const sceif::Image img = synthetic(128, 128, 1);
  const sceif::Dictionary1D dict = sceif::build_mixed(8);
  sceif::OmpConfig cfg;
  cfg.rho = sceif::rho_from_psnr(43.0, 8, 8, 1);
  for (auto _ : state) {
    auto approx = sceif::approximate_image(img, dict, cfg);
    benchmark::DoNotOptimize(approx);
  }
}
BENCHMARK(BM_ApproximateImage128);

void BM_Fold128(benchmark::State& state) {
  const sceif::Image img = synthetic(128, 128, 1);
  const sceif::Dictionary1D dict = sceif::build_mixed(8);
  sceif::OmpConfig cfg;
  cfg.rho = sceif::rho_from_psnr(43.0, 8, 8, 1);
  const sceif::ImageApproximation approx = sceif::approximate_image(img, dict, cfg);
  for (auto _ : state) {
    auto folded = sceif::fold_approximation(approx, sceif::KeyMaterial{1234567891, 7});
    benchmark::DoNotOptimize(folded);
  }
}
BENCHMARK(BM_Fold128);

void BM_Unfold128(benchmark::State& state) {
  const sceif::Image img = synthetic(128, 128, 1);
  sceif::OmpConfig cfg;
  cfg.rho = sceif::rho_from_psnr(43.0, 8, 8, 1);
  const sceif::FoldResult folded = sceif::fold(img, sceif::KeyMaterial{1234567891, 7}, cfg);
  for (auto _ : state) {
    auto rec = sceif::unfold(folded.container, 1234567891);
    benchmark::DoNotOptimize(rec);
  }
}
BENCHMARK(BM_Unfold128);

void BM_Dct2Block(benchmark::State& state) {
  sceif::RandomStream rng(3);
  const Eigen::MatrixXd block = random_block(rng, 8);
  for (auto _ : state) {
    auto c = sceif::dct2_block(block);
    benchmark::DoNotOptimize(c);
  }
}
BENCHMARK(BM_Dct2Block);

void BM_Mssim256(benchmark::State& state) {
  const sceif::Image a = synthetic(256, 256, 1);
  sceif::Image b = a;
  b.channels[0].array() += 1.5;
  for (auto _ : state) {
    double v = sceif::mssim(a, b, 8);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_Mssim256);

}  // namespace

BENCHMARK_MAIN();
