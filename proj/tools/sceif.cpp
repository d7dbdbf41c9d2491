#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>
#include <vector>

#include "sceif/baseline_dct.hpp"
#include "sceif/container.hpp"
#include "sceif/folding.hpp"
#include "sceif/image.hpp"
#include "sceif/metrics.hpp"
#include "sceif/omp2d.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint32_t seed_from_clock() {
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(now).count();
  return static_cast<std::uint32_t>(ns ^ (ns >> 32));
}

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void run_approx(const std::string& in, const std::string& out, double target, int block_n,
                int threads, bool one_shot) {
  const sceif::Image img = sceif::read_pnm(in);
  const sceif::Dictionary1D dict = sceif::build_mixed(block_n);

  const auto t0 = Clock::now();
  sceif::ImageApproximation approx;
  if (one_shot) {
    sceif::OmpConfig cfg;
    cfg.rho = sceif::rho_from_psnr(target, img.bits, block_n, img.channel_count());
    approx = sceif::approximate_image(img, dict, cfg, threads);
  } else {
    approx = sceif::approximate_image_at_psnr(img, dict, target, 0.2, threads);
  }
  const double elapsed = seconds_since(t0);

  sceif::write_pnm(approx.approximation, out);

  const auto pixels = static_cast<std::uint64_t>(img.rows()) * img.cols() * img.channel_count();
  if (approx.total_coeffs == 0) {
    std::printf("note: approximation used zero coefficients, sparsity ratio undefined\n");
  } else {
    std::printf("SR      %.2f\n", sceif::sparsity_ratio(pixels, approx.total_coeffs));
  }
  std::printf("PSNR    %.2f dB\n", approx.achieved_psnr);
  std::printf("MSSIM   %.4f\n", sceif::mssim(img, approx.approximation, img.bits));
  std::printf("time    %.2f s\n", elapsed);
}

void run_fold(const std::string& in, const std::string& out, std::uint64_t key,
              std::optional<std::uint32_t> seed, double target, int block_n, int threads) {
  const sceif::Image img = sceif::read_pnm(in);
  sceif::KeyMaterial km;
  km.private_key = key;
  km.public_seed = seed ? *seed : seed_from_clock();

  sceif::OmpConfig cfg;
  cfg.rho = sceif::rho_from_psnr(target, img.bits, block_n, img.channel_count());

  const auto t0 = Clock::now();
  const sceif::FoldResult result = sceif::fold(img, km, cfg, block_n, threads);
  sceif::write_container(result.container, out);
  const double elapsed = seconds_since(t0);

  const sceif::ContainerGeometry g = sceif::container_geometry(result.container.header);
  const auto pixels = static_cast<std::uint64_t>(img.rows()) * img.cols() * img.channel_count();
  std::printf("seed    %u\n", km.public_seed);
  std::printf("blocks  Q=%d hosts=%d adhoc=%d\n", result.plan.q_total, result.plan.hosts,
              result.plan.adhoc);
  std::printf("folded  %dx%dx%d (plain %ldx%ldx%d)\n", g.rows, g.width,
              result.container.header.channels, static_cast<long>(img.rows()),
              static_cast<long>(img.cols()), img.channel_count());
  if (result.total_coeffs > 0)
    std::printf("SR      %.2f\n", sceif::sparsity_ratio(pixels, result.total_coeffs));
  std::printf("PSNR    %.2f dB (plain text vs source)\n",
              sceif::psnr(img, result.approximation, img.bits));
  std::printf("time    %.2f s\n", elapsed);
}

void run_unfold(const std::string& in, const std::string& out, std::uint64_t key) {
  const auto t0 = Clock::now();
  const sceif::FoldedContainer container = sceif::read_container(in);
  const sceif::UnfoldResult result = sceif::unfold(container, key);
  sceif::write_pnm(result.image, out);
  const double elapsed = seconds_since(t0);

  if (result.suspect)
    std::fprintf(stderr, "warning: decoded values out of range; wrong key suspected\n");
  std::printf("recovered %ldx%ldx%d, %d-bit\n", static_cast<long>(result.image.rows()),
              static_cast<long>(result.image.cols()), result.image.channel_count(),
              result.image.bits);
  std::printf("time    %.2f s\n", elapsed);
}

void run_metrics(const std::string& a_path, const std::string& b_path, int bits_override) {
  const sceif::Image a = sceif::read_pnm(a_path);
  const sceif::Image b = sceif::read_pnm(b_path);
  const int bits = bits_override > 0 ? bits_override : a.bits;
  const double p = sceif::psnr(a, b, bits);
  std::printf("MSE     %.6f\n", sceif::mse(a, b));
  if (std::isinf(p))
    std::printf("PSNR    inf\n");
  else
    std::printf("PSNR    %.4f dB\n", p);
  std::printf("MSSIM   %.6f\n", sceif::mssim(a, b, bits));
}

void run_baseline_dct(const std::string& in, const std::string& out, double target, int block_n) {
  const sceif::Image img = sceif::read_pnm(in);
  const auto t0 = Clock::now();
  const sceif::DctApproxResult result = sceif::dct_approximate(img, target, block_n);
  const double elapsed = seconds_since(t0);
  sceif::write_pnm(result.approximation, out);
  if (result.target_unreachable)
    std::printf("note: target PSNR unreachable, all coefficients retained\n");
  std::printf("SR      %.2f\n", result.sr);
  std::printf("PSNR    %.2f dB\n", result.psnr);
  std::printf("time    %.2f s\n", elapsed);
}

struct BenchRow {
  std::string name;
  double sr_dict = 0.0;
  double sr_dct = 0.0;
  double t_approx = 0.0;
  double t_fold = 0.0;
  double t_unfold = 0.0;
  double total() const { return t_approx + t_fold + t_unfold; }
};

void run_bench(const std::string& dir, double target, int block_n, int threads,
               const std::string& csv_path) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string ext = entry.path().extension().string();
    if (ext == ".pgm" || ext == ".ppm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw sceif::Error("bench: no PGM/PPM files in '" + dir + "'");

  const sceif::Dictionary1D dict = sceif::build_mixed(block_n);
  std::vector<BenchRow> rows;
  for (const auto& path : files) {
    const sceif::Image img = sceif::read_pnm(path.string());
    const auto pixels = static_cast<std::uint64_t>(img.rows()) * img.cols() * img.channel_count();

    BenchRow row;
    row.name = path.stem().string();

    auto t0 = Clock::now();
    const sceif::ImageApproximation approx =
        sceif::approximate_image_at_psnr(img, dict, target, 0.2, threads);
    row.t_approx = seconds_since(t0);
    row.sr_dict = approx.total_coeffs
                      ? sceif::sparsity_ratio(pixels, approx.total_coeffs)
                      : 0.0;

    row.sr_dct = sceif::dct_approximate(img, target, block_n).sr;

    sceif::KeyMaterial km{0x5CE1Fu, 1u};
    t0 = Clock::now();
    const sceif::FoldResult folded = sceif::fold_approximation(approx, km, block_n);
    row.t_fold = seconds_since(t0);

    t0 = Clock::now();
    (void)sceif::unfold(folded.container, km.private_key);
    row.t_unfold = seconds_since(t0);

    rows.push_back(row);
  }

  std::printf("%-16s %10s %8s %12s %10s %10s %8s\n", "image", "SR(dict)", "SR(DCT)",
              "approx[s]", "fold[s]", "unfold[s]", "total");
  BenchRow mean;
  for (const auto& r : rows) {
    std::printf("%-16s %10.2f %8.2f %12.2f %10.2f %10.2f %8.2f\n", r.name.c_str(), r.sr_dict,
                r.sr_dct, r.t_approx, r.t_fold, r.t_unfold, r.total());
    mean.sr_dict += r.sr_dict;
    mean.sr_dct += r.sr_dct;
    mean.t_approx += r.t_approx;
    mean.t_fold += r.t_fold;
    mean.t_unfold += r.t_unfold;
  }
  const double count = static_cast<double>(rows.size());
  std::printf("%-16s %10.2f %8.2f %12.2f %10.2f %10.2f %8.2f\n", "mean", mean.sr_dict / count,
              mean.sr_dct / count, mean.t_approx / count, mean.t_fold / count,
              mean.t_unfold / count, mean.total() / count);

  std::ofstream csv(csv_path);
  if (!csv) throw sceif::Error("bench: cannot write '" + csv_path + "'");
  csv << "image,sr_dict,sr_dct,approx_s,fold_s,unfold_s,total_s\n";
  for (const auto& r : rows)
    csv << r.name << ',' << r.sr_dict << ',' << r.sr_dct << ',' << r.t_approx << ','
        << r.t_fold << ',' << r.t_unfold << ',' << r.total() << '\n';
  std::printf("csv     %s\n", csv_path.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SCEIF codec: sparse approximation, folding and recovery of PGM/PPM images"};
  app.require_subcommand(1);

  std::string in, out, in_b;
  double target = 43.0;
  int block_n = 8;
  int threads = 1;
  std::uint64_t key = 0;
  std::uint32_t seed_value = 0;
  bool one_shot = false;
  int bits_override = 0;
  std::string csv_path = "sceif_bench.csv";

  auto* approx = app.add_subcommand("approx", "sparse-approximate an image");
  approx->add_option("input", in)->required();
  approx->add_option("output", out)->required();
  approx->add_option("--psnr", target, "target PSNR in dB");
  approx->add_option("--block", block_n, "block side");
  approx->add_option("--threads", threads, "worker threads (0 = auto)");
  approx->add_flag("--one-shot", one_shot, "single pass with the uniform per-block budget");

  auto* fold = app.add_subcommand("fold", "fold an image into an encrypted container");
  fold->add_option("input", in)->required();
  fold->add_option("output", out)->required();
  fold->add_option("--key", key, "private key (decimal)")->required();
  auto* seed_opt = fold->add_option("--seed", seed_value, "public seed (default: clock)");
  fold->add_option("--psnr", target, "target PSNR in dB");
  fold->add_option("--block", block_n, "block side");
  fold->add_option("--threads", threads, "worker threads (0 = auto)");

  auto* unfold = app.add_subcommand("unfold", "recover the plain-text approximation");
  unfold->add_option("input", in)->required();
  unfold->add_option("output", out)->required();
  unfold->add_option("--key", key, "private key (decimal)")->required();

  auto* metrics = app.add_subcommand("metrics", "PSNR / MSSIM between two images");
  metrics->add_option("a", in)->required();
  metrics->add_option("b", in_b)->required();
  metrics->add_option("--bits", bits_override, "peak bit depth override");

  auto* dct = app.add_subcommand("baseline-dct", "blockwise DCT thresholding baseline");
  dct->add_option("input", in)->required();
  dct->add_option("output", out)->required();
  dct->add_option("--psnr", target, "target PSNR in dB");
  dct->add_option("--block", block_n, "block side");

  auto* bench = app.add_subcommand("bench", "sparsity and timing table over a corpus directory");
  bench->add_option("corpus", in)->required();
  bench->add_option("--psnr", target, "target PSNR in dB");
  bench->add_option("--block", block_n, "block side");
  bench->add_option("--threads", threads, "worker threads (0 = auto)");
  bench->add_option("--csv", csv_path, "CSV output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(approx))
      run_approx(in, out, target, block_n, resolve_threads(threads), one_shot);
    else if (app.got_subcommand(fold))
      run_fold(in, out, key,
               seed_opt->count() ? std::optional<std::uint32_t>(seed_value) : std::nullopt,
               target, block_n, resolve_threads(threads));
    else if (app.got_subcommand(unfold))
      run_unfold(in, out, key);
    else if (app.got_subcommand(metrics))
      run_metrics(in, in_b, bits_override);
    else if (app.got_subcommand(dct))
      run_baseline_dct(in, out, target, block_n);
    else if (app.got_subcommand(bench))
      run_bench(in, target, block_n, resolve_threads(threads), csv_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
