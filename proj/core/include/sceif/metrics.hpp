#pragma once

#include <cstdint>

#include "sceif/image.hpp"

namespace sceif {

double mse(const Image& a, const Image& b);

// 10*log10(peak^2 / MSE); +infinity for identical images.
double psnr(const Image& a, const Image& b, int bits);

// Mean SSIM over valid 11x11 Gaussian windows (sigma 1.5), C1 = (0.01 L)^2,
// C2 = (0.03 L)^2, channels averaged.
double mssim(const Image& a, const Image& b, int bits);

// total pixels over total retained coefficients.
double sparsity_ratio(std::uint64_t total_pixels, std::uint64_t total_coeffs);

}  // namespace sceif
