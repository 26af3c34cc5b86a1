#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "optoconv/matrix.hpp"

namespace optoconv::comb {

// Speed of light, used for the frequency <-> wavelength conversion.
inline constexpr double kSpeedOfLight_nm_thz = 299792.458;  // nm * THz

struct CombLine {
  int index = 0;
  double frequency_thz = 0.0;
  double power = 0.0;  // linear, normalized
};

// Equally spaced optical carrier lines. Frequencies increase with index, so
// wavelengths decrease with index.
struct CombSpectrum {
  std::vector<CombLine> lines;
  double fsr_ghz = 0.0;
  double center_wavelength_nm = 0.0;

  int count() const { return static_cast<int>(lines.size()); }
  double wavelength_nm(int i) const {
    return kSpeedOfLight_nm_thz / lines[static_cast<size_t>(i)].frequency_thz;
  }
  double span_nm() const;
};

// Line powers are 1.0 perturbed by a seeded uniform ripple of up to
// +/- flatness_ripple_db.
CombSpectrum generate_comb(int n_lines, double fsr_ghz,
                           double center_wavelength_nm,
                           double flatness_ripple_db, std::uint64_t seed);

std::string comb_to_csv(const CombSpectrum& c);

// Q square kernels of identical side length k.
struct KernelSet {
  std::vector<Matrix> kernels;
  int k = 0;

  int count() const { return static_cast<int>(kernels.size()); }
  int flattened_length() const { return k * k; }  // R, per kernel
};

KernelSet make_kernel_set(std::vector<Matrix> kernels);

// Composite weight vector of length Q*R. Within each kernel the entries are
// read column-major and then reversed, so that the delay-and-sum chain (which
// convolves, i.e. flips the weights in time) realizes a correlation with the
// unflipped kernel.
std::vector<double> flatten_kernels(const KernelSet& ks);
KernelSet unflatten_kernels(std::span<const double> w, int k, int q);

// Kernel file format: one block per kernel, a "kernel,<index>,<k>" header
// row followed by k rows of k comma separated values.
std::string kernels_to_csv(const KernelSet& ks);
KernelSet kernels_from_csv(const std::string& text);

enum class SignPolicy { balanced, input_encoded };

// Kernel weights imprinted on comb-line powers. Channel i carries
// scale * |w[i]|; the sign either selects the detector port (balanced) or is
// expected to ride on the input waveform (input_encoded).
struct ShapedSpectrum {
  std::vector<double> channel_weights;  // scale * |w[i]|
  std::vector<int> sign_map;            // +1 / -1 port per channel
  std::vector<int> kernel_band;         // kernel ordinal per channel
  std::vector<double> frequency_thz;    // carrier of each channel
  int band_length = 0;                  // R, channels per kernel
  int n_bands = 0;                      // Q
  double scale = 1.0;                   // recorded so downstream can rescale
};

// band_length is the per-kernel channel count R (w holds Q*R entries);
// 0 treats all of w as a single band.
ShapedSpectrum shape_spectrum(const CombSpectrum& c, std::span<const double> w,
                              SignPolicy policy, int band_length = 0);

struct CalibrationOptions {
  int max_iters = 20;
  double tol_rms = 0.01;  // relative RMS target
  bool measurement_noise = false;
  double measurement_snr_db = 40.0;
  std::uint64_t seed = 0;
};

struct CalibrationResult {
  std::vector<double> settings;   // corrected attenuation per channel
  std::vector<double> residuals;  // relative RMS after each iteration
  int iterations = 0;
};

// Shaper feedback loop: probe with a unit pulse, read per-channel impulse
// peaks, correct each setting by target/measured, repeat until the realized
// weights match the target within tol_rms. Throws ConvergenceError (carrying
// the final residual) if max_iters is exhausted.
CalibrationResult calibrate_shaper(std::span<const double> target,
                                   std::span<const double> channel_gain_errors,
                                   const CalibrationOptions& opt);

}  // namespace optoconv::comb
