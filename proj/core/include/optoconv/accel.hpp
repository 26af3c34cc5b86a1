#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "optoconv/comb.hpp"
#include "optoconv/encode.hpp"
#include "optoconv/link.hpp"

namespace optoconv::accel {

// Everything one simulated run needs besides the data: carrier grid, shaping
// policy, delay and noise models, transmitter quantization and sampling.
struct SimConfig {
  comb::CombSpectrum comb;
  comb::SignPolicy sign_policy = comb::SignPolicy::balanced;
  // Ideal step 0 means "track the symbol period", the matched-delay case.
  link::DelayModel delay = link::IdealDelay{0.0};
  link::NoiseModel noise;
  std::optional<encode::QuantizerConfig> quantizer;
  double tau_ps = 1.0;
  int samples_per_symbol = 1;
};

struct FeatureMap {
  int kernel_index = 0;
  Matrix values;  // floor(rows/k) rows, cols - k + 1 columns
};

// Serial symbol streams out of the detector, one per kernel, each of length
// L + R - 1 and rescaled from shaped channel units back into kernel units.
std::vector<std::vector<double>> convolve_vector(std::span<const double> x,
                                                 const comb::KernelSet& ks,
                                                 const SimConfig& cfg);

// Band-flattens the image, runs convolve_vector, and keeps the symbols where
// a whole receptive field is in flight: map entry (b, j) is output symbol
// b*k*cols + j*k + R-1 of that kernel's stream. Partial trailing bands are
// encoded but produce no map entries.
std::vector<FeatureMap> convolve_matrix(const Matrix& img,
                                        const comb::KernelSet& ks,
                                        const SimConfig& cfg);

// Dot product as the L = R convolution special case, sampled at the single
// symbol where all channels overlap. noise_stream decorrelates repeated
// calls that share cfg.noise.seed.
double dot_product(std::span<const double> x, std::span<const double> w,
                   const SimConfig& cfg, std::uint64_t noise_stream = 0);

struct MatrixShape {
  int rows = 0;
  int cols = 0;
  int k = 0;
};

struct ThroughputReport {
  double vector_flops = 0.0;
  int effective_bits = 0;
  double bits_per_second = 0.0;
  bool snr_ok_for_8bit = false;
  bool has_matrix = false;
  long useful_symbols = 0;  // per kernel: floor(rows/k) * (cols - k + 1)
  double utilization_ratio = 0.0;
  double effective_matrix_flops = 0.0;
  double nominal_matrix_flops = 0.0;
  double frame_duration_s = 0.0;
  double images_per_second = 0.0;
};

// Accounting for one accelerator setting. r_total counts the weights engaged
// per output symbol across all kernels (Q * R). For matrix runs, utilization
// divides the sampled feature-map entries by the L - R + 1 full-overlap
// symbols of one frame; the nominal figure divides the vector speed by the
// vertical stride k instead.
ThroughputReport throughput_report(int r_total, double tau_ps,
                                   const std::optional<MatrixShape>& shape,
                                   double snr_db);

// A length-R dot product emits 2R - 1 symbols for 2R operations; n_neurons
// such pipelines run on disjoint wavelength bands.
double fc_throughput(int r_per_neuron, double tau_ps, int n_neurons);

std::string report_text(const ThroughputReport& r);
std::string report_csv(const ThroughputReport& r);

// "11.3208 TFLOPS" / "317.9044 GFLOPS".
std::string format_flops(double per_second);

// Transmit side of a matrix run up to the fiber output, kept at sample
// resolution for waveform inspection. Identical signal path to
// convolve_matrix.
struct PreparedSignal {
  encode::TemporalWaveform waveform;
  link::MulticastSignal channels;
};

PreparedSignal prepare_matrix_signal(const Matrix& img,
                                     const comb::KernelSet& ks,
                                     const SimConfig& cfg);

}  // namespace optoconv::accel
