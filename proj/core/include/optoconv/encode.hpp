#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "optoconv/matrix.hpp"

namespace optoconv::encode {

struct FlattenMeta {
  int rows = 0;
  int cols = 0;
  int band_height = 0;       // k
  int n_complete_bands = 0;  // floor(rows / k)
  bool has_partial_band = false;
  long length = 0;  // rows * cols
};

struct FlattenedVector {
  std::vector<double> values;
  FlattenMeta meta;
};

// Serializes the matrix band by band: k consecutive rows form a band, and
// within a band pixels are emitted column by column, top to bottom. Trailing
// rows that do not fill a band are appended the same way and flagged.
FlattenedVector flatten_matrix(const Matrix& img, int band_height);

struct PixelCoord {
  int band = 0;
  int row = 0;
  int col = 0;
};

PixelCoord index_map(const FlattenMeta& meta, long n);
long index_unmap(const FlattenMeta& meta, const PixelCoord& p);

struct QuantizerConfig {
  int bits = 8;
  double full_scale = 1.0;
};

// Nearest of the 2^bits uniform levels spanning [0, full_scale]; ties round
// up. Values outside the range are an error, never clipped.
double quantize(double v, const QuantizerConfig& q);

struct TemporalWaveform {
  double symbol_period_ps = 0.0;  // tau
  int samples_per_symbol = 1;    // S
  long n_symbols = 0;            // L
  std::vector<double> samples;   // length L * S, rectangular hold
  int dac_bits = 0;              // 0 = quantization off
  bool bipolar = false;

  double duration_ps() const { return symbol_period_ps * static_cast<double>(n_symbols); }
};

// Each symbol value is (optionally) quantized and held for S samples. The
// unipolar form takes values in [0, full_scale]; the bipolar form (used when
// signs ride on the input waveform) takes [-full_scale, full_scale] and
// quantizes magnitude with the sign reapplied.
TemporalWaveform encode_waveform(std::span<const double> values, double tau_ps,
                                 int samples_per_symbol,
                                 const std::optional<QuantizerConfig>& q,
                                 bool bipolar = false);

}  // namespace optoconv::encode
