#include "optoconv/encode.hpp"

#include <cmath>

#include "optoconv/csv.hpp"

namespace optoconv::encode {

FlattenedVector flatten_matrix(const Matrix& img, int band_height) {
  require(band_height >= 1, errc::invalid_parameter,
          "band height must be >= 1");
  require(band_height <= img.rows, errc::invalid_parameter,
          "band height exceeds image rows");
  require(img.rows >= 1 && img.cols >= 1, errc::invalid_parameter,
          "empty image");

  FlattenedVector out;
  out.meta.rows = img.rows;
  out.meta.cols = img.cols;
  out.meta.band_height = band_height;
  out.meta.n_complete_bands = img.rows / band_height;
  out.meta.has_partial_band = (img.rows % band_height) != 0;
  out.meta.length = static_cast<long>(img.rows) * img.cols;
  out.values.reserve(static_cast<size_t>(out.meta.length));

  const int nb = out.meta.n_complete_bands;
  for (int b = 0; b < nb; ++b)
    for (int c = 0; c < img.cols; ++c)
      for (int r = 0; r < band_height; ++r)
        out.values.push_back(img.at(b * band_height + r, c));
  if (out.meta.has_partial_band) {
    const int top = nb * band_height;
    for (int c = 0; c < img.cols; ++c)
      for (int r = top; r < img.rows; ++r) out.values.push_back(img.at(r, c));
  }
  return out;
}

PixelCoord index_map(const FlattenMeta& meta, long n) {
  require(n >= 0 && n < meta.length, errc::bounds,
          "symbol index " + fmt_int(n) + " out of range");
  const int k = meta.band_height;
  const long band_span = static_cast<long>(k) * meta.cols;
  const long complete_span = static_cast<long>(meta.n_complete_bands) * band_span;
  PixelCoord p;
  if (n < complete_span) {
    p.band = static_cast<int>(n / band_span);
    const long within = n % band_span;
    p.col = static_cast<int>(within / k);
    p.row = p.band * k + static_cast<int>(within % k);
  } else {
    const int partial = meta.rows - meta.n_complete_bands * k;
    const long within = n - complete_span;
    p.band = meta.n_complete_bands;
    p.col = static_cast<int>(within / partial);
    p.row = meta.n_complete_bands * k + static_cast<int>(within % partial);
  }
  return p;
}

long index_unmap(const FlattenMeta& meta, const PixelCoord& p) {
  require(p.row >= 0 && p.row < meta.rows && p.col >= 0 && p.col < meta.cols,
          errc::bounds, "pixel coordinate out of range");
  const int k = meta.band_height;
  const int band = p.row / k;
  require(band == p.band, errc::bounds, "band does not match row");
  const long band_span = static_cast<long>(k) * meta.cols;
  if (band < meta.n_complete_bands)
    return band * band_span + static_cast<long>(p.col) * k + (p.row % k);
  const int partial = meta.rows - meta.n_complete_bands * k;
  return static_cast<long>(meta.n_complete_bands) * band_span +
         static_cast<long>(p.col) * partial + (p.row - meta.n_complete_bands * k);
}

double quantize(double v, const QuantizerConfig& q) {
  require(q.bits >= 1 && q.bits <= 32, errc::invalid_parameter,
          "quantizer bits must be in [1, 32]");
  require(q.full_scale > 0.0, errc::invalid_parameter,
          "full scale must be positive");
  require(v >= 0.0 && v <= q.full_scale, errc::range,
          "value " + fmt_double(v) + " outside [0, full_scale]");
  const double levels = std::ldexp(1.0, q.bits) - 1.0;
  // floor(x + 0.5) rounds ties up
  const double idx = std::floor(v / q.full_scale * levels + 0.5);
  return idx / levels * q.full_scale;
}

TemporalWaveform encode_waveform(std::span<const double> values, double tau_ps,
                                 int samples_per_symbol,
                                 const std::optional<QuantizerConfig>& q,
                                 bool bipolar) {
  require(!values.empty(), errc::invalid_parameter,
          "cannot encode an empty symbol stream");
  require(tau_ps > 0.0, errc::invalid_parameter,
          "symbol period must be positive");
  require(samples_per_symbol >= 1, errc::invalid_parameter,
          "samples per symbol must be >= 1");

  TemporalWaveform w;
  w.symbol_period_ps = tau_ps;
  w.samples_per_symbol = samples_per_symbol;
  w.n_symbols = static_cast<long>(values.size());
  w.dac_bits = q ? q->bits : 0;
  w.bipolar = bipolar;
  w.samples.reserve(values.size() * static_cast<size_t>(samples_per_symbol));
  for (double v : values) {
    double s = v;
    if (q) {
      if (bipolar) {
        require(std::abs(v) <= q->full_scale, errc::range,
                "value " + fmt_double(v) + " outside [-full_scale, full_scale]");
        s = std::copysign(quantize(std::abs(v), *q), v);
      } else {
        s = quantize(v, *q);
      }
    } else if (!bipolar) {
      require(v >= 0.0, errc::range,
              "negative value in unipolar waveform: " + fmt_double(v));
    }
    for (int i = 0; i < samples_per_symbol; ++i) w.samples.push_back(s);
  }
  return w;
}

}  // namespace optoconv::encode
