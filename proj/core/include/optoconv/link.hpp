#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "optoconv/comb.hpp"
#include "optoconv/encode.hpp"

namespace optoconv::link {

struct IdealDelay {
  double step_ps = 0.0;  // per channel within a band
};

// Delays derived from chromatic dispersion: between adjacent channels,
// dt = D * length * dlambda with dlambda taken from the carrier wavelengths.
struct PhysicalDelay {
  double dispersion_ps_nm_km = 17.0;
  double fiber_length_km = 0.0;
};

using DelayModel = std::variant<IdealDelay, PhysicalDelay>;

// Cumulative delay of each channel of one kernel band, relative to the
// band's first channel. band_frequencies_thz holds the carriers of that
// band's channels in index order.
std::vector<double> channel_delays_ps(const DelayModel& dm,
                                      std::span<const double> band_frequencies_thz);

struct NoiseModel {
  bool enabled = false;
  double snr_db = 48.0;  // electrical, post-detection, per output sample
  std::uint64_t seed = 0;
};

// Weighted replicas of one input waveform across the shaped channels.
// Replicas are kept conceptual (one shared sample array plus per-channel
// weight/sign/delay) and materialized on demand.
struct MulticastSignal {
  std::vector<double> samples;  // input waveform samples
  double symbol_period_ps = 0.0;
  int samples_per_symbol = 1;
  long n_symbols = 0;
  std::vector<double> weights;       // shaped channel powers
  std::vector<int> signs;            // detector port per channel
  std::vector<int> band;             // kernel ordinal per channel
  std::vector<double> frequency_thz; // carrier per channel
  std::vector<double> delays_ps;     // zero until apply_delays
  int band_length = 0;
  int n_bands = 0;
  double scale = 1.0;  // shaping constant carried through for rescaling

  int n_channels() const { return static_cast<int>(weights.size()); }
  // Weighted, delayed replica of channel i at sample resolution.
  std::vector<double> materialize(int channel, long n_out_samples) const;
};

MulticastSignal multicast(const encode::TemporalWaveform& x,
                          const comb::ShapedSpectrum& shaped);

MulticastSignal apply_delays(MulticastSignal m, const DelayModel& dm);

struct DetectedWaveform {
  int kernel_index = 0;
  std::vector<double> samples;
  double symbol_period_ps = 0.0;
  int samples_per_symbol = 1;
  int alignment_offset = 0;  // sample offset of the symbol decision point
  long n_symbols = 0;        // L + R - 1

  // Center-sample of each symbol slot.
  std::vector<double> symbols() const;
};

// Balanced photodetection of one kernel band: positive-port channels minus
// negative-port channels, summed at sample resolution with linear
// interpolation for fractional delays. Gaussian noise is injected
// post-detection so that the per-sample SNR matches the model; the noise
// stream is derived from (seed, kernel_index).
DetectedWaveform detect(const MulticastSignal& m, int band,
                        const NoiseModel& nm, int adc_samples_per_symbol);

// Largest bit depth supported by the given electrical SNR, from
// 20*log10(2^B) = SNR rounded to the nearest integer B.
int effective_bit_resolution(double snr_db);

}  // namespace optoconv::link
