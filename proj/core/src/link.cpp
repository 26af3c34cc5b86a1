#include "optoconv/link.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "optoconv/error.hpp"
#include "optoconv/rng.hpp"

namespace optoconv::link {

std::vector<double> channel_delays_ps(const DelayModel& dm,
                                      std::span<const double> band_frequencies_thz) {
  const auto n = static_cast<int>(band_frequencies_thz.size());
  std::vector<double> delays(static_cast<std::size_t>(n), 0.0);
  if (n == 0) return delays;

  if (const auto* ideal = std::get_if<IdealDelay>(&dm)) {
    require(ideal->step_ps >= 0.0, errc::invalid_parameter, "delay step must be >= 0");
    for (int i = 0; i < n; ++i) delays[static_cast<std::size_t>(i)] = i * ideal->step_ps;
    return delays;
  }

  const auto& phys = std::get<PhysicalDelay>(dm);
  require(phys.fiber_length_km >= 0.0, errc::invalid_parameter, "fiber length must be >= 0");
  const double lambda0 = comb::kSpeedOfLight_nm_thz / band_frequencies_thz[0];
  for (int i = 1; i < n; ++i) {
    const double lambda = comb::kSpeedOfLight_nm_thz / band_frequencies_thz[static_cast<std::size_t>(i)];
    delays[static_cast<std::size_t>(i)] =
        phys.dispersion_ps_nm_km * phys.fiber_length_km * std::abs(lambda - lambda0);
  }
  return delays;
}

MulticastSignal multicast(const encode::TemporalWaveform& x,
                          const comb::ShapedSpectrum& shaped) {
  require(!shaped.channel_weights.empty(), errc::invalid_parameter,
          "shaped spectrum has no channels");
  require(shaped.band_length > 0 && shaped.n_bands > 0, errc::invalid_parameter,
          "shaped spectrum has no band layout");

  MulticastSignal m;
  m.samples = x.samples;
  m.symbol_period_ps = x.symbol_period_ps;
  m.samples_per_symbol = x.samples_per_symbol;
  m.n_symbols = x.n_symbols;
  m.weights = shaped.channel_weights;
  m.signs = shaped.sign_map;
  m.band = shaped.kernel_band;
  m.frequency_thz = shaped.frequency_thz;
  m.delays_ps.assign(m.weights.size(), 0.0);
  m.band_length = shaped.band_length;
  m.n_bands = shaped.n_bands;
  m.scale = shaped.scale;
  return m;
}

MulticastSignal apply_delays(MulticastSignal m, const DelayModel& dm) {
  const int r = m.band_length;
  require(r > 0 && m.n_bands > 0, errc::invalid_parameter, "signal has no band layout");
  require(static_cast<int>(m.frequency_thz.size()) == m.n_channels(),
          errc::invalid_parameter, "carrier list does not match channel count");

  for (int b = 0; b < m.n_bands; ++b) {
    const auto first = static_cast<std::size_t>(b) * static_cast<std::size_t>(r);
    const std::span<const double> freqs(m.frequency_thz.data() + first,
                                        static_cast<std::size_t>(r));
    const std::vector<double> band_delays = channel_delays_ps(dm, freqs);
    for (int i = 0; i < r; ++i)
      m.delays_ps[first + static_cast<std::size_t>(i)] = band_delays[static_cast<std::size_t>(i)];
  }
  return m;
}

namespace {

// Input waveform value at fractional sample position t, zero outside.
double sample_at(const std::vector<double>& s, double t) {
  if (t < 0.0) return 0.0;
  const auto n = static_cast<long>(s.size());
  const double fl = std::floor(t);
  const auto i0 = static_cast<long>(fl);
  if (i0 >= n) return 0.0;
  const double frac = t - fl;
  const double a = s[static_cast<std::size_t>(i0)];
  if (frac == 0.0) return a;
  const double b = (i0 + 1 < n) ? s[static_cast<std::size_t>(i0 + 1)] : 0.0;
  return a + frac * (b - a);
}

}  // namespace

std::vector<double> MulticastSignal::materialize(int channel, long n_out_samples) const {
  require(channel >= 0 && channel < n_channels(), errc::bounds, "channel out of range");
  require(symbol_period_ps > 0.0, errc::invalid_parameter, "symbol period must be > 0");

  const double w = weights[static_cast<std::size_t>(channel)] *
                   (signs[static_cast<std::size_t>(channel)] < 0 ? -1.0 : 1.0);
  const double shift =
      delays_ps[static_cast<std::size_t>(channel)] / symbol_period_ps * samples_per_symbol;
  std::vector<double> out(static_cast<std::size_t>(n_out_samples), 0.0);
  for (long t = 0; t < n_out_samples; ++t)
    out[static_cast<std::size_t>(t)] = w * sample_at(samples, static_cast<double>(t) - shift);
  return out;
}

DetectedWaveform detect(const MulticastSignal& m, int band,
                        const NoiseModel& nm, int adc_samples_per_symbol) {
  require(band >= 0 && band < m.n_bands, errc::bounds, "band out of range");
  require(adc_samples_per_symbol == m.samples_per_symbol, errc::invalid_parameter,
          "detector sample rate must match the waveform");
  require(m.symbol_period_ps > 0.0, errc::invalid_parameter, "symbol period must be > 0");

  const int r = m.band_length;
  const int S = m.samples_per_symbol;
  const auto first = static_cast<std::size_t>(band) * static_cast<std::size_t>(r);

  double max_shift_samples = 0.0;
  for (int i = 0; i < r; ++i) {
    const double shift = m.delays_ps[first + static_cast<std::size_t>(i)] /
                         m.symbol_period_ps * S;
    require(shift >= 0.0, errc::invalid_parameter, "channel delay must be >= 0");
    max_shift_samples = std::max(max_shift_samples, shift);
  }

  DetectedWaveform d;
  d.kernel_index = band;
  d.symbol_period_ps = m.symbol_period_ps;
  d.samples_per_symbol = S;
  d.alignment_offset = S / 2;
  d.n_symbols = m.n_symbols + r - 1;

  const long n_from_symbols = d.n_symbols * S;
  const long n_from_input =
      static_cast<long>(m.samples.size()) + static_cast<long>(std::ceil(max_shift_samples)) + 1;
  const long n_out = std::max(n_from_symbols, n_from_input);
  d.samples.assign(static_cast<std::size_t>(n_out), 0.0);

  for (int i = 0; i < r; ++i) {
    const auto c = first + static_cast<std::size_t>(i);
    const double w = m.weights[c] * (m.signs[c] < 0 ? -1.0 : 1.0);
    if (w == 0.0) continue;
    const double shift = m.delays_ps[c] / m.symbol_period_ps * S;
    const double rounded = std::round(shift);
    if (std::abs(shift - rounded) < 1e-9) {
      // Integer sample shift: plain offset add.
      const auto off = static_cast<long>(rounded);
      const auto n_in = static_cast<long>(m.samples.size());
      for (long t = 0; t < n_in && off + t < n_out; ++t)
        d.samples[static_cast<std::size_t>(off + t)] += w * m.samples[static_cast<std::size_t>(t)];
    } else {
      for (long t = 0; t < n_out; ++t)
        d.samples[static_cast<std::size_t>(t)] +=
            w * sample_at(m.samples, static_cast<double>(t) - shift);
    }
  }

  if (nm.enabled) {
    require(nm.snr_db >= 0.0, errc::invalid_parameter, "snr must be >= 0 dB");
    double power = 0.0;
    for (double v : d.samples) power += v * v;
    power /= static_cast<double>(d.samples.size());
    const double sigma = std::sqrt(power * std::pow(10.0, -nm.snr_db / 10.0));
    if (sigma > 0.0) {
      auto rng = make_rng(derive_seed(nm.seed, static_cast<std::uint64_t>(band)));
      std::normal_distribution<double> gauss(0.0, sigma);
      for (double& v : d.samples) v += gauss(rng);
    }
  }
  return d;
}

std::vector<double> DetectedWaveform::symbols() const {
  std::vector<double> out(static_cast<std::size_t>(n_symbols), 0.0);
  for (long n = 0; n < n_symbols; ++n) {
    const auto idx = static_cast<std::size_t>(n * samples_per_symbol + alignment_offset);
    out[static_cast<std::size_t>(n)] = idx < samples.size() ? samples[idx] : 0.0;
  }
  return out;
}

int effective_bit_resolution(double snr_db) {
  require(snr_db >= 0.0, errc::invalid_parameter, "snr must be >= 0 dB");
  return static_cast<int>(std::llround(snr_db / (20.0 * std::log10(2.0))));
}

}  // namespace optoconv::link
