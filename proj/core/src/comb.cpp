#include "optoconv/comb.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "optoconv/csv.hpp"
#include "optoconv/rng.hpp"

namespace optoconv::comb {

double CombSpectrum::span_nm() const {
  if (lines.empty()) return 0.0;
  return wavelength_nm(0) - wavelength_nm(count() - 1);
}

CombSpectrum generate_comb(int n_lines, double fsr_ghz,
                           double center_wavelength_nm,
                           double flatness_ripple_db, std::uint64_t seed) {
  require(n_lines >= 1, errc::invalid_parameter, "comb needs at least one line");
  require(fsr_ghz > 0.0, errc::invalid_parameter, "fsr must be positive");
  require(center_wavelength_nm > 0.0, errc::invalid_parameter,
          "center wavelength must be positive");
  require(flatness_ripple_db >= 0.0, errc::invalid_parameter,
          "flatness ripple must be non-negative");

  CombSpectrum c;
  c.fsr_ghz = fsr_ghz;
  c.center_wavelength_nm = center_wavelength_nm;
  c.lines.reserve(static_cast<size_t>(n_lines));

  const double f_center = kSpeedOfLight_nm_thz / center_wavelength_nm;
  const double fsr_thz = fsr_ghz * 1e-3;
  const double half = (n_lines - 1) / 2.0;

  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> ripple_db(-flatness_ripple_db,
                                                   flatness_ripple_db);
  for (int i = 0; i < n_lines; ++i) {
    CombLine line;
    line.index = i;
    line.frequency_thz = f_center + (i - half) * fsr_thz;
    line.power =
        flatness_ripple_db > 0.0 ? std::pow(10.0, ripple_db(rng) / 10.0) : 1.0;
    c.lines.push_back(line);
  }
  return c;
}

std::string comb_to_csv(const CombSpectrum& c) {
  std::string out = "index,frequency_thz,power\n";
  for (const auto& l : c.lines) {
    out += fmt_int(l.index);
    out += ',';
    out += fmt_double(l.frequency_thz);
    out += ',';
    out += fmt_double(l.power);
    out += '\n';
  }
  return out;
}

KernelSet make_kernel_set(std::vector<Matrix> kernels) {
  require(!kernels.empty(), errc::invalid_parameter, "kernel list is empty");
  const int k = kernels.front().rows;
  for (const auto& m : kernels) {
    require(m.rows == k && m.cols == k, errc::invalid_parameter,
            "kernels must be square and share one side length");
  }
  KernelSet ks;
  ks.kernels = std::move(kernels);
  ks.k = k;
  return ks;
}

std::vector<double> flatten_kernels(const KernelSet& ks) {
  require(!ks.kernels.empty(), errc::invalid_parameter, "kernel list is empty");
  const int k = ks.k;
  std::vector<double> w;
  w.reserve(static_cast<size_t>(ks.count()) * ks.flattened_length());
  for (const auto& m : ks.kernels) {
    const size_t base = w.size();
    for (int c = 0; c < k; ++c)
      for (int r = 0; r < k; ++r) w.push_back(m.at(r, c));
    std::reverse(w.begin() + static_cast<long>(base), w.end());
  }
  return w;
}

KernelSet unflatten_kernels(std::span<const double> w, int k, int q) {
  require(k >= 1 && q >= 1, errc::invalid_parameter, "bad kernel shape");
  const int r = k * k;
  require(static_cast<int>(w.size()) == q * r, errc::invalid_parameter,
          "flattened length does not match q*k^2");
  std::vector<Matrix> kernels;
  kernels.reserve(static_cast<size_t>(q));
  for (int i = 0; i < q; ++i) {
    std::vector<double> block(w.begin() + static_cast<long>(i) * r,
                              w.begin() + static_cast<long>(i + 1) * r);
    std::reverse(block.begin(), block.end());
    Matrix m(k, k);
    size_t p = 0;
    for (int c = 0; c < k; ++c)
      for (int row = 0; row < k; ++row) m.at(row, c) = block[p++];
    kernels.push_back(std::move(m));
  }
  return make_kernel_set(std::move(kernels));
}

std::string kernels_to_csv(const KernelSet& ks) {
  std::string out;
  for (int q = 0; q < ks.count(); ++q) {
    out += "kernel," + fmt_int(q) + "," + fmt_int(ks.k) + "\n";
    const auto& m = ks.kernels[static_cast<size_t>(q)];
    for (int r = 0; r < ks.k; ++r) {
      for (int c = 0; c < ks.k; ++c) {
        if (c) out += ',';
        out += fmt_double(m.at(r, c));
      }
      out += '\n';
    }
  }
  return out;
}

KernelSet kernels_from_csv(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text);
  std::vector<Matrix> kernels;
  size_t i = 0;
  while (i < lines.size()) {
    if (lines[i].empty() || lines[i] == "\r") {
      ++i;
      continue;
    }
    auto header = split_csv_line(lines[i]);
    require(header.size() == 3 && header[0] == "kernel", errc::format,
            "expected 'kernel,<index>,<k>' header at line " + fmt_int(i + 1));
    const auto index = parse_int(header[1]);
    require(index == static_cast<long long>(kernels.size()), errc::format,
            "kernel blocks must be numbered in order at line " + fmt_int(i + 1));
    const int k = static_cast<int>(parse_int(header[2]));
    require(k >= 1, errc::format, "kernel side must be >= 1 at line " + fmt_int(i + 1));
    ++i;

    Matrix m(k, k);
    for (int r = 0; r < k; ++r, ++i) {
      require(i < lines.size(), errc::format, "truncated kernel block");
      auto cells = split_csv_line(lines[i]);
      require(static_cast<int>(cells.size()) == k, errc::format,
              "expected " + fmt_int(k) + " values at line " + fmt_int(i + 1));
      for (int c = 0; c < k; ++c) m.at(r, c) = parse_double(cells[static_cast<size_t>(c)]);
    }
    kernels.push_back(std::move(m));
  }
  return make_kernel_set(std::move(kernels));
}

ShapedSpectrum shape_spectrum(const CombSpectrum& c, std::span<const double> w,
                              SignPolicy policy, int band_length) {
  require(!w.empty(), errc::invalid_parameter, "weight vector is empty");
  require(c.count() >= static_cast<int>(w.size()), errc::capacity,
          "comb has " + fmt_int(c.count()) + " lines, need " +
              fmt_int(static_cast<long long>(w.size())));

  ShapedSpectrum s;
  const int n = static_cast<int>(w.size());
  if (band_length == 0) band_length = n;
  require(band_length >= 1 && n % band_length == 0, errc::invalid_parameter,
          "weight count is not a multiple of the band length");
  s.band_length = band_length;
  s.n_bands = n / band_length;
  double wmax = 0.0;
  for (double x : w) wmax = std::max(wmax, std::abs(x));
  s.scale = wmax > 0.0 ? 1.0 / wmax : 1.0;

  s.channel_weights.resize(static_cast<size_t>(n));
  s.sign_map.resize(static_cast<size_t>(n));
  s.kernel_band.resize(static_cast<size_t>(n));
  s.frequency_thz.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    s.channel_weights[static_cast<size_t>(i)] = s.scale * std::abs(w[static_cast<size_t>(i)]);
    s.sign_map[static_cast<size_t>(i)] =
        (policy == SignPolicy::balanced && w[static_cast<size_t>(i)] < 0.0) ? -1 : +1;
    s.kernel_band[static_cast<size_t>(i)] = i / band_length;
    s.frequency_thz[static_cast<size_t>(i)] = c.lines[static_cast<size_t>(i)].frequency_thz;
  }
  return s;
}

namespace {

double relative_rms(std::span<const double> realized,
                    std::span<const double> target) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < target.size(); ++i) {
    const double d = realized[i] - target[i];
    num += d * d;
    den += target[i] * target[i];
  }
  if (den == 0.0) return std::sqrt(num / static_cast<double>(target.size()));
  return std::sqrt(num / den);
}

}  // namespace

CalibrationResult calibrate_shaper(std::span<const double> target,
                                   std::span<const double> channel_gain_errors,
                                   const CalibrationOptions& opt) {
  require(!target.empty(), errc::invalid_parameter, "empty calibration target");
  require(target.size() == channel_gain_errors.size(), errc::invalid_parameter,
          "gain error vector length mismatch");
  for (double g : channel_gain_errors)
    require(g > 0.0, errc::invalid_parameter, "gain errors must be positive");
  require(opt.tol_rms > 0.0, errc::invalid_parameter, "tol must be positive");
  require(opt.max_iters >= 1, errc::invalid_parameter, "max_iters must be >= 1");

  const size_t n = target.size();
  CalibrationResult res;
  res.settings.assign(target.begin(), target.end());

  auto rng = make_rng(derive_seed(opt.seed, 0x5cabU));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double noise_rel =
      opt.measurement_noise
          ? std::pow(10.0, -opt.measurement_snr_db / 20.0)
          : 0.0;

  // Unit-pulse probe: the progressive delays isolate each channel's weight as
  // one temporal peak, so a measurement reads settings[i] * gain[i] directly.
  std::vector<double> measured(n);
  for (int it = 1; it <= opt.max_iters; ++it) {
    for (size_t i = 0; i < n; ++i) {
      double m = res.settings[i] * channel_gain_errors[i];
      if (noise_rel > 0.0) m += noise_rel * gauss(rng) * std::abs(m);
      measured[i] = m;
    }
    const double resid = relative_rms(measured, target);
    res.residuals.push_back(resid);
    res.iterations = it;
    if (resid <= opt.tol_rms) return res;
    for (size_t i = 0; i < n; ++i) {
      if (measured[i] != 0.0) res.settings[i] *= target[i] / measured[i];
      // a zero target keeps its zero setting: target/measured = 0
    }
  }
  throw ConvergenceError("shaper calibration did not reach tol in " +
                             fmt_int(opt.max_iters) + " iterations",
                         res.residuals.back());
}

}  // namespace optoconv::comb
