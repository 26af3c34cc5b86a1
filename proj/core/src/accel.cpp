#include "optoconv/accel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "optoconv/csv.hpp"
#include "optoconv/error.hpp"
#include "optoconv/rng.hpp"

namespace optoconv::accel {

namespace {

bool any_negative(std::span<const double> v) {
  return std::any_of(v.begin(), v.end(), [](double x) { return x < 0.0; });
}

// Encode, shape, multicast, delay: the shared front half of every run.
link::MulticastSignal front_end(std::span<const double> x,
                                std::span<const double> w, int band_length,
                                const SimConfig& cfg) {
  const auto xw = encode::encode_waveform(x, cfg.tau_ps, cfg.samples_per_symbol,
                                          cfg.quantizer, any_negative(x));
  const auto shaped =
      comb::shape_spectrum(cfg.comb, w, cfg.sign_policy, band_length);
  auto m = link::multicast(xw, shaped);

  link::DelayModel dm = cfg.delay;
  if (auto* ideal = std::get_if<link::IdealDelay>(&dm))
    if (ideal->step_ps == 0.0) ideal->step_ps = cfg.tau_ps;
  return link::apply_delays(std::move(m), dm);
}

}  // namespace

std::vector<std::vector<double>> convolve_vector(std::span<const double> x,
                                                 const comb::KernelSet& ks,
                                                 const SimConfig& cfg) {
  require(!x.empty(), errc::invalid_parameter, "input vector is empty");
  const auto w = comb::flatten_kernels(ks);
  const auto m = front_end(x, w, ks.flattened_length(), cfg);

  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(ks.count()));
  for (int q = 0; q < ks.count(); ++q) {
    const auto d = link::detect(m, q, cfg.noise, cfg.samples_per_symbol);
    auto symbols = d.symbols();
    for (double& v : symbols) v /= m.scale;
    out.push_back(std::move(symbols));
  }
  return out;
}

std::vector<FeatureMap> convolve_matrix(const Matrix& img,
                                        const comb::KernelSet& ks,
                                        const SimConfig& cfg) {
  const int k = ks.k;
  require(k <= img.rows && k <= img.cols, errc::invalid_parameter,
          "kernel side exceeds the image");
  require_image_range(img);

  const auto flat = encode::flatten_matrix(img, k);
  const auto streams = convolve_vector(flat.values, ks, cfg);

  const int map_rows = flat.meta.n_complete_bands;
  const int map_cols = img.cols - k + 1;
  const int r = ks.flattened_length();
  std::vector<FeatureMap> maps;
  maps.reserve(streams.size());
  for (int q = 0; q < ks.count(); ++q) {
    FeatureMap fm;
    fm.kernel_index = q;
    fm.values = Matrix(map_rows, map_cols);
    for (int b = 0; b < map_rows; ++b) {
      const long base = static_cast<long>(b) * k * img.cols + (r - 1);
      for (int j = 0; j < map_cols; ++j)
        fm.values.at(b, j) =
            streams[static_cast<std::size_t>(q)]
                   [static_cast<std::size_t>(base + static_cast<long>(j) * k)];
    }
    maps.push_back(std::move(fm));
  }
  return maps;
}

double dot_product(std::span<const double> x, std::span<const double> w,
                   const SimConfig& cfg, std::uint64_t noise_stream) {
  require(x.size() == w.size(), errc::invalid_parameter,
          "input and weight lengths differ");
  require(!x.empty(), errc::invalid_parameter, "empty dot product");
  const int r = static_cast<int>(x.size());

  // The delay-sum flips the channel order in time, so the weights are loaded
  // reversed; output symbol R-1 then pairs weight w[i] with input x[i].
  std::vector<double> chan(w.rbegin(), w.rend());
  std::vector<double> xin(x.begin(), x.end());
  if (cfg.sign_policy == comb::SignPolicy::input_encoded)
    for (int i = 0; i < r; ++i)
      if (w[static_cast<std::size_t>(i)] < 0.0)
        xin[static_cast<std::size_t>(i)] = -xin[static_cast<std::size_t>(i)];

  SimConfig run = cfg;
  run.noise.seed = derive_seed(cfg.noise.seed, noise_stream);

  const auto m = front_end(xin, chan, r, run);
  const auto d = link::detect(m, 0, run.noise, run.samples_per_symbol);
  return d.symbols()[static_cast<std::size_t>(r - 1)] / m.scale;
}

PreparedSignal prepare_matrix_signal(const Matrix& img,
                                     const comb::KernelSet& ks,
                                     const SimConfig& cfg) {
  require(ks.k <= img.rows && ks.k <= img.cols, errc::invalid_parameter,
          "kernel side exceeds the image");
  require_image_range(img);

  const auto flat = encode::flatten_matrix(img, ks.k);
  const auto w = comb::flatten_kernels(ks);

  PreparedSignal ps;
  ps.waveform = encode::encode_waveform(flat.values, cfg.tau_ps,
                                        cfg.samples_per_symbol, cfg.quantizer);
  const auto shaped =
      comb::shape_spectrum(cfg.comb, w, cfg.sign_policy, ks.flattened_length());
  auto m = link::multicast(ps.waveform, shaped);

  link::DelayModel dm = cfg.delay;
  if (auto* ideal = std::get_if<link::IdealDelay>(&dm))
    if (ideal->step_ps == 0.0) ideal->step_ps = cfg.tau_ps;
  ps.channels = link::apply_delays(std::move(m), dm);
  return ps;
}

ThroughputReport throughput_report(int r_total, double tau_ps,
                                   const std::optional<MatrixShape>& shape,
                                   double snr_db) {
  require(r_total >= 1, errc::invalid_parameter, "r_total must be >= 1");
  require(tau_ps > 0.0, errc::invalid_parameter, "tau must be positive");

  ThroughputReport rep;
  rep.vector_flops = 2.0 * r_total / (tau_ps * 1e-12);
  rep.effective_bits = link::effective_bit_resolution(snr_db);
  rep.bits_per_second = rep.vector_flops * rep.effective_bits;
  rep.snr_ok_for_8bit = snr_db >= 48.0;

  if (shape) {
    const int k = shape->k;
    require(k >= 1 && shape->rows >= k && shape->cols >= k,
            errc::invalid_parameter, "matrix shape must fit the kernel");
    const long l = static_cast<long>(shape->rows) * shape->cols;
    const int r = k * k;
    rep.has_matrix = true;
    rep.useful_symbols =
        static_cast<long>(shape->rows / k) * (shape->cols - k + 1);
    rep.utilization_ratio =
        static_cast<double>(rep.useful_symbols) / static_cast<double>(l - r + 1);
    rep.effective_matrix_flops = rep.vector_flops * rep.utilization_ratio;
    rep.nominal_matrix_flops = rep.vector_flops / k;
    rep.frame_duration_s = static_cast<double>(l) * tau_ps * 1e-12;
    rep.images_per_second = 1.0 / rep.frame_duration_s;
  }
  return rep;
}

double fc_throughput(int r_per_neuron, double tau_ps, int n_neurons) {
  require(r_per_neuron >= 1, errc::invalid_parameter, "r must be >= 1");
  require(tau_ps > 0.0, errc::invalid_parameter, "tau must be positive");
  require(n_neurons >= 1, errc::invalid_parameter, "n_neurons must be >= 1");
  const double r = r_per_neuron;
  return 2.0 * r / (tau_ps * 1e-12 * (2.0 * r - 1.0)) * n_neurons;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  return std::string(buf, res.ptr);
}

std::string fmt_duration(double s) {
  if (s >= 1e-6) return fixed(s * 1e6, 4) + " us";
  return fixed(s * 1e9, 4) + " ns";
}

}  // namespace

std::string format_flops(double per_second) {
  if (per_second >= 1e12) return fixed(per_second * 1e-12, 4) + " TFLOPS";
  return fixed(per_second * 1e-9, 4) + " GFLOPS";
}

std::string report_text(const ThroughputReport& r) {
  std::string out;
  out += "vector speed        " + format_flops(r.vector_flops) + "\n";
  if (r.has_matrix) {
    out += "utilization         " + fixed(r.utilization_ratio * 100.0, 4) +
           " % (" + fmt_int(r.useful_symbols) + " sampled symbols per kernel)\n";
    out += "effective speed     " + format_flops(r.effective_matrix_flops) + "\n";
    out += "nominal speed       " + format_flops(r.nominal_matrix_flops) + "\n";
    out += "frame duration      " + fmt_duration(r.frame_duration_s) + "\n";
    out += "frame rate          " + fixed(r.images_per_second, 1) + " images/s\n";
  }
  out += "effective bits      " + fmt_int(r.effective_bits) + "\n";
  out += "data rate           " + fixed(r.bits_per_second * 1e-12, 4) + " Tb/s\n";
  out += std::string("snr ok for 8 bit    ") + (r.snr_ok_for_8bit ? "yes" : "no") + "\n";
  return out;
}

std::string report_csv(const ThroughputReport& r) {
  std::string out = "key,value\n";
  out += "vector_flops," + fmt_double(r.vector_flops) + "\n";
  out += "effective_bits," + fmt_int(r.effective_bits) + "\n";
  out += "bits_per_second," + fmt_double(r.bits_per_second) + "\n";
  out += std::string("snr_ok_for_8bit,") + (r.snr_ok_for_8bit ? "1" : "0") + "\n";
  if (r.has_matrix) {
    out += "useful_symbols," + fmt_int(r.useful_symbols) + "\n";
    out += "utilization_ratio," + fmt_double(r.utilization_ratio) + "\n";
    out += "effective_matrix_flops," + fmt_double(r.effective_matrix_flops) + "\n";
    out += "nominal_matrix_flops," + fmt_double(r.nominal_matrix_flops) + "\n";
    out += "frame_duration_s," + fmt_double(r.frame_duration_s) + "\n";
    out += "images_per_second," + fmt_double(r.images_per_second) + "\n";
  }
  return out;
}

}  // namespace optoconv::accel
