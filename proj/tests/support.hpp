#pragma once

// Shared test scaffolding: brute-force reference implementations written
// independently of the library (so agreement is evidence, not tautology),
// plus small fixtures for simulator configs and scratch files.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "optoconv/accel.hpp"
#include "optoconv/comb.hpp"
#include "optoconv/matrix.hpp"

namespace oracle {

// Full discrete convolution, y[n] = sum_r w[r] x[n-r], length L + R - 1.
inline std::vector<double> conv_full(const std::vector<double>& x,
                                     const std::vector<double>& w) {
  std::vector<double> y(x.size() + w.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t r = 0; r < w.size(); ++r) y[i + r] += w[r] * x[i];
  return y;
}

// 2-D correlation against the unflipped kernel, vertical stride k,
// horizontal stride 1, complete bands only.
inline optoconv::Matrix correlate2d(const optoconv::Matrix& img,
                                    const optoconv::Matrix& kernel, int k) {
  optoconv::Matrix out(img.rows / k, img.cols - kernel.cols + 1);
  for (int b = 0; b < out.rows; ++b)
    for (int j = 0; j < out.cols; ++j) {
      double acc = 0.0;
      for (int r = 0; r < kernel.rows; ++r)
        for (int c = 0; c < kernel.cols; ++c)
          acc += kernel.at(r, c) * img.at(b * k + r, j + c);
      out.at(b, j) = acc;
    }
  return out;
}

// The composite-vector order: column-major read of the kernel, reversed.
inline std::vector<double> flatten_reversed(const optoconv::Matrix& kmat) {
  std::vector<double> w;
  for (int c = 0; c < kmat.cols; ++c)
    for (int r = 0; r < kmat.rows; ++r) w.push_back(kmat.at(r, c));
  std::reverse(w.begin(), w.end());
  return w;
}

// Column l of m dotted with x, one entry per column.
inline std::vector<double> matvec_cols(const optoconv::Matrix& m,
                                       const std::vector<double>& x) {
  std::vector<double> y(static_cast<std::size_t>(m.cols), 0.0);
  for (int c = 0; c < m.cols; ++c)
    for (int r = 0; r < m.rows; ++r)
      y[static_cast<std::size_t>(c)] +=
          m.at(r, c) * x[static_cast<std::size_t>(r)];
  return y;
}

// Windowed column reduction of one map row.
inline std::vector<double> pool_row(const std::vector<double>& row, int window,
                                    int stride, bool take_max) {
  std::vector<double> out;
  for (std::size_t start = 0; start + window <= row.size();
       start += static_cast<std::size_t>(stride)) {
    double acc = take_max ? row[start] : 0.0;
    for (int i = 0; i < window; ++i) {
      const double v = row[start + static_cast<std::size_t>(i)];
      acc = take_max ? std::max(acc, v) : acc + v;
    }
    out.push_back(take_max ? acc : acc / window);
  }
  return out;
}

// Peak-normalized worst-case deviation: max|a-b| / max|b|.
inline double rel_err(const std::vector<double>& a,
                      const std::vector<double>& b) {
  double worst = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]));
    peak = std::max(peak, std::abs(b[i]));
  }
  return worst / (peak + 1e-300);
}

inline double rel_err(const optoconv::Matrix& a, const optoconv::Matrix& b) {
  return rel_err(a.v, b.v);
}

}  // namespace oracle

namespace testutil {

// Noiseless ideal chain with symbol-matched delays and no quantizer.
inline optoconv::accel::SimConfig sim_config(int n_lines, double tau_ps = 1.0) {
  optoconv::accel::SimConfig cfg;
  cfg.comb = optoconv::comb::generate_comb(n_lines, 48.9, 1550.0, 0.0, 42);
  cfg.tau_ps = tau_ps;
  return cfg;
}

inline optoconv::Matrix random_matrix(std::mt19937_64& rng, int rows, int cols,
                                      double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  optoconv::Matrix m(rows, cols);
  for (double& v : m.v) v = u(rng);
  return m;
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n,
                                         double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

inline std::string scratch_path(const std::string& name) {
  const std::filesystem::path dir(OPTOCONV_SCRATCH_DIR);
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

inline std::string repo_path(const std::string& name) {
  return std::string(OPTOCONV_REPO_DIR) + "/" + name;
}

// Redirects std::cout for the lifetime of the object.
class CaptureStdout {
public:
  CaptureStdout() : old_(std::cout.rdbuf(ss_.rdbuf())) {}
  ~CaptureStdout() { std::cout.rdbuf(old_); }
  std::string text() const { return ss_.str(); }

private:
  std::ostringstream ss_;
  std::streambuf* old_;
};

class CaptureStderr {
public:
  CaptureStderr() : old_(std::cerr.rdbuf(ss_.rdbuf())) {}
  ~CaptureStderr() { std::cerr.rdbuf(old_); }
  std::string text() const { return ss_.str(); }

private:
  std::ostringstream ss_;
  std::streambuf* old_;
};

}  // namespace testutil
