#include <random>
#include <vector>

#include "doctest.h"
#include "optoconv/encode.hpp"
#include "optoconv/error.hpp"
#include "support.hpp"

using namespace optoconv;

TEST_SUITE("encode") {

TEST_CASE("bands of k rows are read column by column") {
  Matrix m(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m.at(r, c) = r * 4 + c + 1;
  const auto f = encode::flatten_matrix(m, 2);
  CHECK(f.values == std::vector<double>{1, 5, 2, 6, 3, 7, 4, 8,
                                        9, 13, 10, 14, 11, 15, 12, 16});
  CHECK(f.meta.n_complete_bands == 2);
  CHECK_FALSE(f.meta.has_partial_band);
  CHECK(f.meta.length == 16);
}

TEST_CASE("single-band flattening is a column-major read") {
  Matrix m(3, 3);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m.at(r, c) = r * 3 + c;
  const auto f = encode::flatten_matrix(m, 3);
  CHECK(f.values == std::vector<double>{0, 3, 6, 1, 4, 7, 2, 5, 8});
  CHECK(f.meta.n_complete_bands == 1);
}

TEST_CASE("band accounting matches the image sizes of interest") {
  const auto f500 = encode::flatten_matrix(Matrix(500, 500, 0.1), 3);
  CHECK(f500.meta.length == 250000);
  CHECK(f500.meta.n_complete_bands == 166);
  CHECK(f500.meta.has_partial_band);  // 500 = 3*166 + 2

  const auto f30 = encode::flatten_matrix(Matrix(30, 30, 0.1), 5);
  CHECK(f30.meta.length == 900);
  CHECK(f30.meta.n_complete_bands == 6);
  CHECK_FALSE(f30.meta.has_partial_band);

  CHECK_THROWS_AS(encode::flatten_matrix(Matrix(2, 4, 0.0), 3), SimError);
  CHECK_THROWS_AS(encode::flatten_matrix(Matrix(4, 4, 0.0), 0), SimError);
}

TEST_CASE("partial trailing rows are appended in the same scheme") {
  Matrix m(5, 2);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 2; ++c) m.at(r, c) = r * 2 + c;
  const auto f = encode::flatten_matrix(m, 2);
  CHECK(f.meta.n_complete_bands == 2);
  CHECK(f.meta.has_partial_band);
  // final band is the single row 4, column by column
  CHECK(f.values[8] == 8);
  CHECK(f.values[9] == 9);
}

TEST_CASE("index map returns source pixel coordinates") {
  const auto f = encode::flatten_matrix(Matrix(500, 500, 0.0), 3);
  const auto origin = encode::index_map(f.meta, 0);
  CHECK(origin.band == 0);
  CHECK(origin.row == 0);
  CHECK(origin.col == 0);
  const auto p = encode::index_map(f.meta, 1500);
  CHECK(p.band == 1);
  CHECK(p.row == 3);
  CHECK(p.col == 0);
  CHECK_THROWS_AS(encode::index_map(f.meta, 250000), SimError);
  CHECK_THROWS_AS(encode::index_map(f.meta, -1), SimError);
}

TEST_CASE("index map round-trips over a partial-band image") {
  const auto f = encode::flatten_matrix(Matrix(7, 6, 0.0), 3);
  for (long n = 0; n < f.meta.length; ++n) {
    const auto p = encode::index_map(f.meta, n);
    CHECK(encode::index_unmap(f.meta, p) == n);
  }
}

TEST_CASE("quantizer snaps to the level grid with ties up") {
  const encode::QuantizerConfig q8{8, 1.0};
  CHECK(encode::quantize(0.0, q8) == 0.0);
  CHECK(encode::quantize(1.0, q8) == 1.0);
  const encode::QuantizerConfig q1{1, 1.0};
  CHECK(encode::quantize(0.6, q1) == 1.0);
  CHECK(encode::quantize(0.5, q1) == 1.0);  // tie rounds up
  CHECK(encode::quantize(0.49, q1) == 0.0);
  CHECK_THROWS_AS(encode::quantize(-0.01, q8), SimError);
  CHECK_THROWS_AS(encode::quantize(1.01, q8), SimError);
  CHECK_THROWS_AS(encode::quantize(0.5, encode::QuantizerConfig{0, 1.0}),
                  SimError);
}

TEST_CASE("8-bit error bound over a dense sweep") {
  const encode::QuantizerConfig q{8, 1.0};
  double worst = 0.0;
  for (int i = 0; i <= 100000; ++i) {
    const double v = i / 100000.0;
    worst = std::max(worst, std::abs(v - encode::quantize(v, q)));
  }
  CHECK(worst <= 1.0 / 510.0 + 1e-12);
  CHECK(worst == doctest::Approx(1.0 / 510.0).epsilon(1e-3));
}

TEST_CASE("waveform holds each symbol for S samples") {
  const std::vector<double> x{0.25, 0.5, 1.0};
  const auto wf = encode::encode_waveform(x, 84.0, 5, std::nullopt);
  CHECK(wf.n_symbols == 3);
  CHECK(wf.samples.size() == 15);
  for (int s = 0; s < 5; ++s) {
    CHECK(wf.samples[s] == 0.25);
    CHECK(wf.samples[5 + s] == 0.5);
    CHECK(wf.samples[10 + s] == 1.0);
  }
  CHECK(wf.duration_ps() == doctest::Approx(252.0));
}

TEST_CASE("waveform durations for the frame sizes of interest") {
  const std::vector<double> big(250000, 0.5);
  const auto wf = encode::encode_waveform(big, 15.9, 1, std::nullopt);
  CHECK(wf.duration_ps() == doctest::Approx(3.975e6).epsilon(1e-12));
  const std::vector<double> digits(900, 0.5);
  const auto wd = encode::encode_waveform(digits, 84.0, 1, std::nullopt);
  CHECK(wd.duration_ps() == doctest::Approx(75600.0).epsilon(1e-12));
}

TEST_CASE("quantized waveform snaps symbols to levels") {
  const std::vector<double> x{0.5004, 0.2}; // 0.5004 is between 8-bit levels
  const auto wf =
      encode::encode_waveform(x, 1.0, 1, encode::QuantizerConfig{8, 1.0});
  CHECK(wf.samples[0] == doctest::Approx(128.0 / 255.0).epsilon(1e-15));
  CHECK(wf.dac_bits == 8);
}

TEST_CASE("unipolar encoding rejects negative symbols") {
  const std::vector<double> x{0.5, -0.1};
  CHECK_THROWS_AS(encode::encode_waveform(x, 1.0, 1, std::nullopt), SimError);
  // bipolar accepts signs and preserves them
  const auto wf = encode::encode_waveform(x, 1.0, 1, std::nullopt, true);
  CHECK(wf.samples[1] == -0.1);
  const auto wq = encode::encode_waveform(x, 1.0, 1,
                                          encode::QuantizerConfig{8, 1.0}, true);
  CHECK(wq.samples[1] < 0.0);
}

TEST_CASE("waveform parameter validation") {
  const std::vector<double> x{0.5};
  CHECK_THROWS_AS(encode::encode_waveform(x, 0.0, 1, std::nullopt), SimError);
  CHECK_THROWS_AS(encode::encode_waveform(x, 1.0, 0, std::nullopt), SimError);
  CHECK_THROWS_AS(encode::encode_waveform({}, 1.0, 1, std::nullopt), SimError);
}

}  // TEST_SUITE
