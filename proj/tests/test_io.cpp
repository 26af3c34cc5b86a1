#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "optoconv/csv.hpp"
#include "optoconv/dataset.hpp"
#include "optoconv/error.hpp"
#include "optoconv/pgm.hpp"
#include "support.hpp"

using namespace optoconv;

namespace {

void expect_errc(errc want, const std::function<void()>& fn) {
  try {
    fn();
    FAIL_CHECK("expected error ", errc_name(want));
  } catch (const SimError& e) {
    CHECK(e.code() == want);
  }
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("number formatting round trips through parsing") {
  for (double v : {0.0, 1.0, -1.0, 0.1, 1.0 / 3.0, 3.975e-6, 1.1320754716981131e13,
                   -2.5e-300, 1e300}) {
    CHECK(parse_double(fmt_double(v)) == v);
  }
  CHECK(fmt_double(0.1) == "0.1");  // shortest form, not 17 digits
  CHECK(fmt_int(0) == "0");
  CHECK(fmt_int(-42) == "-42");
  CHECK(parse_int(fmt_int(1234567890123LL)) == 1234567890123LL);
}

TEST_CASE("parsers reject anything but a whole number") {
  CHECK(parse_double(" 2.5 ") == 2.5);  // surrounding blanks are fine
  CHECK(parse_double("1e3") == 1000.0);
  expect_errc(errc::format, [] { parse_double("1.5x"); });
  expect_errc(errc::format, [] { parse_double(""); });
  expect_errc(errc::format, [] { parse_double("--1"); });
  CHECK(parse_int("12") == 12);
  expect_errc(errc::format, [] { parse_int("12.5"); });
  expect_errc(errc::format, [] { parse_int("abc"); });
  expect_errc(errc::format, [] { parse_int(" "); });
}

TEST_CASE("csv lines split on plain commas") {
  CHECK(split_csv_line("a,b,c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_csv_line("a,,c") == std::vector<std::string>{"a", "", "c"});
  CHECK(split_csv_line("") == std::vector<std::string>{""});
  CHECK(split_csv_line("a,") == std::vector<std::string>{"a", ""});
  CHECK(split_csv_line("a,b\r") == std::vector<std::string>{"a", "b"});
}

TEST_CASE("line splitting drops only the trailing newline") {
  CHECK(split_lines("a\nb\n") == std::vector<std::string>{"a", "b"});
  CHECK(split_lines("a\nb") == std::vector<std::string>{"a", "b"});
  CHECK(split_lines("").empty());
  CHECK(split_lines("\n") == std::vector<std::string>{""});
  CHECK(split_lines("a\n\nb") == std::vector<std::string>{"a", "", "b"});
}

TEST_CASE("matrices serialize row per line") {
  Matrix m(2, 3);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) m.at(r, c) = r * 3 + c + 0.5;
  CHECK(matrix_to_csv(m) == "0.5,1.5,2.5\n3.5,4.5,5.5\n");
  CHECK(matrix_to_csv(Matrix()).empty());
}

TEST_CASE("file helpers write atomically and read back verbatim") {
  const auto path = testutil::scratch_path("io/nested/dir/file.txt");
  atomic_write_text(path, "first\n");
  CHECK(read_text_file(path) == "first\n");
  atomic_write_text(path, "second\n");  // overwrite through the same rename
  CHECK(read_text_file(path) == "second\n");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  expect_errc(errc::io,
              [] { read_text_file(testutil::scratch_path("io/missing.txt")); });
}

TEST_CASE("pgm bytes map to 255ths of full scale") {
  const auto path = testutil::scratch_path("io/levels.pgm");
  std::string raw = "P5\n2 2\n255\n";
  for (unsigned char b : {0, 85, 170, 255}) raw.push_back(static_cast<char>(b));
  atomic_write_text(path, raw);
  const auto img = pgm::read_pgm(path);
  CHECK(img.rows == 2);
  CHECK(img.cols == 2);
  CHECK(img.v == std::vector<double>{0.0, 85.0 / 255.0, 170.0 / 255.0, 1.0});
}

TEST_CASE("pgm write then read recovers every pixel ordinal") {
  std::mt19937_64 rng(80);
  Matrix img = testutil::random_matrix(rng, 7, 5, 0.0, 1.0);
  const auto path = testutil::scratch_path("io/roundtrip.pgm");
  pgm::write_pgm(img, path);
  const auto back = pgm::read_pgm(path);
  REQUIRE(back.size() == img.size());
  for (std::size_t i = 0; i < img.size(); ++i)
    CHECK(back.v[i] == std::lround(img.v[i] * 255.0) / 255.0);
  // a file of exact levels survives the cycle bit for bit
  pgm::write_pgm(back, path);
  CHECK(pgm::read_pgm(path).v == back.v);
}

TEST_CASE("pgm headers tolerate comments but nothing else") {
  const auto path = testutil::scratch_path("io/hdr.pgm");
  atomic_write_text(path, std::string("P5\n# a comment\n1 1\n255\n") + '\x40');
  CHECK(pgm::read_pgm(path).v == std::vector<double>{64.0 / 255.0});

  atomic_write_text(path, std::string("P2\n1 1\n255\n") + '\x40');
  expect_errc(errc::format, [&] { pgm::read_pgm(path); });
  atomic_write_text(path, std::string("P5\n1 1\n128\n") + '\x40');
  expect_errc(errc::format, [&] { pgm::read_pgm(path); });
  atomic_write_text(path, "P5\n2 2\n255\nxy");  // raster cut short
  expect_errc(errc::format, [&] { pgm::read_pgm(path); });
  atomic_write_text(path, "P5\n1 1\n");
  expect_errc(errc::format, [&] { pgm::read_pgm(path); });
  atomic_write_text(path, "");
  expect_errc(errc::format, [&] { pgm::read_pgm(path); });
}

TEST_CASE("pgm writer enforces the image contract") {
  const auto path = testutil::scratch_path("io/bad.pgm");
  Matrix out_of_range(2, 2, 0.5);
  out_of_range.at(0, 1) = 1.25;
  expect_errc(errc::range, [&] { pgm::write_pgm(out_of_range, path); });
  expect_errc(errc::invalid_parameter, [&] { pgm::write_pgm(Matrix(), path); });
}

TEST_CASE("normalized pgm stretches the range and records it") {
  Matrix m(1, 3);
  m.at(0, 0) = -2.0;
  m.at(0, 1) = 0.0;
  m.at(0, 2) = 2.0;
  const auto path = testutil::scratch_path("io/norm.pgm");
  pgm::write_pgm_normalized(m, path);
  const auto img = pgm::read_pgm(path);
  CHECK(img.v == std::vector<double>{0.0, 128.0 / 255.0, 1.0});

  const auto sidecar = read_text_file(path + ".range.csv");
  const auto lines = split_lines(sidecar);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "key,value");
  CHECK(lines[1] == "min,-2");
  CHECK(lines[2] == "max,2");
}

TEST_CASE("a constant map normalizes to black") {
  Matrix m(2, 2, 3.7);
  const auto path = testutil::scratch_path("io/flat.pgm");
  pgm::write_pgm_normalized(m, path);
  const auto img = pgm::read_pgm(path);
  for (double v : img.v) CHECK(v == 0.0);
  const auto lines = split_lines(read_text_file(path + ".range.csv"));
  CHECK(lines[1] == "min,3.7");
  CHECK(lines[2] == "max,3.7");
}

TEST_CASE("dataset loading validates the label listing") {
  const auto dir = testutil::scratch_path("io/ds");
  Matrix a(3, 3, 0.25), b(3, 3, 0.75);
  pgm::write_pgm(a, dir + "/a.pgm");
  pgm::write_pgm(b, dir + "/b.pgm");

  atomic_write_text(dir + "/labels.csv", "filename,label\na.pgm,4\nb.pgm,9\n");
  const auto items = dataset::load_dataset(dir);
  REQUIRE(items.size() == 2);
  CHECK(items[0].filename == "a.pgm");
  CHECK(items[0].label == 4);
  // 0.25 lands on byte 64, so the loaded pixels sit on the 255ths grid
  CHECK(items[0].image.v == std::vector<double>(9, 64.0 / 255.0));
  CHECK(items[1].label == 9);

  atomic_write_text(dir + "/labels.csv", "file,label\na.pgm,4\n");
  expect_errc(errc::format, [&] { dataset::load_dataset(dir); });
  atomic_write_text(dir + "/labels.csv", "filename,label\na.pgm,4,extra\n");
  expect_errc(errc::format, [&] { dataset::load_dataset(dir); });
  atomic_write_text(dir + "/labels.csv", "filename,label\na.pgm,10\n");
  expect_errc(errc::format, [&] { dataset::load_dataset(dir); });
  atomic_write_text(dir + "/labels.csv", "filename,label\nmissing.pgm,1\n");
  expect_errc(errc::io, [&] { dataset::load_dataset(dir); });
  atomic_write_text(dir + "/labels.csv", "filename,label\n");
  expect_errc(errc::invalid_parameter, [&] { dataset::load_dataset(dir); });
  expect_errc(errc::invalid_parameter,
              [&] { dataset::load_dataset(dir, -1); });
}

}  // TEST_SUITE
