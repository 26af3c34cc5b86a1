#include "optoconv/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "optoconv/csv.hpp"
#include "optoconv/error.hpp"

namespace optoconv::pgm {

namespace {

// Reads the next header token, skipping whitespace and # comment lines.
std::string next_token(const std::string& data, std::size_t& pos,
                       const std::string& path) {
  while (pos < data.size()) {
    const char c = data[pos];
    if (c == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos])) &&
         data[pos] != '#')
    ++pos;
  require(pos > start, errc::format, "truncated header: " + path);
  return data.substr(start, pos - start);
}

int parse_header_int(const std::string& tok, const std::string& path) {
  require(!tok.empty() && tok.find_first_not_of("0123456789") == std::string::npos,
          errc::format, "bad header field '" + tok + "' in " + path);
  return std::stoi(tok);
}

}  // namespace

Matrix read_pgm(const std::string& path) {
  const std::string data = read_text_file(path);
  std::size_t pos = 0;

  require(next_token(data, pos, path) == "P5", errc::format,
          "not a binary PGM (P5): " + path);
  const int cols = parse_header_int(next_token(data, pos, path), path);
  const int rows = parse_header_int(next_token(data, pos, path), path);
  const int maxval = parse_header_int(next_token(data, pos, path), path);
  require(rows >= 1 && cols >= 1, errc::format, "empty image: " + path);
  require(maxval == 255, errc::format,
          "maxval must be 255, got " + fmt_int(maxval) + ": " + path);
  // Single whitespace separator before the raster.
  require(pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos])),
          errc::format, "missing raster separator: " + path);
  ++pos;

  const std::size_t need = static_cast<std::size_t>(rows) * cols;
  require(data.size() - pos >= need, errc::format,
          "truncated pixel data: " + path);

  Matrix img(rows, cols);
  for (std::size_t i = 0; i < need; ++i)
    img.v[i] = static_cast<unsigned char>(data[pos + i]) / 255.0;
  return img;
}

void write_pgm(const Matrix& img, const std::string& path) {
  require(img.rows >= 1 && img.cols >= 1, errc::invalid_parameter, "empty image");
  require_image_range(img);

  std::string out = "P5\n" + fmt_int(img.cols) + " " + fmt_int(img.rows) + "\n255\n";
  out.reserve(out.size() + img.v.size());
  for (double v : img.v)
    out.push_back(static_cast<char>(
        static_cast<unsigned char>(std::lround(v * 255.0))));
  atomic_write_text(path, out);
}

void write_pgm_normalized(const Matrix& img, const std::string& path) {
  require(img.rows >= 1 && img.cols >= 1, errc::invalid_parameter, "empty image");

  double lo = img.v.front(), hi = img.v.front();
  for (double v : img.v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi - lo;

  Matrix scaled(img.rows, img.cols);
  for (std::size_t i = 0; i < img.v.size(); ++i)
    scaled.v[i] = span > 0.0 ? (img.v[i] - lo) / span : 0.0;
  write_pgm(scaled, path);

  std::string sidecar = "key,value\nmin," + fmt_double(lo) + "\nmax," +
                        fmt_double(hi) + "\n";
  atomic_write_text(path + ".range.csv", sidecar);
}

}  // namespace optoconv::pgm
