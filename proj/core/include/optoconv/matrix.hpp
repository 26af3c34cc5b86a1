#pragma once

#include <vector>

#include "optoconv/error.hpp"

namespace optoconv {

// Dense row-major real matrix. Shared by images, kernels, feature maps and
// fully connected weights.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), v(static_cast<size_t>(r) * c, fill) {}

  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
  size_t size() const { return v.size(); }
};

// Checks the grey-scale image contract: every value in [0, 1].
inline void require_image_range(const Matrix& m) {
  for (double x : m.v)
    require(x >= 0.0 && x <= 1.0, errc::range,
            "image value outside [0, 1]");
}

}  // namespace optoconv
