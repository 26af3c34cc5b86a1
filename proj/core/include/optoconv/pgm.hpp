#pragma once

#include <string>

#include "optoconv/matrix.hpp"

namespace optoconv::pgm {

// Binary 8-bit greyscale (P5, maxval 255), pixel byte v mapped to v/255.
Matrix read_pgm(const std::string& path);

// Inverse byte map round(v*255); every value must already be in [0,1], so a
// read of the written file recovers the pixel ordinals exactly.
void write_pgm(const Matrix& img, const std::string& path);

// Min-max normalizes an arbitrary real map to 8 bits and records the applied
// range in a sidecar CSV (path + ".range.csv") so the original scale stays
// recoverable. A constant map writes as all zeros.
void write_pgm_normalized(const Matrix& img, const std::string& path);

}  // namespace optoconv::pgm
