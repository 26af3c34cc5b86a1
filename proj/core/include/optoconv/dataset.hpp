#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "optoconv/matrix.hpp"

namespace optoconv::dataset {

struct LabeledImage {
  Matrix image;  // values in [0,1]
  int label = 0;
  std::string filename;
};

// Directory of PGM files listed by a labels.csv ("filename,label" header,
// one row per image). Items keep the CSV order. max_items 0 loads all.
std::vector<LabeledImage> load_dataset(const std::string& dir,
                                       long max_items = 0);

struct Split {
  std::vector<int> train;  // indices into the loaded list
  std::vector<int> test;
};

// Seeded Fisher-Yates shuffle, then the first round(n * test_fraction)
// indices become the test side. The shuffle is hand-rolled so the split is
// identical across standard library implementations.
Split split_dataset(std::size_t n, double test_fraction, std::uint64_t seed);

}  // namespace optoconv::dataset
