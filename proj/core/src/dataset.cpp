#include "optoconv/dataset.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "optoconv/csv.hpp"
#include "optoconv/error.hpp"
#include "optoconv/pgm.hpp"
#include "optoconv/rng.hpp"

namespace optoconv::dataset {

std::vector<LabeledImage> load_dataset(const std::string& dir, long max_items) {
  require(max_items >= 0, errc::invalid_parameter, "max_items must be >= 0");
  const std::string labels_path = dir + "/labels.csv";
  const std::string text = read_text_file(labels_path);

  std::vector<LabeledImage> items;
  std::size_t pos = 0;
  long line_no = 0;
  while (pos < text.size()) {
    const std::size_t eol = text.find('\n', pos);
    const std::string line =
        text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
    pos = eol == std::string::npos ? text.size() : eol + 1;
    ++line_no;

    if (line.empty() || line == "\r") continue;
    if (line_no == 1) {
      require(split_csv_line(line) == std::vector<std::string>{"filename", "label"},
              errc::format, "labels file must start with 'filename,label': " + labels_path);
      continue;
    }
    const auto cells = split_csv_line(line);
    require(cells.size() == 2, errc::format,
            "expected 'filename,label' at line " + fmt_int(line_no) + " of " + labels_path);
    const auto label = parse_int(cells[1]);
    require(label >= 0 && label <= 9, errc::format,
            "label out of range at line " + fmt_int(line_no) + " of " + labels_path);

    LabeledImage item;
    item.filename = cells[0];
    item.label = static_cast<int>(label);
    item.image = pgm::read_pgm(dir + "/" + cells[0]);
    items.push_back(std::move(item));
    if (max_items > 0 && static_cast<long>(items.size()) >= max_items) break;
  }
  require(!items.empty(), errc::invalid_parameter, "dataset is empty: " + dir);
  return items;
}

Split split_dataset(std::size_t n, double test_fraction, std::uint64_t seed) {
  require(n >= 1, errc::invalid_parameter, "empty dataset");
  require(test_fraction >= 0.0 && test_fraction <= 1.0, errc::invalid_parameter,
          "test fraction must be in [0,1]");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_rng(derive_seed(seed, 0x5b117ULL));
  for (std::size_t i = n - 1; i > 0; --i)
    std::swap(order[i], order[bounded(rng, i + 1)]);

  const auto n_test =
      static_cast<std::size_t>(std::lround(static_cast<double>(n) * test_fraction));
  Split s;
  s.test.assign(order.begin(), order.begin() + static_cast<long>(n_test));
  s.train.assign(order.begin() + static_cast<long>(n_test), order.end());
  return s;
}

}  // namespace optoconv::dataset
