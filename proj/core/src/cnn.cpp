#include "optoconv/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "optoconv/csv.hpp"
#include "optoconv/error.hpp"
#include "optoconv/rng.hpp"

namespace optoconv::cnn {

namespace {

// First index of the maximum, so ties go to the smaller class.
int argmax_class(std::span<const double> z) {
  int best = 0;
  for (int l = 1; l < static_cast<int>(z.size()); ++l)
    if (z[static_cast<std::size_t>(l)] > z[static_cast<std::size_t>(best)]) best = l;
  return best;
}

}  // namespace

std::vector<accel::FeatureMap> conv_layer(const Matrix& img, const CNNModel& m,
                                          const accel::SimConfig& cfg) {
  return accel::convolve_matrix(img, m.conv_kernels, cfg);
}

double measure_link_gain(const CNNModel& m, const accel::SimConfig& cfg) {
  const auto w = comb::flatten_kernels(m.conv_kernels);
  const int r = m.conv_kernels.flattened_length();

  int strongest = 0;
  for (int i = 1; i < r; ++i)
    if (std::abs(w[static_cast<std::size_t>(i)]) >
        std::abs(w[static_cast<std::size_t>(strongest)]))
      strongest = i;
  if (w[static_cast<std::size_t>(strongest)] == 0.0) return 1.0;

  // An impulse convolved with the channel weights reads them back one per
  // symbol; the probe runs on its own noise stream.
  std::vector<double> probe(static_cast<std::size_t>(r), 0.0);
  probe[0] = 1.0;
  accel::SimConfig run = cfg;
  run.noise.seed = derive_seed(cfg.noise.seed, 0x9afe1ULL);
  const auto streams = accel::convolve_vector(probe, m.conv_kernels, run);
  return streams[0][static_cast<std::size_t>(strongest)] /
         w[static_cast<std::size_t>(strongest)];
}

std::vector<accel::FeatureMap> rescale_activate(std::vector<accel::FeatureMap> maps,
                                                const CNNModel& m,
                                                double link_gain) {
  require(link_gain > 0.0, errc::calibration,
          "measured link gain must be positive");
  for (auto& fm : maps)
    for (double& v : fm.values.v)
      v = m.activation.output_gain *
          std::tanh(m.activation.input_gain * v / link_gain);
  return maps;
}

FeatureVector pool(const std::vector<accel::FeatureMap>& maps, const Pooling& p) {
  require(!maps.empty(), errc::invalid_parameter, "no feature maps");
  require(p.window >= 1 && p.stride >= 1, errc::invalid_parameter,
          "pooling window and stride must be >= 1");

  FeatureVector out;
  for (const auto& fm : maps) {
    const Matrix& v = fm.values;
    require(p.window <= v.cols, errc::invalid_parameter,
            "pooling window exceeds map width");
    const int pooled_cols = (v.cols - p.window) / p.stride + 1;
    for (int row = 0; row < v.rows; ++row) {
      for (int pc = 0; pc < pooled_cols; ++pc) {
        const int c0 = pc * p.stride;
        double acc = v.at(row, c0);
        if (p.reduction == Reduction::max) {
          for (int c = c0 + 1; c < c0 + p.window; ++c)
            acc = std::max(acc, v.at(row, c));
        } else {
          for (int c = c0 + 1; c < c0 + p.window; ++c) acc += v.at(row, c);
          acc /= p.window;
        }
        out.values.push_back(acc);
        out.provenance.push_back({fm.kernel_index, row, pc});
      }
    }
  }
  return out;
}

std::vector<double> fc_layer(const FeatureVector& x, const CNNModel& m,
                             const accel::SimConfig& cfg,
                             comb::SignPolicy sign_method) {
  const int f_n = static_cast<int>(x.values.size());
  require(f_n == m.fc_weights.rows, errc::invalid_parameter,
          "feature length does not match fc weight rows");

  accel::SimConfig run = cfg;
  run.sign_policy = sign_method;

  std::vector<double> z(static_cast<std::size_t>(m.n_classes()), 0.0);
  std::vector<double> col(static_cast<std::size_t>(f_n), 0.0);
  for (int l = 0; l < m.n_classes(); ++l) {
    for (int f = 0; f < f_n; ++f)
      col[static_cast<std::size_t>(f)] = m.fc_weights.at(f, l);
    z[static_cast<std::size_t>(l)] =
        accel::dot_product(x.values, col, run, static_cast<std::uint64_t>(l));
  }
  return z;
}

Prediction infer(const Matrix& img, const CNNModel& m,
                 const accel::SimConfig& cfg) {
  auto maps = conv_layer(img, m, cfg);
  const double gain = measure_link_gain(m, cfg);
  maps = rescale_activate(std::move(maps), m, gain);
  const auto x = pool(maps, m.pooling);

  Prediction p;
  p.intensities = fc_layer(x, m, cfg, cfg.sign_policy);
  p.predicted_class = argmax_class(p.intensities);
  return p;
}

std::vector<accel::FeatureMap> digital_conv(const Matrix& img,
                                            const comb::KernelSet& ks) {
  const int k = ks.k;
  require(k <= img.rows && k <= img.cols, errc::invalid_parameter,
          "kernel side exceeds the image");
  const int map_rows = img.rows / k;
  const int map_cols = img.cols - k + 1;

  std::vector<accel::FeatureMap> maps;
  maps.reserve(static_cast<std::size_t>(ks.count()));
  for (int q = 0; q < ks.count(); ++q) {
    const Matrix& kernel = ks.kernels[static_cast<std::size_t>(q)];
    accel::FeatureMap fm;
    fm.kernel_index = q;
    fm.values = Matrix(map_rows, map_cols);
    for (int b = 0; b < map_rows; ++b)
      for (int j = 0; j < map_cols; ++j) {
        double acc = 0.0;
        for (int r = 0; r < k; ++r)
          for (int c = 0; c < k; ++c)
            acc += kernel.at(r, c) * img.at(b * k + r, j + c);
        fm.values.at(b, j) = acc;
      }
    maps.push_back(std::move(fm));
  }
  return maps;
}

Prediction digital_oracle(const Matrix& img, const CNNModel& m) {
  auto maps = digital_conv(img, m.conv_kernels);
  maps = rescale_activate(std::move(maps), m, 1.0);
  const auto x = pool(maps, m.pooling);
  const int f_n = static_cast<int>(x.values.size());
  require(f_n == m.fc_weights.rows, errc::invalid_parameter,
          "feature length does not match fc weight rows");

  Prediction p;
  p.intensities.assign(static_cast<std::size_t>(m.n_classes()), 0.0);
  for (int l = 0; l < m.n_classes(); ++l)
    for (int f = 0; f < f_n; ++f)
      p.intensities[static_cast<std::size_t>(l)] +=
          x.values[static_cast<std::size_t>(f)] * m.fc_weights.at(f, l);
  p.predicted_class = argmax_class(p.intensities);
  return p;
}

long ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0L);
}

long ConfusionMatrix::trace() const {
  long t = 0;
  for (int i = 0; i < n_classes; ++i) t += at(i, i);
  return t;
}

double ConfusionMatrix::accuracy() const {
  const long n = total();
  return n > 0 ? static_cast<double>(trace()) / static_cast<double>(n) : 0.0;
}

namespace {

template <typename Predict>
ConfusionMatrix tally(std::span<const dataset::LabeledImage> items, int n_classes,
                      Predict&& predict) {
  require(!items.empty(), errc::invalid_parameter, "empty evaluation set");
  ConfusionMatrix cm;
  cm.n_classes = n_classes;
  cm.counts.assign(static_cast<std::size_t>(n_classes) * n_classes, 0L);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& item = items[i];
    require(item.label >= 0 && item.label < n_classes, errc::invalid_parameter,
            "label out of range: " + fmt_int(item.label));
    const int predicted = predict(i, item);
    ++cm.counts[static_cast<std::size_t>(item.label) * n_classes + predicted];
  }
  return cm;
}

}  // namespace

ConfusionMatrix evaluate(std::span<const dataset::LabeledImage> items,
                         const CNNModel& m, const accel::SimConfig& cfg) {
  return tally(items, m.n_classes(),
               [&](std::size_t i, const dataset::LabeledImage& item) {
                 accel::SimConfig run = cfg;
                 run.noise.seed = derive_seed(cfg.noise.seed, i);
                 return infer(item.image, m, run).predicted_class;
               });
}

ConfusionMatrix evaluate_oracle(std::span<const dataset::LabeledImage> items,
                                const CNNModel& m) {
  return tally(items, m.n_classes(),
               [&](std::size_t, const dataset::LabeledImage& item) {
                 return digital_oracle(item.image, m).predicted_class;
               });
}

std::string confusion_to_csv(const ConfusionMatrix& cm) {
  std::string out;
  for (int t = 0; t < cm.n_classes; ++t) {
    for (int p = 0; p < cm.n_classes; ++p) {
      if (p) out += ',';
      out += fmt_int(cm.at(t, p));
    }
    out += '\n';
  }
  out += "accuracy," + fmt_double(cm.accuracy()) + "\n";
  return out;
}

Gradients loss_and_gradients(const Matrix& img, int label, const CNNModel& m) {
  require(label >= 0 && label < m.n_classes(), errc::invalid_parameter,
          "label out of range");
  const int k = m.conv_kernels.k;
  const int q_n = m.conv_kernels.count();
  const Activation& act = m.activation;

  const auto pre = digital_conv(img, m.conv_kernels);
  auto post = rescale_activate(pre, m, 1.0);
  const auto x = pool(post, m.pooling);
  const int f_n = static_cast<int>(x.values.size());
  require(f_n == m.fc_weights.rows, errc::invalid_parameter,
          "feature length does not match fc weight rows");

  // Softmax cross-entropy over the neuron intensities.
  std::vector<double> z(static_cast<std::size_t>(m.n_classes()), 0.0);
  for (int l = 0; l < m.n_classes(); ++l)
    for (int f = 0; f < f_n; ++f)
      z[static_cast<std::size_t>(l)] +=
          x.values[static_cast<std::size_t>(f)] * m.fc_weights.at(f, l);
  const double zmax = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t l = 0; l < z.size(); ++l) {
    p[l] = std::exp(z[l] - zmax);
    sum += p[l];
  }
  for (double& v : p) v /= sum;

  Gradients g;
  g.loss = -std::log(p[static_cast<std::size_t>(label)]);
  g.fc = Matrix(m.fc_weights.rows, m.fc_weights.cols);
  g.kernels.assign(static_cast<std::size_t>(q_n), Matrix(k, k));

  std::vector<double> dz = p;
  dz[static_cast<std::size_t>(label)] -= 1.0;

  std::vector<double> dx(static_cast<std::size_t>(f_n), 0.0);
  for (int f = 0; f < f_n; ++f) {
    for (int l = 0; l < m.n_classes(); ++l) {
      g.fc.at(f, l) = x.values[static_cast<std::size_t>(f)] *
                      dz[static_cast<std::size_t>(l)];
      dx[static_cast<std::size_t>(f)] +=
          m.fc_weights.at(f, l) * dz[static_cast<std::size_t>(l)];
    }
  }

  // Back through pooling: max routes to the first maximal column (the same
  // one the forward pass picked), mean spreads evenly.
  std::vector<Matrix> dpost;
  dpost.reserve(post.size());
  for (const auto& fm : post) dpost.emplace_back(fm.values.rows, fm.values.cols);
  for (int f = 0; f < f_n; ++f) {
    const auto& src = x.provenance[static_cast<std::size_t>(f)];
    Matrix& grad = dpost[static_cast<std::size_t>(src.kernel)];
    const Matrix& a = post[static_cast<std::size_t>(src.kernel)].values;
    const int c0 = src.pooled_col * m.pooling.stride;
    if (m.pooling.reduction == Reduction::max) {
      int cbest = c0;
      for (int c = c0 + 1; c < c0 + m.pooling.window; ++c)
        if (a.at(src.row, c) > a.at(src.row, cbest)) cbest = c;
      grad.at(src.row, cbest) += dx[static_cast<std::size_t>(f)];
    } else {
      const double share = dx[static_cast<std::size_t>(f)] / m.pooling.window;
      for (int c = c0; c < c0 + m.pooling.window; ++c)
        grad.at(src.row, c) += share;
    }
  }

  // Back through the activation and the strided correlation.
  for (int q = 0; q < q_n; ++q) {
    const Matrix& u = pre[static_cast<std::size_t>(q)].values;
    Matrix& dk = g.kernels[static_cast<std::size_t>(q)];
    for (int b = 0; b < u.rows; ++b)
      for (int j = 0; j < u.cols; ++j) {
        const double da = dpost[static_cast<std::size_t>(q)].at(b, j);
        if (da == 0.0) continue;
        const double th = std::tanh(act.input_gain * u.at(b, j));
        const double du = da * act.output_gain * act.input_gain * (1.0 - th * th);
        for (int r = 0; r < k; ++r)
          for (int c = 0; c < k; ++c)
            dk.at(r, c) += du * img.at(b * k + r, j + c);
      }
  }
  return g;
}

CNNModel init_model(std::uint64_t seed) {
  auto rng = make_rng(derive_seed(seed, 0x1417ULL));
  std::normal_distribution<double> kernel_init(0.0, 0.15);
  std::normal_distribution<double> fc_init(0.0, 0.1);

  std::vector<Matrix> kernels;
  for (int q = 0; q < 3; ++q) {
    Matrix m(5, 5);
    for (double& v : m.v) v = kernel_init(rng);
    kernels.push_back(std::move(m));
  }

  CNNModel model;
  model.conv_kernels = comb::make_kernel_set(std::move(kernels));
  model.fc_weights = Matrix(72, 10);
  for (double& v : model.fc_weights.v) v = fc_init(rng);
  return model;
}

CNNModel train_reference(std::span<const dataset::LabeledImage> train,
                         const TrainOptions& opt) {
  require(!train.empty(), errc::invalid_parameter, "empty training set");
  require(opt.lr >= 0.0, errc::invalid_parameter, "lr must be >= 0");
  require(opt.momentum >= 0.0 && opt.momentum < 1.0, errc::invalid_parameter,
          "momentum must be in [0,1)");
  require(opt.epochs >= 0, errc::invalid_parameter, "epochs must be >= 0");
  require(opt.batch_size >= 1, errc::invalid_parameter, "batch size must be >= 1");

  CNNModel m = init_model(opt.seed);
  m.activation = opt.activation;
  m.pooling = opt.pooling;
  const int k = m.conv_kernels.k;
  const int q_n = m.conv_kernels.count();

  std::vector<Matrix> vel_k(static_cast<std::size_t>(q_n), Matrix(k, k));
  Matrix vel_fc(m.fc_weights.rows, m.fc_weights.cols);

  const std::size_t n = train.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0U);
  auto rng = make_rng(derive_seed(opt.seed, 0x7a1ULL));

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    for (std::size_t i = n - 1; i > 0; --i)
      std::swap(order[i], order[bounded(rng, i + 1)]);

    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(opt.batch_size)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(opt.batch_size));

      std::vector<Matrix> gk(static_cast<std::size_t>(q_n), Matrix(k, k));
      Matrix gfc(m.fc_weights.rows, m.fc_weights.cols);
      for (std::size_t i = start; i < stop; ++i) {
        const auto& item = train[order[i]];
        const Gradients g = loss_and_gradients(item.image, item.label, m);
        require(std::isfinite(g.loss), errc::training,
                "training diverged (non-finite loss)");
        for (int q = 0; q < q_n; ++q)
          for (std::size_t c = 0; c < gk[static_cast<std::size_t>(q)].v.size(); ++c)
            gk[static_cast<std::size_t>(q)].v[c] += g.kernels[static_cast<std::size_t>(q)].v[c];
        for (std::size_t c = 0; c < gfc.v.size(); ++c) gfc.v[c] += g.fc.v[c];
      }

      const double inv = 1.0 / static_cast<double>(stop - start);
      for (int q = 0; q < q_n; ++q) {
        auto& kq = m.conv_kernels.kernels[static_cast<std::size_t>(q)];
        auto& vq = vel_k[static_cast<std::size_t>(q)];
        for (std::size_t c = 0; c < kq.v.size(); ++c) {
          vq.v[c] = opt.momentum * vq.v[c] -
                    opt.lr * gk[static_cast<std::size_t>(q)].v[c] * inv;
          kq.v[c] += vq.v[c];
        }
      }
      for (std::size_t c = 0; c < m.fc_weights.v.size(); ++c) {
        vel_fc.v[c] = opt.momentum * vel_fc.v[c] - opt.lr * gfc.v[c] * inv;
        m.fc_weights.v[c] += vel_fc.v[c];
      }
    }
  }
  return m;
}

std::string model_to_csv(const CNNModel& m) {
  std::string out = "optoconv-model,1\n";
  out += "kernels," + fmt_int(m.conv_kernels.count()) + "," +
         fmt_int(m.conv_kernels.k) + "\n";
  out += comb::kernels_to_csv(m.conv_kernels);
  out += "fc," + fmt_int(m.fc_weights.rows) + "," + fmt_int(m.fc_weights.cols) + "\n";
  for (int f = 0; f < m.fc_weights.rows; ++f) {
    for (int l = 0; l < m.fc_weights.cols; ++l) {
      if (l) out += ',';
      out += fmt_double(m.fc_weights.at(f, l));
    }
    out += '\n';
  }
  out += "activation," + fmt_double(m.activation.input_gain) + "," +
         fmt_double(m.activation.output_gain) + "\n";
  out += "pooling,columns," + fmt_int(m.pooling.window) + "," +
         fmt_int(m.pooling.stride) + "," +
         (m.pooling.reduction == Reduction::max ? "max" : "mean") + "\n";
  return out;
}

CNNModel model_from_csv(const std::string& text) {
  const auto lines = split_lines(text);
  std::size_t i = 0;
  const auto next = [&](const char* what) -> const std::string& {
    require(i < lines.size(), errc::format,
            std::string("model file truncated, expected ") + what);
    return lines[i++];
  };

  require(next("version header") == "optoconv-model,1", errc::format,
          "missing 'optoconv-model,1' header");

  auto head = split_csv_line(next("kernels header"));
  require(head.size() == 3 && head[0] == "kernels", errc::format,
          "expected 'kernels,<q>,<k>' at line " + fmt_int(i));
  const int q_n = static_cast<int>(parse_int(head[1]));
  const int k = static_cast<int>(parse_int(head[2]));
  require(q_n >= 1 && k >= 1, errc::format, "bad kernel shape");

  std::string kernel_block;
  for (int q = 0; q < q_n; ++q)
    for (int r = 0; r <= k; ++r) kernel_block += next("kernel block line") + "\n";
  CNNModel m;
  m.conv_kernels = comb::kernels_from_csv(kernel_block);
  require(m.conv_kernels.count() == q_n && m.conv_kernels.k == k, errc::format,
          "kernel blocks do not match the kernels header");

  head = split_csv_line(next("fc header"));
  require(head.size() == 3 && head[0] == "fc", errc::format,
          "expected 'fc,<rows>,<cols>' at line " + fmt_int(i));
  const int rows = static_cast<int>(parse_int(head[1]));
  const int cols = static_cast<int>(parse_int(head[2]));
  require(rows >= 1 && cols >= 1, errc::format, "bad fc shape");
  m.fc_weights = Matrix(rows, cols);
  for (int f = 0; f < rows; ++f) {
    const auto cells = split_csv_line(next("fc row"));
    require(static_cast<int>(cells.size()) == cols, errc::format,
            "expected " + fmt_int(cols) + " fc values at line " + fmt_int(i));
    for (int l = 0; l < cols; ++l)
      m.fc_weights.at(f, l) = parse_double(cells[static_cast<std::size_t>(l)]);
  }

  head = split_csv_line(next("activation line"));
  require(head.size() == 3 && head[0] == "activation", errc::format,
          "expected 'activation,<in>,<out>' at line " + fmt_int(i));
  m.activation.input_gain = parse_double(head[1]);
  m.activation.output_gain = parse_double(head[2]);

  head = split_csv_line(next("pooling line"));
  require(head.size() == 5 && head[0] == "pooling" && head[1] == "columns",
          errc::format,
          "expected 'pooling,columns,<window>,<stride>,<max|mean>' at line " +
              fmt_int(i));
  m.pooling.window = static_cast<int>(parse_int(head[2]));
  m.pooling.stride = static_cast<int>(parse_int(head[3]));
  require(m.pooling.window >= 1 && m.pooling.stride >= 1, errc::format,
          "bad pooling parameters");
  if (head[4] == "max") {
    m.pooling.reduction = Reduction::max;
  } else if (head[4] == "mean") {
    m.pooling.reduction = Reduction::mean;
  } else {
    fail(errc::format, "unknown pooling reduction '" + head[4] + "'");
  }
  return m;
}

}  // namespace optoconv::cnn
