#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "optoconv/accel.hpp"
#include "optoconv/comb.hpp"
#include "optoconv/dataset.hpp"
#include "optoconv/matrix.hpp"

namespace optoconv::cnn {

struct Activation {
  double input_gain = 1.0;
  double output_gain = 1.0;
};

enum class Reduction { max, mean };

// Column pooling: windows slide along each map row; trailing columns that do
// not fill a window are dropped.
struct Pooling {
  int window = 6;
  int stride = 6;
  Reduction reduction = Reduction::max;
};

struct CNNModel {
  comb::KernelSet conv_kernels;
  Activation activation;
  Pooling pooling;
  Matrix fc_weights;  // feature count x classes, column l = neuron l

  int n_classes() const { return fc_weights.cols; }
};

struct FeatureElement {
  int kernel = 0;
  int row = 0;
  int pooled_col = 0;
};

// Pooled maps flattened kernel-major, then row-major within a kernel.
struct FeatureVector {
  std::vector<double> values;
  std::vector<FeatureElement> provenance;
};

struct Prediction {
  int predicted_class = 0;
  std::vector<double> intensities;  // one per class
};

// Convolutional layer on the simulated accelerator.
std::vector<accel::FeatureMap> conv_layer(const Matrix& img, const CNNModel& m,
                                          const accel::SimConfig& cfg);

// Reference-bit gain probe: an impulse through the chain reads back the
// realized channel weights; the gain is the response over the target at the
// strongest channel. 1.0 on the normalized noiseless chain.
double measure_link_gain(const CNNModel& m, const accel::SimConfig& cfg);

// v -> output_gain * tanh(input_gain * v / link_gain).
std::vector<accel::FeatureMap> rescale_activate(std::vector<accel::FeatureMap> maps,
                                                const CNNModel& m,
                                                double link_gain);

FeatureVector pool(const std::vector<accel::FeatureMap>& maps, const Pooling& p);

// One simulated dot product per neuron, each on its own noise stream. The
// sign method picks where weight signs live: detector ports (balanced) or
// the input waveform symbols (input_encoded).
std::vector<double> fc_layer(const FeatureVector& x, const CNNModel& m,
                             const accel::SimConfig& cfg,
                             comb::SignPolicy sign_method);

// Full pipeline conv -> rescale/activate -> pool -> fc -> argmax; argmax
// ties break toward the smaller class index.
Prediction infer(const Matrix& img, const CNNModel& m,
                 const accel::SimConfig& cfg);

// Same pipeline computed by direct arithmetic: no photonic simulation, no
// quantization, no noise.
Prediction digital_oracle(const Matrix& img, const CNNModel& m);

// Digital twin of conv_layer (correlation with vertical stride k), shared by
// the oracle and the trainer.
std::vector<accel::FeatureMap> digital_conv(const Matrix& img,
                                            const comb::KernelSet& ks);

struct ConfusionMatrix {
  int n_classes = 10;
  std::vector<long> counts;  // row = true class, column = predicted

  long at(int truth, int predicted) const {
    return counts[static_cast<std::size_t>(truth) * n_classes + predicted];
  }
  long total() const;
  long trace() const;
  double accuracy() const;
};

ConfusionMatrix evaluate(std::span<const dataset::LabeledImage> items,
                         const CNNModel& m, const accel::SimConfig& cfg);
ConfusionMatrix evaluate_oracle(std::span<const dataset::LabeledImage> items,
                                const CNNModel& m);

// 10 count rows plus a final "accuracy,<value>" line.
std::string confusion_to_csv(const ConfusionMatrix& cm);

struct TrainOptions {
  double lr = 0.1;
  double momentum = 0.9;
  int epochs = 40;
  int batch_size = 32;
  std::uint64_t seed = 1;
  Activation activation;
  Pooling pooling;
};

// Per-parameter loss gradients of the digital pipeline for one example,
// under softmax cross-entropy over the neuron intensities.
struct Gradients {
  double loss = 0.0;
  std::vector<Matrix> kernels;
  Matrix fc;
};

Gradients loss_and_gradients(const Matrix& img, int label, const CNNModel& m);

// Seeded random starting point for training; shapes follow the 30x30 digit
// configuration (three 5x5 kernels, 72x10 fully connected).
CNNModel init_model(std::uint64_t seed);

// Mini-batch gradient descent with momentum on the digital pipeline.
// Deterministic given opt.seed; throws a training error if the loss stops
// being finite.
CNNModel train_reference(std::span<const dataset::LabeledImage> train,
                         const TrainOptions& opt);

// Model file: version header, kernel blocks, fc matrix, activation and
// pooling scalars, all CSV rows.
std::string model_to_csv(const CNNModel& m);
CNNModel model_from_csv(const std::string& text);

}  // namespace optoconv::cnn
