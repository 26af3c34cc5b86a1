#pragma once

#include <cstdint>
#include <string>

#include "optoconv/accel.hpp"

namespace optoconv::cli {

// One run's worth of tunables, grouped the way the config file sections are.
// Field defaults are the documented defaults; a missing key keeps them.
struct RunConfig {
  struct Comb {
    int n_lines = 90;
    double fsr_ghz = 48.9;
    double center_wavelength_nm = 1550.0;
    double ripple_db = 0.0;
    std::uint64_t seed = 42;
  } comb;

  struct Encode {
    double tau_ps = 15.9;
    int samples_per_symbol = 1;
    int dac_bits = 8;  // 0 disables quantization
    double full_scale = 1.0;
  } encode;

  struct Link {
    std::string delay_model = "ideal";  // ideal | physical
    double delay_step_ps = 0.0;         // 0 tracks the symbol period
    double dispersion_ps_nm_km = 17.0;
    double fiber_length_km = 2.2;
    bool noise = false;
    double snr_db = 48.0;
    std::uint64_t seed = 7;
  } link;

  struct Accel {
    std::string sign_policy = "balanced";  // balanced | input_encoded
    std::string kernel_file;
    int image_rows = 500;
    int image_cols = 500;
  } accel;

  struct Cnn {
    std::string model_file;
    std::string dataset_dir;
    double test_fraction = 0.2;
    long eval_limit = 0;  // 0 = whole test side
    std::uint64_t split_seed = 99;
  } cnn;

  struct Train {
    double lr = 0.1;
    double momentum = 0.9;
    int epochs = 40;
    int batch_size = 32;
    std::uint64_t seed = 1;
    long train_limit = 0;  // 0 = whole train side
    double activation_input_gain = 1.0;
    double activation_output_gain = 1.0;
    int pool_window = 6;
    int pool_stride = 6;
    std::string pool_reduction = "max";  // max | mean
  } train;

  struct Calibrate {
    int max_iters = 20;
    double tol_rms = 0.01;
    double gain_error_pct = 20.0;
    bool measurement_noise = false;
    double measurement_snr_db = 40.0;
    std::uint64_t seed = 5;
  } calibrate;

  struct Output {
    std::string dir = "out";
  } output;
};

// Sectioned key=value text: "[section]" headers, "key = value" lines, "#"
// comments. Unknown sections or keys are errors, as are out-of-range values;
// both name the key and line.
RunConfig parse_config_text(const std::string& text, const std::string& name);
RunConfig parse_config(const std::string& path);

// Command-line override "section.key=value", validated like a file line.
void apply_override(RunConfig& cfg, const std::string& spec);

// Canonical full dump: every section, every key, fixed order. Parsing the
// dump and dumping again reproduces it byte for byte.
std::string dump_config(const RunConfig& cfg);

// Simulator instance for these settings (generates the comb).
accel::SimConfig make_sim_config(const RunConfig& cfg);

}  // namespace optoconv::cli
