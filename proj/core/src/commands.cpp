#include "optoconv/commands.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "optoconv/accel.hpp"
#include "optoconv/cnn.hpp"
#include "optoconv/comb.hpp"
#include "optoconv/config.hpp"
#include "optoconv/csv.hpp"
#include "optoconv/dataset.hpp"
#include "optoconv/error.hpp"
#include "optoconv/link.hpp"
#include "optoconv/pgm.hpp"
#include "optoconv/rng.hpp"

namespace optoconv::cli {
namespace {

int exit_status(errc c) {
  switch (c) {
    case errc::usage:
      return 1;
    case errc::invalid_parameter:
    case errc::range:
    case errc::bounds:
    case errc::capacity:
    case errc::format:
    case errc::config:
      return 2;
    default:
      return 3;  // convergence, calibration, training, io
  }
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  if (cfg.output.dir.empty()) return name;
  return cfg.output.dir + "/" + name;
}

comb::KernelSet load_kernels(const RunConfig& cfg) {
  require(!cfg.accel.kernel_file.empty(), errc::config,
          "accel.kernel_file is not set");
  return comb::kernels_from_csv(read_text_file(cfg.accel.kernel_file));
}

cnn::CNNModel load_model(const RunConfig& cfg) {
  require(!cfg.cnn.model_file.empty(), errc::config,
          "cnn.model_file is not set");
  return cnn::model_from_csv(read_text_file(cfg.cnn.model_file));
}

// Materializes one side of a split, keeping split order, optionally capped.
std::vector<dataset::LabeledImage> pick(
    const std::vector<dataset::LabeledImage>& all, const std::vector<int>& idx,
    long limit) {
  std::size_t n = idx.size();
  if (limit > 0) n = std::min(n, static_cast<std::size_t>(limit));
  std::vector<dataset::LabeledImage> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(all[static_cast<std::size_t>(idx[i])]);
  return out;
}

int cmd_convolve(const RunConfig& cfg, const std::string& image_path) {
  const Matrix img = pgm::read_pgm(image_path);
  const auto ks = load_kernels(cfg);
  const auto sim = make_sim_config(cfg);
  const auto maps = accel::convolve_matrix(img, ks, sim);
  for (const auto& fm : maps) {
    const std::string base = "feature_k" + fmt_int(fm.kernel_index);
    atomic_write_text(out_path(cfg, base + ".csv"), matrix_to_csv(fm.values));
    pgm::write_pgm_normalized(fm.values, out_path(cfg, base + ".pgm"));
  }
  std::cout << "kernels," << maps.size() << "\n";
  if (!maps.empty())
    std::cout << "map_rows," << maps.front().values.rows << "\n"
              << "map_cols," << maps.front().values.cols << "\n";
  return 0;
}

int cmd_cnn_infer(const RunConfig& cfg, const std::string& image_path) {
  const Matrix img = pgm::read_pgm(image_path);
  const auto model = load_model(cfg);
  const auto sim = make_sim_config(cfg);
  const auto p = cnn::infer(img, model, sim);
  std::cout << "predicted," << p.predicted_class << "\n";
  for (std::size_t l = 0; l < p.intensities.size(); ++l)
    std::cout << "intensity_" << l << ","
              << fmt_double(p.intensities[l]) << "\n";
  return 0;
}

int cmd_cnn_eval(const RunConfig& cfg) {
  require(!cfg.cnn.dataset_dir.empty(), errc::config,
          "cnn.dataset_dir is not set");
  const auto model = load_model(cfg);
  const auto sim = make_sim_config(cfg);
  const auto all = dataset::load_dataset(cfg.cnn.dataset_dir);
  const auto split = dataset::split_dataset(all.size(), cfg.cnn.test_fraction,
                                            cfg.cnn.split_seed);
  const auto test = pick(all, split.test, cfg.cnn.eval_limit);
  const auto cm = cnn::evaluate(test, model, sim);
  atomic_write_text(out_path(cfg, "confusion.csv"), cnn::confusion_to_csv(cm));
  std::cout << "images," << cm.total() << "\n"
            << "accuracy," << fmt_double(cm.accuracy()) << "\n";
  return 0;
}

int cmd_cnn_train(const RunConfig& cfg) {
  require(!cfg.cnn.dataset_dir.empty(), errc::config,
          "cnn.dataset_dir is not set");
  require(!cfg.cnn.model_file.empty(), errc::config,
          "cnn.model_file is not set");
  const auto all = dataset::load_dataset(cfg.cnn.dataset_dir);
  const auto split = dataset::split_dataset(all.size(), cfg.cnn.test_fraction,
                                            cfg.cnn.split_seed);
  const auto train = pick(all, split.train, cfg.train.train_limit);

  cnn::TrainOptions opt;
  opt.lr = cfg.train.lr;
  opt.momentum = cfg.train.momentum;
  opt.epochs = cfg.train.epochs;
  opt.batch_size = cfg.train.batch_size;
  opt.seed = cfg.train.seed;
  opt.activation = {cfg.train.activation_input_gain,
                    cfg.train.activation_output_gain};
  opt.pooling = {cfg.train.pool_window, cfg.train.pool_stride,
                 cfg.train.pool_reduction == "mean" ? cnn::Reduction::mean
                                                    : cnn::Reduction::max};
  const auto model = cnn::train_reference(train, opt);
  atomic_write_text(cfg.cnn.model_file, cnn::model_to_csv(model));

  const auto test = pick(all, split.test, cfg.cnn.eval_limit);
  const auto cm = cnn::evaluate_oracle(test, model);
  std::cout << "trained_on," << train.size() << "\n"
            << "holdout_images," << cm.total() << "\n"
            << "holdout_accuracy," << fmt_double(cm.accuracy()) << "\n"
            << "model," << cfg.cnn.model_file << "\n";
  return 0;
}

int cmd_calibrate(const RunConfig& cfg) {
  const auto ks = load_kernels(cfg);
  const auto sim = make_sim_config(cfg);
  const auto w = comb::flatten_kernels(ks);
  const auto shaped =
      comb::shape_spectrum(sim.comb, w, sim.sign_policy, ks.flattened_length());

  const double p = cfg.calibrate.gain_error_pct / 100.0;
  require(p >= 0.0 && p < 1.0, errc::config,
          "calibrate.gain_error_pct must be in [0, 100)");
  auto rng = make_rng(derive_seed(cfg.calibrate.seed, 0x6a1eULL));
  std::uniform_real_distribution<double> u(-p, p);
  std::vector<double> errors(shaped.channel_weights.size());
  for (double& e : errors) e = 1.0 + u(rng);

  comb::CalibrationOptions opt;
  opt.max_iters = cfg.calibrate.max_iters;
  opt.tol_rms = cfg.calibrate.tol_rms;
  opt.measurement_noise = cfg.calibrate.measurement_noise;
  opt.measurement_snr_db = cfg.calibrate.measurement_snr_db;
  opt.seed = cfg.calibrate.seed;
  const auto res = comb::calibrate_shaper(shaped.channel_weights, errors, opt);

  std::string csv = "iteration,residual\n";
  for (std::size_t i = 0; i < res.residuals.size(); ++i)
    csv += fmt_int(static_cast<long long>(i + 1)) + "," +
           fmt_double(res.residuals[i]) + "\n";
  atomic_write_text(out_path(cfg, "calibration.csv"), csv);
  std::cout << "channels," << shaped.channel_weights.size() << "\n"
            << "iterations," << res.iterations << "\n"
            << "final_residual," << fmt_double(res.residuals.back()) << "\n";
  return 0;
}

int cmd_throughput(const RunConfig& cfg) {
  require(!cfg.accel.kernel_file.empty() || !cfg.cnn.model_file.empty(),
          errc::config, "set accel.kernel_file or cnn.model_file");
  const auto ks = cfg.accel.kernel_file.empty() ? load_model(cfg).conv_kernels
                                                : load_kernels(cfg);
  const auto sim = make_sim_config(cfg);
  const int r_total = ks.count() * ks.flattened_length();
  const accel::MatrixShape shape{cfg.accel.image_rows, cfg.accel.image_cols,
                                 ks.k};
  const auto rep = accel::throughput_report(r_total, cfg.encode.tau_ps, shape,
                                            cfg.link.snr_db);
  std::string text = accel::report_text(rep);
  std::string csv = accel::report_csv(rep);

  if (!cfg.cnn.model_file.empty()) {
    const auto model = load_model(cfg);
    const double fc = accel::fc_throughput(
        model.fc_weights.rows, cfg.encode.tau_ps, model.fc_weights.cols);
    text += "fc speed            " + accel::format_flops(fc) + "\n";
    csv += "fc_flops," + fmt_double(fc) + "\n";
  }

  if (std::holds_alternative<link::PhysicalDelay>(sim.delay) && ks.k > 1) {
    const auto shaped = comb::shape_spectrum(sim.comb, comb::flatten_kernels(ks),
                                             sim.sign_policy,
                                             ks.flattened_length());
    const int r = ks.flattened_length();
    const std::span<const double> band0(shaped.frequency_thz.data(),
                                        static_cast<std::size_t>(r));
    const auto delays = link::channel_delays_ps(sim.delay, band0);
    const double step = delays.back() / static_cast<double>(r - 1);
    text += "physical delay step " +
            fmt_double(std::round(step * 1e4) / 1e4) + " ps (symbol period " +
            fmt_double(cfg.encode.tau_ps) + " ps)\n";
    csv += "physical_step_ps," + fmt_double(step) + "\n";
  }

  atomic_write_text(out_path(cfg, "throughput.csv"), csv);
  std::cout << text;
  return 0;
}

int cmd_waveform_dump(const RunConfig& cfg, const std::string& image_path) {
  const Matrix img = pgm::read_pgm(image_path);
  const auto ks = load_kernels(cfg);
  const auto sim = make_sim_config(cfg);
  const auto ps = accel::prepare_matrix_signal(img, ks, sim);

  std::string in_csv = "sample_index,value\n";
  for (std::size_t i = 0; i < ps.waveform.samples.size(); ++i)
    in_csv += fmt_int(static_cast<long long>(i)) + "," +
              fmt_double(ps.waveform.samples[i]) + "\n";
  atomic_write_text(out_path(cfg, "input_waveform.csv"), in_csv);

  for (int q = 0; q < ks.count(); ++q) {
    const auto d =
        link::detect(ps.channels, q, sim.noise, sim.samples_per_symbol);
    std::string w_csv = "sample_index,value\n";
    for (std::size_t i = 0; i < d.samples.size(); ++i)
      w_csv += fmt_int(static_cast<long long>(i)) + "," +
               fmt_double(d.samples[i] / ps.channels.scale) + "\n";
    atomic_write_text(out_path(cfg, "detected_k" + fmt_int(q) + ".csv"), w_csv);

    const auto sym = d.symbols();
    std::string s_csv = "symbol_index,value\n";
    for (std::size_t i = 0; i < sym.size(); ++i)
      s_csv += fmt_int(static_cast<long long>(i)) + "," +
               fmt_double(sym[i] / ps.channels.scale) + "\n";
    atomic_write_text(out_path(cfg, "symbols_k" + fmt_int(q) + ".csv"), s_csv);
  }
  std::cout << "input_samples," << ps.waveform.samples.size() << "\n"
            << "kernels," << ks.count() << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"time-wavelength interleaved photonic convolution simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_path, "run configuration file")
      ->envname("OPTOCONV_CONFIG");
  app.add_option("--set", overrides,
                 "override one config key, section.key=value (repeatable)");

  std::string image_path;
  auto* convolve =
      app.add_subcommand("convolve", "run the kernel bank over one image");
  convolve->add_option("--image", image_path, "input image, 8-bit binary PGM")
      ->required();
  auto* infer = app.add_subcommand("cnn-infer", "classify one image");
  infer->add_option("--image", image_path, "input image, 8-bit binary PGM")
      ->required();
  app.add_subcommand("cnn-eval",
                     "evaluate the model on the held-out dataset split");
  app.add_subcommand("cnn-train", "train a model and write the model file");
  app.add_subcommand("calibrate",
                     "run the shaper feedback loop against seeded gain errors");
  app.add_subcommand("throughput", "print the operations-per-second report");
  auto* wdump = app.add_subcommand(
      "waveform-dump", "dump encoder and detector waveforms for one image");
  wdump->add_option("--image", image_path, "input image, 8-bit binary PGM")
      ->required();
  app.add_subcommand("dump-config",
                     "print the effective configuration, canonical form");
  for (auto* sub : app.get_subcommands(nullptr)) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error:usage:" << e.what() << "\n";
    return 1;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = parse_config(config_path);
    for (const auto& o : overrides) apply_override(cfg, o);

    if (app.got_subcommand("convolve")) return cmd_convolve(cfg, image_path);
    if (app.got_subcommand("cnn-infer")) return cmd_cnn_infer(cfg, image_path);
    if (app.got_subcommand("cnn-eval")) return cmd_cnn_eval(cfg);
    if (app.got_subcommand("cnn-train")) return cmd_cnn_train(cfg);
    if (app.got_subcommand("calibrate")) return cmd_calibrate(cfg);
    if (app.got_subcommand("throughput")) return cmd_throughput(cfg);
    if (app.got_subcommand("waveform-dump"))
      return cmd_waveform_dump(cfg, image_path);
    if (app.got_subcommand("dump-config")) {
      std::cout << dump_config(cfg);
      return 0;
    }
    std::cerr << "error:usage:no command given\n";
    return 1;
  } catch (const SimError& e) {
    std::cerr << "error:" << errc_name(e.code()) << ":" << e.what() << "\n";
    return exit_status(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error:internal:" << e.what() << "\n";
    return 3;
  }
}

}  // namespace optoconv::cli
