#include "optoconv/config.hpp"

#include <functional>
#include <limits>
#include <vector>

#include "optoconv/csv.hpp"
#include "optoconv/error.hpp"

namespace optoconv::cli {

namespace {

struct KeyDef {
  const char* section;
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

long long to_int(const std::string& v, long long lo, long long hi) {
  const long long x = parse_int(v);
  require(x >= lo && x <= hi, errc::range,
          "value " + fmt_int(x) + " outside [" + fmt_int(lo) + ", " + fmt_int(hi) + "]");
  return x;
}

double to_double(const std::string& v, double lo, double hi) {
  const double x = parse_double(v);
  require(x >= lo && x <= hi, errc::range,
          "value " + fmt_double(x) + " outside [" + fmt_double(lo) + ", " +
              fmt_double(hi) + "]");
  return x;
}

double to_positive(const std::string& v) {
  const double x = parse_double(v);
  require(x > 0.0, errc::range, "value must be > 0, got " + fmt_double(x));
  return x;
}

std::uint64_t to_seed(const std::string& v) {
  return static_cast<std::uint64_t>(to_int(v, 0, std::numeric_limits<long long>::max()));
}

bool to_bool(const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  fail(errc::range, "expected on/off, got '" + v + "'");
}

std::string from_bool(bool b) { return b ? "on" : "off"; }

std::string to_choice(const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return v;
  std::string msg = "expected one of {";
  bool first = true;
  for (const char* a : allowed) {
    if (!first) msg += ", ";
    msg += a;
    first = false;
  }
  fail(errc::range, msg + "}, got '" + v + "'");
}

const double kInf = std::numeric_limits<double>::infinity();

// One row per tunable; the row order is the canonical dump order.
const std::vector<KeyDef>& key_table() {
  static const std::vector<KeyDef> table = {
      {"comb", "n_lines",
       [](RunConfig& c, const std::string& v) { c.comb.n_lines = static_cast<int>(to_int(v, 1, 1 << 20)); },
       [](const RunConfig& c) { return fmt_int(c.comb.n_lines); }},
      {"comb", "fsr_ghz",
       [](RunConfig& c, const std::string& v) { c.comb.fsr_ghz = to_positive(v); },
       [](const RunConfig& c) { return fmt_double(c.comb.fsr_ghz); }},
      {"comb", "center_wavelength_nm",
       [](RunConfig& c, const std::string& v) { c.comb.center_wavelength_nm = to_positive(v); },
       [](const RunConfig& c) { return fmt_double(c.comb.center_wavelength_nm); }},
      {"comb", "ripple_db",
       [](RunConfig& c, const std::string& v) { c.comb.ripple_db = to_double(v, 0.0, 60.0); },
       [](const RunConfig& c) { return fmt_double(c.comb.ripple_db); }},
      {"comb", "seed",
       [](RunConfig& c, const std::string& v) { c.comb.seed = to_seed(v); },
       [](const RunConfig& c) { return fmt_int(static_cast<long long>(c.comb.seed)); }},

      {"encode", "tau_ps",
       [](RunConfig& c, const std::string& v) { c.encode.tau_ps = to_positive(v); },
       [](const RunConfig& c) { return fmt_double(c.encode.tau_ps); }},
      {"encode", "samples_per_symbol",
       [](RunConfig& c, const std::string& v) { c.encode.samples_per_symbol = static_cast<int>(to_int(v, 1, 1024)); },
       [](const RunConfig& c) { return fmt_int(c.encode.samples_per_symbol); }},
      {"encode", "dac_bits",
       [](RunConfig& c, const std::string& v) { c.encode.dac_bits = static_cast<int>(to_int(v, 0, 32)); },
       [](const RunConfig& c) { return fmt_int(c.encode.dac_bits); }},
      {"encode", "full_scale",
       [](RunConfig& c, const std::string& v) { c.encode.full_scale = to_positive(v); },
       [](const RunConfig& c) { return fmt_double(c.encode.full_scale); }},

      {"link", "delay_model",
       [](RunConfig& c, const std::string& v) { c.link.delay_model = to_choice(v, {"ideal", "physical"}); },
       [](const RunConfig& c) { return c.link.delay_model; }},
      {"link", "delay_step_ps",
       [](RunConfig& c, const std::string& v) { c.link.delay_step_ps = to_double(v, 0.0, kInf); },
       [](const RunConfig& c) { return fmt_double(c.link.delay_step_ps); }},
      {"link", "dispersion_ps_nm_km",
       [](RunConfig& c, const std::string& v) { c.link.dispersion_ps_nm_km = to_double(v, 0.0, kInf); },
       [](const RunConfig& c) { return fmt_double(c.link.dispersion_ps_nm_km); }},
      {"link", "fiber_length_km",
       [](RunConfig& c, const std::string& v) { c.link.fiber_length_km = to_double(v, 0.0, kInf); },
       [](const RunConfig& c) { return fmt_double(c.link.fiber_length_km); }},
      {"link", "noise",
       [](RunConfig& c, const std::string& v) { c.link.noise = to_bool(v); },
       [](const RunConfig& c) { return from_bool(c.link.noise); }},
      {"link", "snr_db",
       [](RunConfig& c, const std::string& v) { c.link.snr_db = to_double(v, 0.0, kInf); },
       [](const RunConfig& c) { return fmt_double(c.link.snr_db); }},
      {"link", "seed",
       [](RunConfig& c, const std::string& v) { c.link.seed = to_seed(v); },
       [](const RunConfig& c) { return fmt_int(static_cast<long long>(c.link.seed)); }},

      {"accel", "sign_policy",
       [](RunConfig& c, const std::string& v) { c.accel.sign_policy = to_choice(v, {"balanced", "input_encoded"}); },
       [](const RunConfig& c) { return c.accel.sign_policy; }},
      {"accel", "kernel_file",
       [](RunConfig& c, const std::string& v) { c.accel.kernel_file = v; },
       [](const RunConfig& c) { return c.accel.kernel_file; }},
      {"accel", "image_rows",
       [](RunConfig& c, const std::string& v) { c.accel.image_rows = static_cast<int>(to_int(v, 1, 1 << 20)); },
       [](const RunConfig& c) { return fmt_int(c.accel.image_rows); }},
      {"accel", "image_cols",
       [](RunConfig& c, const std::string& v) { c.accel.image_cols = static_cast<int>(to_int(v, 1, 1 << 20)); },
       [](const RunConfig& c) { return fmt_int(c.accel.image_cols); }},

      {"cnn", "model_file",
       [](RunConfig& c, const std::string& v) { c.cnn.model_file = v; },
       [](const RunConfig& c) { return c.cnn.model_file; }},
      {"cnn", "dataset_dir",
       [](RunConfig& c, const std::string& v) { c.cnn.dataset_dir = v; },
       [](const RunConfig& c) { return c.cnn.dataset_dir; }},
      {"cnn", "test_fraction",
       [](RunConfig& c, const std::string& v) { c.cnn.test_fraction = to_double(v, 0.0, 1.0); },
       [](const RunConfig& c) { return fmt_double(c.cnn.test_fraction); }},
      {"cnn", "eval_limit",
       [](RunConfig& c, const std::string& v) { c.cnn.eval_limit = to_int(v, 0, 1L << 40); },
       [](const RunConfig& c) { return fmt_int(c.cnn.eval_limit); }},
      {"cnn", "split_seed",
       [](RunConfig& c, const std::string& v) { c.cnn.split_seed = to_seed(v); },
       [](const RunConfig& c) { return fmt_int(static_cast<long long>(c.cnn.split_seed)); }},

      {"train", "lr",
       [](RunConfig& c, const std::string& v) { c.train.lr = to_double(v, 0.0, kInf); },
       [](const RunConfig& c) { return fmt_double(c.train.lr); }},
      {"train", "momentum",
       [](RunConfig& c, const std::string& v) { c.train.momentum = to_double(v, 0.0, 0.999); },
       [](const RunConfig& c) { return fmt_double(c.train.momentum); }},
      {"train", "epochs",
       [](RunConfig& c, const std::string& v) { c.train.epochs = static_cast<int>(to_int(v, 0, 100000)); },
       [](const RunConfig& c) { return fmt_int(c.train.epochs); }},
      {"train", "batch_size",
       [](RunConfig& c, const std::string& v) { c.train.batch_size = static_cast<int>(to_int(v, 1, 1 << 20)); },
       [](const RunConfig& c) { return fmt_int(c.train.batch_size); }},
      {"train", "seed",
       [](RunConfig& c, const std::string& v) { c.train.seed = to_seed(v); },
       [](const RunConfig& c) { return fmt_int(static_cast<long long>(c.train.seed)); }},
      {"train", "train_limit",
       [](RunConfig& c, const std::string& v) { c.train.train_limit = to_int(v, 0, 1L << 40); },
       [](const RunConfig& c) { return fmt_int(c.train.train_limit); }},
      {"train", "activation_input_gain",
       [](RunConfig& c, const std::string& v) { c.train.activation_input_gain = to_positive(v); },
       [](const RunConfig& c) { return fmt_double(c.train.activation_input_gain); }},
      {"train", "activation_output_gain",
       [](RunConfig& c, const std::string& v) { c.train.activation_output_gain = to_positive(v); },
       [](const RunConfig& c) { return fmt_double(c.train.activation_output_gain); }},
      {"train", "pool_window",
       [](RunConfig& c, const std::string& v) { c.train.pool_window = static_cast<int>(to_int(v, 1, 1 << 20)); },
       [](const RunConfig& c) { return fmt_int(c.train.pool_window); }},
      {"train", "pool_stride",
       [](RunConfig& c, const std::string& v) { c.train.pool_stride = static_cast<int>(to_int(v, 1, 1 << 20)); },
       [](const RunConfig& c) { return fmt_int(c.train.pool_stride); }},
      {"train", "pool_reduction",
       [](RunConfig& c, const std::string& v) { c.train.pool_reduction = to_choice(v, {"max", "mean"}); },
       [](const RunConfig& c) { return c.train.pool_reduction; }},

      {"calibrate", "max_iters",
       [](RunConfig& c, const std::string& v) { c.calibrate.max_iters = static_cast<int>(to_int(v, 1, 1000000)); },
       [](const RunConfig& c) { return fmt_int(c.calibrate.max_iters); }},
      {"calibrate", "tol_rms",
       [](RunConfig& c, const std::string& v) { c.calibrate.tol_rms = to_positive(v); },
       [](const RunConfig& c) { return fmt_double(c.calibrate.tol_rms); }},
      {"calibrate", "gain_error_pct",
       [](RunConfig& c, const std::string& v) { c.calibrate.gain_error_pct = to_double(v, 0.0, 99.0); },
       [](const RunConfig& c) { return fmt_double(c.calibrate.gain_error_pct); }},
      {"calibrate", "measurement_noise",
       [](RunConfig& c, const std::string& v) { c.calibrate.measurement_noise = to_bool(v); },
       [](const RunConfig& c) { return from_bool(c.calibrate.measurement_noise); }},
      {"calibrate", "measurement_snr_db",
       [](RunConfig& c, const std::string& v) { c.calibrate.measurement_snr_db = to_double(v, 0.0, kInf); },
       [](const RunConfig& c) { return fmt_double(c.calibrate.measurement_snr_db); }},
      {"calibrate", "seed",
       [](RunConfig& c, const std::string& v) { c.calibrate.seed = to_seed(v); },
       [](const RunConfig& c) { return fmt_int(static_cast<long long>(c.calibrate.seed)); }},

      {"output", "dir",
       [](RunConfig& c, const std::string& v) { c.output.dir = v; },
       [](const RunConfig& c) { return c.output.dir; }},
  };
  return table;
}

const KeyDef* find_key(const std::string& section, const std::string& key) {
  for (const auto& def : key_table())
    if (section == def.section && key == def.key) return &def;
  return nullptr;
}

std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void apply_entry(RunConfig& cfg, const std::string& section, const std::string& key,
                 const std::string& value, const std::string& where) {
  require(!section.empty(), errc::config, "key before any [section] " + where);
  const KeyDef* def = find_key(section, key);
  require(def != nullptr, errc::config,
          "unknown key '" + section + "." + key + "' " + where);
  try {
    def->set(cfg, value);
  } catch (const SimError& e) {
    fail(errc::config,
         "bad value for '" + section + "." + key + "' " + where + ": " + e.what());
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& name) {
  RunConfig cfg;
  std::string section;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = lines[i];
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line = line.substr(0, hash);
    line = trimmed(line);
    if (line.empty()) continue;

    const std::string where = "at line " + fmt_int(i + 1) + " of " + name;
    if (line.front() == '[') {
      require(line.back() == ']' && line.size() > 2, errc::config,
              "malformed section header " + where);
      section = line.substr(1, line.size() - 2);
      bool known = false;
      for (const auto& def : key_table()) known = known || section == def.section;
      require(known, errc::config, "unknown section '" + section + "' " + where);
      continue;
    }

    const auto eq = line.find('=');
    require(eq != std::string::npos, errc::config,
            "expected 'key = value' " + where);
    const std::string key = trimmed(line.substr(0, eq));
    const std::string value = trimmed(line.substr(eq + 1));
    require(!key.empty(), errc::config, "empty key " + where);
    apply_entry(cfg, section, key, value, where);
  }
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  return parse_config_text(read_text_file(path), path);
}

void apply_override(RunConfig& cfg, const std::string& spec) {
  const auto eq = spec.find('=');
  const auto dot = spec.find('.');
  require(eq != std::string::npos && dot != std::string::npos && dot < eq,
          errc::config, "override must be section.key=value: '" + spec + "'");
  apply_entry(cfg, trimmed(spec.substr(0, dot)),
              trimmed(spec.substr(dot + 1, eq - dot - 1)),
              trimmed(spec.substr(eq + 1)), "in override '" + spec + "'");
}

std::string dump_config(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& def : key_table()) {
    if (section != def.section) {
      if (!out.empty()) out += '\n';
      section = def.section;
      out += "[" + section + "]\n";
    }
    out += std::string(def.key) + " = " + def.get(cfg) + "\n";
  }
  return out;
}

accel::SimConfig make_sim_config(const RunConfig& cfg) {
  accel::SimConfig sim;
  sim.comb = comb::generate_comb(cfg.comb.n_lines, cfg.comb.fsr_ghz,
                                 cfg.comb.center_wavelength_nm,
                                 cfg.comb.ripple_db, cfg.comb.seed);
  sim.sign_policy = cfg.accel.sign_policy == "balanced"
                        ? comb::SignPolicy::balanced
                        : comb::SignPolicy::input_encoded;
  if (cfg.link.delay_model == "ideal") {
    sim.delay = link::IdealDelay{cfg.link.delay_step_ps};
  } else {
    sim.delay = link::PhysicalDelay{cfg.link.dispersion_ps_nm_km,
                                    cfg.link.fiber_length_km};
  }
  sim.noise = link::NoiseModel{cfg.link.noise, cfg.link.snr_db, cfg.link.seed};
  if (cfg.encode.dac_bits > 0)
    sim.quantizer = encode::QuantizerConfig{cfg.encode.dac_bits, cfg.encode.full_scale};
  sim.tau_ps = cfg.encode.tau_ps;
  sim.samples_per_symbol = cfg.encode.samples_per_symbol;
  return sim;
}

}  // namespace optoconv::cli
