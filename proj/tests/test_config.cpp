#include <string>
#include <variant>

#include "doctest.h"
#include "optoconv/config.hpp"
#include "optoconv/error.hpp"
#include "support.hpp"

using namespace optoconv;
using cli::RunConfig;

namespace {

std::string config_error(const std::string& text) {
  try {
    cli::parse_config_text(text, "test.cfg");
    return "";
  } catch (const SimError& e) {
    CHECK(e.code() == errc::config);
    return e.what();
  }
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults survive a dump, parse, dump cycle byte for byte") {
  const RunConfig defaults;
  const auto dumped = cli::dump_config(defaults);
  const auto parsed = cli::parse_config_text(dumped, "dump");
  CHECK(cli::dump_config(parsed) == dumped);
}

TEST_CASE("the dump lists every section once with its defaults") {
  const auto text = cli::dump_config(RunConfig{});
  for (const char* header : {"[comb]", "[encode]", "[link]", "[accel]",
                             "[cnn]", "[train]", "[calibrate]", "[output]"})
    CHECK(text.find(header) != std::string::npos);
  CHECK(text.find("n_lines = 90") != std::string::npos);
  CHECK(text.find("fsr_ghz = 48.9") != std::string::npos);
  CHECK(text.find("tau_ps = 15.9") != std::string::npos);
  CHECK(text.find("dac_bits = 8") != std::string::npos);
  CHECK(text.find("snr_db = 48") != std::string::npos);
  CHECK(text.find("noise = off") != std::string::npos);
  CHECK(text.find("sign_policy = balanced") != std::string::npos);
  CHECK(text.find("delay_model = ideal") != std::string::npos);
  CHECK(text.find("pool_reduction = max") != std::string::npos);
  CHECK(text.find("dir = out") != std::string::npos);
}

TEST_CASE("values, comments and blank lines parse as written") {
  const auto cfg = cli::parse_config_text(
      "# leading comment\n"
      "[comb]\n"
      "n_lines = 12   # trailing comment\n"
      "\n"
      "[link]\n"
      "  noise = on\n"
      "snr_db=30.5\n"
      "[accel]\n"
      "kernel_file = configs/some.csv\n",
      "inline");
  CHECK(cfg.comb.n_lines == 12);
  CHECK(cfg.link.noise);
  CHECK(cfg.link.snr_db == 30.5);
  CHECK(cfg.accel.kernel_file == "configs/some.csv");
  // untouched keys keep their defaults
  CHECK(cfg.comb.fsr_ghz == 48.9);
  CHECK(cfg.encode.tau_ps == 15.9);
}

TEST_CASE("a negative snr is rejected naming the key and line") {
  const auto msg = config_error("[link]\nsnr = -3\n");
  // nearest valid key is snr_db; the unknown name is reported as written
  CHECK(msg.find("link.snr") != std::string::npos);
  CHECK(msg.find("line 2") != std::string::npos);

  const auto msg2 = config_error("[link]\nsnr_db = -3\n");
  CHECK(msg2.find("link.snr_db") != std::string::npos);
  CHECK(msg2.find("line 2") != std::string::npos);
  CHECK(msg2.find("outside") != std::string::npos);
}

TEST_CASE("unknown sections and keys are config errors with locations") {
  CHECK(config_error("[warp]\nspeed = 9\n").find("unknown section 'warp'") !=
        std::string::npos);
  CHECK(config_error("[comb]\nlines = 90\n").find("unknown key 'comb.lines'") !=
        std::string::npos);
  CHECK(config_error("n_lines = 90\n").find("before any [section]") !=
        std::string::npos);
  CHECK(config_error("[comb]\nn_lines 90\n").find("expected 'key = value'") !=
        std::string::npos);
  CHECK(config_error("[comb\nn_lines = 90\n").find("malformed section") !=
        std::string::npos);
  CHECK(config_error("[comb]\n= 90\n").find("empty key") != std::string::npos);
}

TEST_CASE("range and choice validation names the offending value") {
  CHECK(config_error("[comb]\nn_lines = 0\n").find("comb.n_lines") !=
        std::string::npos);
  CHECK(config_error("[encode]\ntau_ps = 0\n").find("> 0") != std::string::npos);
  CHECK(config_error("[encode]\ndac_bits = 33\n").find("outside") !=
        std::string::npos);
  CHECK(config_error("[link]\nnoise = maybe\n").find("on/off") !=
        std::string::npos);
  CHECK(config_error("[link]\ndelay_model = fiberish\n").find("one of") !=
        std::string::npos);
  CHECK(config_error("[train]\nmomentum = 1\n").find("train.momentum") !=
        std::string::npos);
  CHECK(config_error("[cnn]\ntest_fraction = 1.5\n").find("cnn.test_fraction") !=
        std::string::npos);
  CHECK(config_error("[comb]\nn_lines = many\n").find("not an integer") !=
        std::string::npos);
}

TEST_CASE("overrides apply one validated key each") {
  RunConfig cfg;
  cli::apply_override(cfg, "comb.n_lines=75");
  CHECK(cfg.comb.n_lines == 75);
  cli::apply_override(cfg, "link.noise = on");
  CHECK(cfg.link.noise);
  cli::apply_override(cfg, "output.dir=/tmp/xyz");
  CHECK(cfg.output.dir == "/tmp/xyz");

  CHECK_THROWS_AS(cli::apply_override(cfg, "n_lines=75"), SimError);
  CHECK_THROWS_AS(cli::apply_override(cfg, "comb.n_lines"), SimError);
  CHECK_THROWS_AS(cli::apply_override(cfg, "comb.bogus=1"), SimError);
  bool threw = false;
  try {
    cli::apply_override(cfg, "encode.dac_bits=-1");
  } catch (const SimError& e) {
    threw = true;
    CHECK(e.code() == errc::config);
    CHECK(std::string(e.what()).find("encode.dac_bits") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("the simulator instance mirrors the settings") {
  RunConfig cfg;
  cfg.comb.n_lines = 10;
  cfg.encode.tau_ps = 84.0;
  cfg.encode.samples_per_symbol = 3;
  cfg.encode.dac_bits = 6;
  cfg.encode.full_scale = 2.0;
  cfg.link.noise = true;
  cfg.link.snr_db = 31.0;
  cfg.link.seed = 123;
  cfg.accel.sign_policy = "input_encoded";

  auto sim = cli::make_sim_config(cfg);
  CHECK(sim.comb.count() == 10);
  CHECK(sim.comb.fsr_ghz == 48.9);
  CHECK(sim.tau_ps == 84.0);
  CHECK(sim.samples_per_symbol == 3);
  REQUIRE(sim.quantizer.has_value());
  CHECK(sim.quantizer->bits == 6);
  CHECK(sim.quantizer->full_scale == 2.0);
  CHECK(sim.noise.enabled);
  CHECK(sim.noise.snr_db == 31.0);
  CHECK(sim.noise.seed == 123);
  CHECK(sim.sign_policy == comb::SignPolicy::input_encoded);
  REQUIRE(std::holds_alternative<link::IdealDelay>(sim.delay));
  CHECK(std::get<link::IdealDelay>(sim.delay).step_ps == 0.0);

  cfg.encode.dac_bits = 0;
  cfg.link.delay_model = "physical";
  cfg.link.fiber_length_km = 1.25;
  sim = cli::make_sim_config(cfg);
  CHECK_FALSE(sim.quantizer.has_value());
  REQUIRE(std::holds_alternative<link::PhysicalDelay>(sim.delay));
  CHECK(std::get<link::PhysicalDelay>(sim.delay).fiber_length_km == 1.25);
  CHECK(std::get<link::PhysicalDelay>(sim.delay).dispersion_ps_nm_km == 17.0);
}

TEST_CASE("a full round trip preserves edited values") {
  RunConfig cfg;
  cfg.comb.ripple_db = 2.5;
  cfg.link.delay_step_ps = 15.9;
  cfg.cnn.model_file = "configs/model_digits.csv";
  cfg.train.pool_reduction = "mean";
  cfg.calibrate.gain_error_pct = 12.5;
  const auto text = cli::dump_config(cfg);
  const auto back = cli::parse_config_text(text, "roundtrip");
  CHECK(back.comb.ripple_db == 2.5);
  CHECK(back.link.delay_step_ps == 15.9);
  CHECK(back.cnn.model_file == "configs/model_digits.csv");
  CHECK(back.train.pool_reduction == "mean");
  CHECK(back.calibrate.gain_error_pct == 12.5);
  CHECK(cli::dump_config(back) == text);
}

}  // TEST_SUITE
