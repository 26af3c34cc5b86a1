#pragma once

#include <stdexcept>
#include <string>

namespace optoconv {

enum class errc {
  invalid_parameter,
  range,
  bounds,
  capacity,
  format,
  config,
  usage,
  convergence,
  calibration,
  training,
  io,
};

const char* errc_name(errc c);

class SimError : public std::runtime_error {
public:
  SimError(errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

private:
  errc code_;
};

// Convergence failures carry the residual reached when iteration stopped.
class ConvergenceError : public SimError {
public:
  ConvergenceError(const std::string& what, double residual)
      : SimError(errc::convergence, what), residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_;
};

[[noreturn]] void fail(errc code, const std::string& what);

inline void require(bool ok, errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace optoconv
