#pragma once
#include <stdexcept>
#include <string>

namespace pm {

enum class errc {
  out_of_support,
  integration_failed,
  unsupported_output,
  not_discrete,
  identical_distributions,
  not_separable,
  precision_exhausted,
  density_underflow,
  rate_above_threshold,
  infinite_penalty,
  config_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::out_of_support: return "OutOfSupport";
    case errc::integration_failed: return "IntegrationFailed";
    case errc::unsupported_output: return "UnsupportedOutput";
    case errc::not_discrete: return "NotDiscrete";
    case errc::identical_distributions: return "IdenticalDistributions";
    case errc::not_separable: return "NotSeparable";
    case errc::precision_exhausted: return "PrecisionExhausted";
    case errc::density_underflow: return "DensityUnderflow";
    case errc::rate_above_threshold: return "RateAboveThreshold";
    case errc::infinite_penalty: return "InfinitePenalty";
    case errc::config_error: return "ConfigError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& detail) { throw Error(code, detail); }

}  // namespace pm
