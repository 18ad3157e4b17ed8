#include "sgf/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <cstdlib>

#include "sgf/errors.hpp"

namespace sgf::policy {

double adaptive_tp(std::size_t num_levels, std::size_t num_gfus) {
  if (num_gfus == 0) throw ConfigError("adaptive TP needs at least one GFU");
  return std::min(1.0, static_cast<double>(num_levels) / static_cast<double>(num_gfus));
}

double state_dependent_tp(std::size_t num_gfus, std::size_t num_served) {
  if (num_served > num_gfus) throw ConfigError("served GFUs exceed population");
  if (num_served == num_gfus) return 0.0;
  return 1.0 / static_cast<double>(num_gfus - num_served);
}

double fixed_tp(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("fixed transmission probability must lie in [0, 1]");
  return p;
}

PolicySpec PolicySpec::parse(std::string_view text) {
  PolicySpec spec;
  if (text == "adaptive") {
    spec.kind = PolicyKind::adaptive;
  } else if (text == "state-dependent") {
    spec.kind = PolicyKind::state_dependent;
  } else if (text.starts_with("fixed:")) {
    spec.kind = PolicyKind::fixed;
    const std::string number(text.substr(6));
    char* end = nullptr;
    spec.p = std::strtod(number.c_str(), &end);
    if (number.empty() || end != number.c_str() + number.size()) throw ConfigError("bad fixed policy '" + std::string(text) + "'");
    fixed_tp(spec.p);
  } else if (text.starts_with("learned:")) {
    spec.kind = PolicyKind::learned;
    spec.checkpoint = std::string(text.substr(8));
    if (spec.checkpoint.empty()) throw ConfigError("learned policy needs a checkpoint path");
  } else {
    throw ConfigError("unknown policy '" + std::string(text) + "'");
  }
  return spec;
}

std::string PolicySpec::to_string() const {
  switch (kind) {
    case PolicyKind::fixed: {
      char buf[64];
      const auto res = std::to_chars(buf, buf + sizeof buf, p);  // shortest round-trip form
      return "fixed:" + std::string(buf, res.ptr);
    }
    case PolicyKind::adaptive:
      return "adaptive";
    case PolicyKind::state_dependent:
      return "state-dependent";
    case PolicyKind::learned:
      return "learned:" + checkpoint;
  }
  return {};
}

double baseline_tp(const PolicySpec& spec, const LowerContext& ctx) {
  switch (spec.kind) {
    case PolicyKind::fixed:
      return fixed_tp(spec.p);
    case PolicyKind::adaptive:
      return adaptive_tp(ctx.num_levels, ctx.num_gfus);
    case PolicyKind::state_dependent:
      return state_dependent_tp(ctx.num_gfus, ctx.num_served);
    case PolicyKind::learned:
      break;
  }
  throw ConfigError("learned policies are evaluated through their actor network");
}

}  // namespace sgf::policy
