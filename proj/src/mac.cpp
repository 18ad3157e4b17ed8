#include "sgf/mac.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgf/errors.hpp"

namespace sgf::mac {

std::string to_string(CascadeMode mode) {
  return mode == CascadeMode::paper_literal ? "paper-literal" : "full-sum";
}

CascadeMode parse_cascade_mode(const std::string& text) {
  if (text == "paper-literal") return CascadeMode::paper_literal;
  if (text == "full-sum") return CascadeMode::full_sum;
  throw ConfigError("unknown cascade_mode '" + text + "' (expected paper-literal|full-sum)");
}

std::string to_string(ContentionRule rule) { return rule == ContentionRule::all_fail ? "all-fail" : "capture"; }

ContentionRule parse_contention_rule(const std::string& text) {
  if (text == "all-fail") return ContentionRule::all_fail;
  if (text == "capture") return ContentionRule::capture;
  throw ConfigError("unknown contention rule '" + text + "' (expected all-fail|capture)");
}

DetectionMatrix DetectionMatrix::normalized(Eigen::MatrixXcd raw) {
  for (Eigen::Index k = 0; k < raw.cols(); ++k) {
    const double norm = raw.col(k).norm();
    if (norm > 0.0 && std::isfinite(norm)) {
      raw.col(k) /= norm;
    } else {
      raw.col(k).setZero();
      raw(0, k) = 1.0;
    }
  }
  return DetectionMatrix(std::move(raw));
}

DetectionMatrix DetectionMatrix::zero_forcing(std::span<const CVector> gbu_channels) {
  if (gbu_channels.empty()) throw ConfigError("zero-forcing needs at least one GBU");
  const auto k = static_cast<Eigen::Index>(gbu_channels.size());
  const auto a = gbu_channels.front().size();
  Eigen::MatrixXcd h(k, a);
  for (Eigen::Index i = 0; i < k; ++i) h.row(i) = gbu_channels[static_cast<std::size_t>(i)].transpose();

  Eigen::MatrixXcd v;
  if (k <= a) {
    // Right inverse: H V = I, so column k only sees h_k.
    const Eigen::MatrixXcd gram = h * h.adjoint();
    v = h.adjoint() * gram.partialPivLu().solve(Eigen::MatrixXcd::Identity(k, k));
  } else {
    v = h.completeOrthogonalDecomposition().pseudoInverse();
  }
  return normalized(std::move(v));
}

DetectionMatrix DetectionMatrix::from_reals(std::span<const double> reals, int num_antennas, int num_gbus) {
  if (reals.size() != static_cast<std::size_t>(2 * num_antennas * num_gbus)) {
    throw ConfigError("detection action has wrong dimension");
  }
  Eigen::MatrixXcd raw(num_antennas, num_gbus);
  std::size_t i = 0;
  for (int k = 0; k < num_gbus; ++k) {
    for (int a = 0; a < num_antennas; ++a) {
      raw(a, k) = {reals[i], reals[i + 1]};
      i += 2;
    }
  }
  return normalized(std::move(raw));
}

std::size_t SnrLevelPlan::total_levels() const {
  std::size_t n = 0;
  for (const auto& row : per_gbu_levels) n += row.size();
  return n;
}

double max_tolerable_interference(std::size_t gbu, const ChannelSnapshot& snap, const DetectionMatrix& v,
                                  const RadioParams& params) {
  if (params.target_rate < kTinyTargetRate) return std::numeric_limits<double>::infinity();
  const double signal = params.gbu_power_w * channel::projected_gain(snap.gbu_channels[gbu], v.column(gbu));
  return signal / (std::exp2(params.target_rate) - 1.0) - params.noise_power_w;
}

double gb_interference(std::size_t gbu, const ChannelSnapshot& snap, const DetectionMatrix& v,
                       const RadioParams& params) {
  double total = 0.0;
  for (std::size_t j = 0; j < v.num_gbus(); ++j) {
    if (j == gbu) continue;
    total += params.gbu_power_w * channel::projected_gain(snap.gbu_channels[gbu], v.column(j));
  }
  return total;
}

double gf_budget(double i_max, double i_gb) { return std::max(0.0, i_max - i_gb); }

InterferenceBudget compute_budget(const ChannelSnapshot& snap, const DetectionMatrix& v, const RadioParams& params) {
  InterferenceBudget b;
  const std::size_t k = snap.gbu_channels.size();
  b.per_gbu_max.resize(k);
  b.per_gbu_gb.resize(k);
  b.per_gbu_gf.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    b.per_gbu_max[i] = max_tolerable_interference(i, snap, v, params);
    b.per_gbu_gb[i] = gb_interference(i, snap, v, params);
    b.per_gbu_gf[i] = gf_budget(b.per_gbu_max[i], b.per_gbu_gb[i]);
  }
  return b;
}

std::vector<double> configure_snr_levels(double target_rate, double gf_budget_w, double noise_power_w,
                                         CascadeMode mode, std::size_t max_levels) {
  const double eps = std::exp2(target_rate) - 1.0;
  const double capacity = gf_budget_w / noise_power_w;
  std::vector<double> bottom_up;  // lowest level first
  double sum = 0.0;
  while (bottom_up.size() < max_levels) {
    const double previous = bottom_up.empty() ? 0.0 : bottom_up.back();
    const double next = mode == CascadeMode::paper_literal ? eps * (1.0 + previous) : eps * (1.0 + sum);
    if (!(sum + next <= capacity)) break;
    bottom_up.push_back(next);
    sum += next;
  }
  return {bottom_up.rbegin(), bottom_up.rend()};
}

SnrLevelPlan build_plan(const InterferenceBudget& budget, const RadioParams& params, const MacConfig& config) {
  SnrLevelPlan plan;
  plan.cascade_mode = config.cascade_mode;
  plan.per_gbu_levels.reserve(budget.per_gbu_gf.size());
  for (double b : budget.per_gbu_gf) {
    plan.per_gbu_levels.push_back(configure_snr_levels(params.target_rate, b, params.noise_power_w,
                                                       config.cascade_mode, config.max_levels_per_gbu));
  }
  return plan;
}

bool sic_feasible(double level_snr, const CVector& gfu_channel, const CVector& v_k, const RadioParams& params) {
  const double gain = channel::projected_gain(gfu_channel, v_k);
  if (!(gain > 0.0)) return false;
  const double required_power = level_snr * params.noise_power_w / gain;
  return required_power <= params.gfu_max_snr * params.noise_power_w;
}

namespace {

std::size_t uniform_index(Rng& rng, std::size_t upper_inclusive) {
  std::uniform_int_distribution<std::size_t> dist(0, upper_inclusive);
  return dist(rng);
}

// Uniform random ordered selection of k distinct values from [0, n).
std::vector<std::size_t> sample_distinct(std::size_t k, std::size_t n, Rng& rng) {
  std::vector<std::size_t> picked;
  picked.reserve(k);
  for (std::size_t j = n - k; j < n; ++j) {
    const std::size_t t = uniform_index(rng, j);
    if (std::find(picked.begin(), picked.end(), t) == picked.end()) {
      picked.push_back(t);
    } else {
      picked.push_back(j);
    }
  }
  for (std::size_t i = picked.size(); i > 1; --i) std::swap(picked[i - 1], picked[uniform_index(rng, i - 1)]);
  return picked;
}

}  // namespace

ContentionResult contend(std::size_t num_attempts, std::size_t total_slots, ContentionRule rule, Rng& rng) {
  ContentionResult r;
  r.slot_of_attempt.assign(num_attempts, ContentionResult::npos);
  if (num_attempts == 0) return r;
  if (num_attempts <= total_slots) {
    r.slot_of_attempt = sample_distinct(num_attempts, total_slots, rng);
    return r;
  }
  if (rule == ContentionRule::all_fail) {
    r.collision = true;
    return r;
  }
  // capture: a random subset of size total_slots wins distinct slots.
  const auto winners = sample_distinct(total_slots, num_attempts, rng);
  for (std::size_t s = 0; s < winners.size(); ++s) r.slot_of_attempt[winners[s]] = s;
  return r;
}

double gbu_rate(std::size_t gbu, double gf_interference_w, const ChannelSnapshot& snap, const DetectionMatrix& v,
                const RadioParams& params) {
  const double signal = params.gbu_power_w * channel::projected_gain(snap.gbu_channels[gbu], v.column(gbu));
  const double denom = gb_interference(gbu, snap, v, params) + gf_interference_w + params.noise_power_w;
  return std::log2(1.0 + signal / denom);
}

double gfu_rate(std::size_t level, std::span<const double> plan_row, std::span<const std::size_t> admitted_levels) {
  double later = 0.0;
  for (std::size_t m : admitted_levels) {
    if (m > level) later += plan_row[m];
  }
  return std::log2(1.0 + plan_row[level] / (1.0 + later));
}

SlotOutcome resolve_slot(const SnrLevelPlan& plan, const InterferenceBudget& budget,
                         std::span<const std::size_t> attempting, const ChannelSnapshot& snap,
                         const DetectionMatrix& v, const RadioParams& params, const MacConfig& config, Rng& rng) {
  const std::size_t num_gbus = snap.gbu_channels.size();
  SlotOutcome out;
  out.attempts.assign(attempting.begin(), attempting.end());
  out.total_levels = plan.total_levels();
  out.gbu_rates.assign(num_gbus, 0.0);
  out.gfu_rates.assign(snap.gfu_channels.size(), 0.0);
  out.gf_interference.assign(num_gbus, 0.0);

  const auto contention = contend(attempting.size(), out.total_levels, config.contention, rng);
  out.collision_flag = contention.collision;

  std::vector<std::vector<std::size_t>> admitted(num_gbus);
  for (std::size_t i = 0; i < attempting.size(); ++i) {
    const std::size_t gfu = attempting[i];
    std::size_t slot = contention.slot_of_attempt[i];
    if (slot == ContentionResult::npos) {
      out.collided.push_back(gfu);
      continue;
    }
    std::size_t gbu = 0;
    while (slot >= plan.per_gbu_levels[gbu].size()) {
      slot -= plan.per_gbu_levels[gbu].size();
      ++gbu;
    }
    Admission adm{gfu, gbu, slot, false};
    adm.success = sic_feasible(plan.per_gbu_levels[gbu][slot], snap.gfu_channels[gfu], v.column(gbu), params);
    if (adm.success) {
      out.successes.push_back(gfu);
      admitted[gbu].push_back(slot);
    }
    out.admissions.push_back(adm);
  }
  std::sort(out.successes.begin(), out.successes.end());

  for (std::size_t k = 0; k < num_gbus; ++k) {
    double realized = 0.0;
    for (std::size_t n : admitted[k]) realized += plan.per_gbu_levels[k][n] * params.noise_power_w;
    out.gf_interference[k] = config.full_budget_charge ? budget.per_gbu_gf[k] : realized;
    out.gbu_rates[k] = gbu_rate(k, out.gf_interference[k], snap, v, params);
  }
  for (const auto& adm : out.admissions) {
    if (!adm.success) continue;
    out.gfu_rates[adm.gfu] = gfu_rate(adm.level, plan.per_gbu_levels[adm.gbu], admitted[adm.gbu]);
  }
  return out;
}

double slot_throughput(const SlotOutcome& outcome) {
  return std::accumulate(outcome.gbu_rates.begin(), outcome.gbu_rates.end(), 0.0) +
         std::accumulate(outcome.gfu_rates.begin(), outcome.gfu_rates.end(), 0.0);
}

}  // namespace sgf::mac
