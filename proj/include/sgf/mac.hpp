#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sgf/channel.hpp"
#include "sgf/rng.hpp"

namespace sgf::mac {

using channel::ChannelSnapshot;
using channel::CVector;
using channel::RadioParams;

enum class CascadeMode {
  paper_literal,  // level n absorbs only level n+1 as interference
  full_sum,       // level n absorbs every later-decoded level
};

// all_fail is the operating rule. capture lets up to N_tot random attempters
// through on overload; it exists only as a deliberately mismatched mechanic.
enum class ContentionRule { all_fail, capture };

struct MacConfig {
  CascadeMode cascade_mode{CascadeMode::paper_literal};
  bool full_budget_charge{false};  // GBU rate uses the full GF budget as interference
  std::size_t max_levels_per_gbu{1024};
  ContentionRule contention{ContentionRule::all_fail};
};

std::string to_string(CascadeMode mode);
CascadeMode parse_cascade_mode(const std::string& text);
std::string to_string(ContentionRule rule);
ContentionRule parse_contention_rule(const std::string& text);

// A x K receive combiner, one unit-norm column per GBU.
class DetectionMatrix {
 public:
  DetectionMatrix() = default;

  // Column-normalizes raw; an all-zero column is replaced by the first basis vector.
  static DetectionMatrix normalized(Eigen::MatrixXcd raw);
  static DetectionMatrix zero_forcing(std::span<const CVector> gbu_channels);
  // 2*K*A reals laid out per GBU as [re_0, im_0, re_1, im_1, ...].
  static DetectionMatrix from_reals(std::span<const double> reals, int num_antennas, int num_gbus);

  const Eigen::MatrixXcd& matrix() const { return m_; }
  CVector column(std::size_t k) const { return m_.col(static_cast<Eigen::Index>(k)); }
  std::size_t num_gbus() const { return static_cast<std::size_t>(m_.cols()); }
  int num_antennas() const { return static_cast<int>(m_.rows()); }

 private:
  explicit DetectionMatrix(Eigen::MatrixXcd m) : m_(std::move(m)) {}
  Eigen::MatrixXcd m_;
};

struct InterferenceBudget {
  std::vector<double> per_gbu_max;
  std::vector<double> per_gbu_gb;
  std::vector<double> per_gbu_gf;
};

struct SnrLevelPlan {
  // per_gbu_levels[k] is ordered largest first; its last entry is 2^R - 1.
  std::vector<std::vector<double>> per_gbu_levels;
  CascadeMode cascade_mode{CascadeMode::paper_literal};

  std::size_t total_levels() const;
};

struct Admission {
  std::size_t gfu{0};
  std::size_t gbu{0};
  std::size_t level{0};
  bool success{false};
};

struct SlotOutcome {
  std::vector<std::size_t> attempts;
  std::vector<Admission> admissions;
  std::vector<std::size_t> successes;
  std::vector<std::size_t> collided;
  bool collision_flag{false};
  std::size_t total_levels{0};
  std::vector<double> gbu_rates;
  std::vector<double> gfu_rates;
  std::vector<double> gf_interference;  // interference charged to each GBU, W
};

inline constexpr double kTinyTargetRate = 1e-9;

// P_k |h_k v_k|^2 / (2^R - 1) - n0. Negative when the GBU misses its target alone.
double max_tolerable_interference(std::size_t gbu, const ChannelSnapshot& snap, const DetectionMatrix& v,
                                  const RadioParams& params);

// sum_{j != k} P_j |h_k v_j|^2
double gb_interference(std::size_t gbu, const ChannelSnapshot& snap, const DetectionMatrix& v,
                       const RadioParams& params);

double gf_budget(double i_max, double i_gb);

InterferenceBudget compute_budget(const ChannelSnapshot& snap, const DetectionMatrix& v, const RadioParams& params);

// Largest cascade whose level sum fits in gf_budget / n0, largest level first.
std::vector<double> configure_snr_levels(double target_rate, double gf_budget_w, double noise_power_w,
                                         CascadeMode mode, std::size_t max_levels);

SnrLevelPlan build_plan(const InterferenceBudget& budget, const RadioParams& params, const MacConfig& config);

// Required transmit power level*n0/|h v|^2 must not exceed the GFU limit Gamma*n0.
bool sic_feasible(double level_snr, const CVector& gfu_channel, const CVector& v_k, const RadioParams& params);

struct ContentionResult {
  bool collision{false};
  std::vector<std::size_t> slot_of_attempt;  // parallel to attempts; npos if unmatched
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
};

// Random injective map of attempters onto total_slots slots.
ContentionResult contend(std::size_t num_attempts, std::size_t total_slots, ContentionRule rule, Rng& rng);

double gbu_rate(std::size_t gbu, double gf_interference_w, const ChannelSnapshot& snap, const DetectionMatrix& v,
                const RadioParams& params);

// log2(1 + G_n / (1 + sum of admitted later levels)).
double gfu_rate(std::size_t level, std::span<const double> plan_row, std::span<const std::size_t> admitted_levels);

SlotOutcome resolve_slot(const SnrLevelPlan& plan, const InterferenceBudget& budget,
                         std::span<const std::size_t> attempting, const ChannelSnapshot& snap,
                         const DetectionMatrix& v, const RadioParams& params, const MacConfig& config, Rng& rng);

double slot_throughput(const SlotOutcome& outcome);

}  // namespace sgf::mac
