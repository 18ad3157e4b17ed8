#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sgf/rng.hpp"

namespace sgf::channel {

using CVector = Eigen::VectorXcd;

struct UserPosition {
  double x_km{0.0};
  double y_km{0.0};

  double distance_km() const;
  double angle_rad() const;
};

// Linear-unit radio parameters. Everything downstream of config loading works
// on these; dB quantities never leak past RadioConfig::linear().
struct RadioParams {
  int num_antennas{3};
  double rician_factor{1.0};
  double noise_power_w{1e-14};
  double gbu_power_w{0.2};
  double gfu_max_snr{1.0};  // GFU transmit SNR limit, linear
  double bandwidth_hz{1e6};
  double target_rate{0.5};  // bits/s/Hz
  double pathloss_alpha{3.0};
  double pathloss_ref_gain{1e-12};  // gain at the reference distance
  double ref_distance_km{1.0};
  double d_min_km{0.05};
  double placement_std_km{1.5};
  double mobility_std_km{0.05};
};

// User-facing radio configuration, dB/dBm where the source tables use them.
struct RadioConfig {
  int num_antennas{3};
  double rician_factor{1.0};
  double noise_dbm{-110.0};
  double gbu_power_dbm{23.0};
  double gfu_max_snr_db{133.0};
  double bandwidth_hz{1e6};
  double target_rate{0.5};
  double placement_std_km{1.5};
  double mobility_std_m{50.0};
  double pathloss_alpha{3.0};
  double pathloss_ref_db{-120.0};
  double d_min_m{50.0};

  void validate() const;
  RadioParams linear() const;
};

struct ChannelSnapshot {
  std::vector<CVector> gbu_channels;
  std::vector<CVector> gfu_channels;
  std::int64_t slot_index{0};
};

double db_to_linear(double db);
double dbm_to_watts(double dbm);

// Log-distance gain g(d) = g0 (d / d0)^-alpha.
double large_scale_gain(double distance_km, const RadioParams& params);

// Half-wavelength ULA phase ramp; unit-modulus entries.
CVector steering_vector(double angle_rad, int num_antennas);

std::vector<UserPosition> place_users(std::size_t count, double std_km, double d_min_km, Rng& rng);

std::vector<UserPosition> step_mobility(std::span<const UserPosition> positions, double step_std_km,
                                        double d_min_km, Rng& rng);

// sqrt(g(d)) * (sqrt(R/(R+1)) a + sqrt(1/(R+1)) w), w ~ CN(0, I).
CVector sample_channel(const UserPosition& position, const RadioParams& params, Rng& rng);

ChannelSnapshot sample_snapshot(std::span<const UserPosition> gbus, std::span<const UserPosition> gfus,
                                const RadioParams& params, std::int64_t slot_index, Rng& rng);
ChannelSnapshot sample_snapshot(std::span<const UserPosition> gbus, std::span<const UserPosition> gfus,
                                const RadioParams& params, std::int64_t slot_index, Rng& gbu_rng, Rng& gfu_rng);

// Row-times-column product h v used throughout the link equations.
inline std::complex<double> project(const CVector& h, const CVector& v) { return (h.array() * v.array()).sum(); }
inline double projected_gain(const CVector& h, const CVector& v) { return std::norm(project(h, v)); }

}  // namespace sgf::channel
