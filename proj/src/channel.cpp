#include "sgf/channel.hpp"

#include <cmath>
#include <numbers>

#include "sgf/errors.hpp"

namespace sgf::channel {

double UserPosition::distance_km() const { return std::hypot(x_km, y_km); }

double UserPosition::angle_rad() const { return std::atan2(y_km, x_km); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double dbm_to_watts(double dbm) { return db_to_linear(dbm) * 1e-3; }

void RadioConfig::validate() const {
  if (num_antennas < 1) throw ConfigError("antennas must be >= 1");
  if (!(rician_factor >= 0.0) || !std::isfinite(rician_factor)) throw ConfigError("rician_factor must be finite and >= 0");
  for (double v : {noise_dbm, gbu_power_dbm, gfu_max_snr_db, pathloss_ref_db}) {
    if (!std::isfinite(v)) throw ConfigError("power levels must be finite");
  }
  if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz must be > 0");
  if (!(target_rate > 0.0) || !std::isfinite(target_rate)) throw ConfigError("target_rate must be > 0");
  if (!(placement_std_km > 0.0)) throw ConfigError("placement_std_km must be > 0");
  if (!(mobility_std_m >= 0.0)) throw ConfigError("mobility_std_m must be >= 0");
  if (!(pathloss_alpha > 0.0)) throw ConfigError("pathloss_alpha must be > 0");
  if (!(d_min_m > 0.0)) throw ConfigError("d_min_m must be > 0");
}

RadioParams RadioConfig::linear() const {
  validate();
  RadioParams p;
  p.num_antennas = num_antennas;
  p.rician_factor = rician_factor;
  p.noise_power_w = dbm_to_watts(noise_dbm);
  p.gbu_power_w = dbm_to_watts(gbu_power_dbm);
  p.gfu_max_snr = db_to_linear(gfu_max_snr_db);
  p.bandwidth_hz = bandwidth_hz;
  p.target_rate = target_rate;
  p.pathloss_alpha = pathloss_alpha;
  p.pathloss_ref_gain = db_to_linear(pathloss_ref_db);
  p.ref_distance_km = 1.0;
  p.d_min_km = d_min_m * 1e-3;
  p.placement_std_km = placement_std_km;
  p.mobility_std_km = mobility_std_m * 1e-3;
  return p;
}

double large_scale_gain(double distance_km, const RadioParams& params) {
  return params.pathloss_ref_gain * std::pow(distance_km / params.ref_distance_km, -params.pathloss_alpha);
}

CVector steering_vector(double angle_rad, int num_antennas) {
  CVector a(num_antennas);
  const double phase_step = std::numbers::pi * std::sin(angle_rad);
  for (int n = 0; n < num_antennas; ++n) a(n) = std::polar(1.0, phase_step * n);
  return a;
}

namespace {

UserPosition draw_position(double std_km, double d_min_km, Rng& rng) {
  for (;;) {
    UserPosition p{std_km * standard_normal(rng), std_km * standard_normal(rng)};
    if (p.distance_km() >= d_min_km) return p;
  }
}

}  // namespace

std::vector<UserPosition> place_users(std::size_t count, double std_km, double d_min_km, Rng& rng) {
  std::vector<UserPosition> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(draw_position(std_km, d_min_km, rng));
  return out;
}

std::vector<UserPosition> step_mobility(std::span<const UserPosition> positions, double step_std_km,
                                        double d_min_km, Rng& rng) {
  std::vector<UserPosition> out(positions.begin(), positions.end());
  if (step_std_km <= 0.0) return out;
  for (auto& p : out) {
    for (;;) {
      UserPosition next{p.x_km + step_std_km * standard_normal(rng), p.y_km + step_std_km * standard_normal(rng)};
      if (next.distance_km() >= d_min_km) {
        p = next;
        break;
      }
    }
  }
  return out;
}

CVector sample_channel(const UserPosition& position, const RadioParams& params, Rng& rng) {
  const int n = params.num_antennas;
  const double r = params.rician_factor;
  const double los_weight = std::sqrt(r / (r + 1.0));
  const double nlos_weight = std::sqrt(1.0 / (r + 1.0));
  const double amplitude = std::sqrt(large_scale_gain(position.distance_km(), params));

  const CVector los = steering_vector(position.angle_rad(), n);
  CVector h(n);
  for (int i = 0; i < n; ++i) {
    const std::complex<double> w(standard_normal(rng) * std::numbers::sqrt2 / 2.0,
                                 standard_normal(rng) * std::numbers::sqrt2 / 2.0);
    h(i) = amplitude * (los_weight * los(i) + nlos_weight * w);
  }
  return h;
}

ChannelSnapshot sample_snapshot(std::span<const UserPosition> gbus, std::span<const UserPosition> gfus,
                                const RadioParams& params, std::int64_t slot_index, Rng& rng) {
  return sample_snapshot(gbus, gfus, params, slot_index, rng, rng);
}

ChannelSnapshot sample_snapshot(std::span<const UserPosition> gbus, std::span<const UserPosition> gfus,
                                const RadioParams& params, std::int64_t slot_index, Rng& gbu_rng, Rng& gfu_rng) {
  ChannelSnapshot snap;
  snap.slot_index = slot_index;
  snap.gbu_channels.reserve(gbus.size());
  snap.gfu_channels.reserve(gfus.size());
  for (const auto& p : gbus) snap.gbu_channels.push_back(sample_channel(p, params, gbu_rng));
  for (const auto& p : gfus) snap.gfu_channels.push_back(sample_channel(p, params, gfu_rng));
  return snap;
}

}  // namespace sgf::channel
