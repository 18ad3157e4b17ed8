#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "sgf/mac.hpp"

using namespace sgf;
using namespace sgf::mac;
using channel::CVector;

namespace {

// Unit-noise, unit-power parameters so link quantities read as plain numbers.
channel::RadioParams unit_params(double target_rate = 1.0, double gamma = 1e12) {
  channel::RadioParams p;
  p.num_antennas = 1;
  p.noise_power_w = 1.0;
  p.gbu_power_w = 1.0;
  p.gfu_max_snr = gamma;
  p.target_rate = target_rate;
  return p;
}

CVector scalar(std::complex<double> v) {
  CVector c(1);
  c(0) = v;
  return c;
}

ChannelSnapshot random_snapshot(std::size_t k, std::size_t kp, int a, Rng& rng) {
  ChannelSnapshot s;
  auto draw = [&] {
    CVector h(a);
    for (int i = 0; i < a; ++i) h(i) = {standard_normal(rng), standard_normal(rng)};
    return h;
  };
  for (std::size_t i = 0; i < k; ++i) s.gbu_channels.push_back(draw());
  for (std::size_t i = 0; i < kp; ++i) s.gfu_channels.push_back(draw());
  return s;
}

}  // namespace

TEST_CASE("max_tolerable_interference: hand-evaluated cases") {
  auto p = unit_params(1.0);
  ChannelSnapshot snap;
  snap.gbu_channels = {scalar(std::sqrt(10.0))};
  const auto v = DetectionMatrix::normalized(Eigen::MatrixXcd::Ones(1, 1));
  CHECK(max_tolerable_interference(0, snap, v, p) == doctest::Approx(9.0));

  snap.gbu_channels = {scalar(0.0)};
  CHECK(max_tolerable_interference(0, snap, v, p) == doctest::Approx(-1.0));

  p.target_rate = 1e-10;
  CHECK(std::isinf(max_tolerable_interference(0, snap, v, p)));
}

TEST_CASE("gb_interference: single GBU sees none") {
  Rng rng(1);
  auto snap = random_snapshot(1, 0, 3, rng);
  auto p = unit_params();
  p.num_antennas = 3;
  const auto v = DetectionMatrix::zero_forcing(snap.gbu_channels);
  CHECK(gb_interference(0, snap, v, p) == 0.0);
}

TEST_CASE("gb_interference: hand-set two-GBU case") {
  auto p = unit_params();
  p.num_antennas = 2;
  ChannelSnapshot snap;
  CVector h1(2), h2(2);
  h1 << 1.0, 0.0;
  h2 << 0.0, 1.0;
  snap.gbu_channels = {h1, h2};
  Eigen::MatrixXcd raw(2, 2);
  raw << 1.0, 0.5, 0.0, std::sqrt(0.75);  // |h1 . v2|^2 = 0.25
  const auto v = DetectionMatrix::normalized(raw);
  CHECK(gb_interference(0, snap, v, p) == doctest::Approx(0.25));
}

TEST_CASE("gb_interference: zero forcing nulls other GBUs when K <= A") {
  Rng rng(2);
  auto p = unit_params();
  p.num_antennas = 3;
  for (int trial = 0; trial < 50; ++trial) {
    auto snap = random_snapshot(3, 0, 3, rng);
    const auto v = DetectionMatrix::zero_forcing(snap.gbu_channels);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(gb_interference(k, snap, v, p) < 1e-9 * p.gbu_power_w);
      CHECK(gb_interference(k, snap, v, p) / (p.gbu_power_w * snap.gbu_channels[k].squaredNorm()) < 1e-9);
    }
  }
}

TEST_CASE("detection matrix columns are unit norm") {
  Rng rng(3);
  auto snap = random_snapshot(4, 0, 3, rng);  // K > A takes the pseudo-inverse path
  for (const auto& v : {DetectionMatrix::zero_forcing(snap.gbu_channels),
                        DetectionMatrix::normalized(Eigen::MatrixXcd::Zero(3, 2))}) {
    for (std::size_t k = 0; k < v.num_gbus(); ++k) CHECK(v.column(k).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  std::vector<double> reals(2 * 2 * 3);
  for (auto& r : reals) r = standard_normal(rng);
  const auto v = DetectionMatrix::from_reals(reals, 3, 2);
  CHECK(v.num_gbus() == 2);
  CHECK(v.num_antennas() == 3);
  for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(v.column(k).norm() - 1.0) < 1e-9);
  // Layout: GBU 0 owns the first 2A reals as re/im pairs.
  const double scale = v.column(0)(0).real() / reals[0];
  CHECK(v.column(0)(0).imag() == doctest::Approx(reals[1] * scale));
  CHECK(v.column(0)(1).real() == doctest::Approx(reals[2] * scale));
}

TEST_CASE("gf_budget: subtraction and clamp") {
  CHECK(gf_budget(9, 4) == 5);
  CHECK(gf_budget(-1, 0) == 0);
  CHECK(gf_budget(9, 9) == 0);
}

TEST_CASE("configure_snr_levels: worked cascades") {
  CHECK(configure_snr_levels(1.0, 6.0, 1.0, CascadeMode::paper_literal, 1024) == std::vector<double>{3, 2, 1});
  CHECK(configure_snr_levels(1.0, 6.0, 1.0, CascadeMode::full_sum, 1024) == std::vector<double>{2, 1});
  CHECK(configure_snr_levels(1.0, 7.0, 1.0, CascadeMode::full_sum, 1024) == std::vector<double>{4, 2, 1});
  CHECK(configure_snr_levels(1.0, 0.5, 1.0, CascadeMode::paper_literal, 1024).empty());
  // Budgets are powers; levels are SNRs.
  CHECK(configure_snr_levels(1.0, 6e-14, 1e-14, CascadeMode::paper_literal, 1024).size() == 3);
  CHECK(configure_snr_levels(1.0, 1e9, 1.0, CascadeMode::paper_literal, 4).size() == 4);
}

TEST_CASE("cascade identities hold for every adjacent pair") {
  for (double rate : {0.5, 1.0, 2.0}) {
    const double eps = std::exp2(rate) - 1.0;
    for (std::size_t n = 1; n <= 6; ++n) {
      const auto lit = configure_snr_levels(rate, 1e30, 1.0, CascadeMode::paper_literal, n);
      REQUIRE(lit.size() == n);
      CHECK(lit.back() == doctest::Approx(eps));
      for (std::size_t i = 0; i + 1 < lit.size(); ++i) {
        CHECK(std::abs(lit[i] / (1.0 + lit[i + 1]) - eps) < 1e-12);
        CHECK(lit[i] > lit[i + 1]);
      }
      const auto full = configure_snr_levels(rate, 1e30, 1.0, CascadeMode::full_sum, n);
      for (std::size_t i = 0; i < full.size(); ++i) {
        const double later = std::accumulate(full.begin() + static_cast<long>(i) + 1, full.end(), 0.0);
        CHECK(std::abs(full[i] / (1.0 + later) - eps) < 1e-12);
      }
    }
  }
}

TEST_CASE("configure_snr_levels: budget safety and monotonicity") {
  Rng rng(5);
  for (auto mode : {CascadeMode::paper_literal, CascadeMode::full_sum}) {
    std::size_t previous = 0;
    for (double budget = 0.0; budget < 200.0; budget += 0.37) {
      const auto lv = configure_snr_levels(0.5 + uniform01(rng) * 0.0, budget, 1.0, mode, 1024);
      CHECK(std::accumulate(lv.begin(), lv.end(), 0.0) <= budget + 1e-12);
      CHECK(lv.size() >= previous);
      previous = lv.size();
    }
  }
}

TEST_CASE("sic_feasible: hand arithmetic") {
  const auto p = unit_params(1.0, 2.0);
  CHECK(sic_feasible(1.0, scalar(1.0), scalar(1.0), p));
  CHECK_FALSE(sic_feasible(4.0, scalar(1.0), scalar(1.0), p));
  CHECK_FALSE(sic_feasible(1.0, scalar(0.0), scalar(1.0), p));
}

TEST_CASE("contend: injective matching below capacity, collision above") {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const auto r = contend(3, 5, ContentionRule::all_fail, rng);
    CHECK_FALSE(r.collision);
    std::set<std::size_t> used(r.slot_of_attempt.begin(), r.slot_of_attempt.end());
    CHECK(used.size() == 3);
    CHECK(*used.rbegin() < 5);
  }
  const auto over = contend(4, 3, ContentionRule::all_fail, rng);
  CHECK(over.collision);
  for (auto s : over.slot_of_attempt) CHECK(s == ContentionResult::npos);
}

TEST_CASE("contend: every slot is equally likely") {
  Rng rng(7);
  std::vector<int> hits(4, 0);
  const int trials = 40000;
  for (int i = 0; i < trials; ++i) ++hits[contend(1, 4, ContentionRule::all_fail, rng).slot_of_attempt[0]];
  for (int h : hits) CHECK(h / static_cast<double>(trials) == doctest::Approx(0.25).epsilon(0.04));
}

TEST_CASE("gbu_rate: hand arithmetic") {
  const auto p = unit_params(1.0);
  ChannelSnapshot snap;
  snap.gbu_channels = {scalar(1.0)};
  const auto v = DetectionMatrix::normalized(Eigen::MatrixXcd::Ones(1, 1));
  CHECK(gbu_rate(0, 0.0, snap, v, p) == doctest::Approx(1.0));
  snap.gbu_channels = {scalar(0.0)};
  CHECK(gbu_rate(0, 0.0, snap, v, p) == 0.0);
  snap.gbu_channels = {scalar(std::sqrt(3.0))};
  CHECK(gbu_rate(0, 1.0, snap, v, p) == doctest::Approx(std::log2(2.5)).epsilon(1e-12));
  CHECK(gbu_rate(0, 1.0, snap, v, p) == doctest::Approx(1.3219).epsilon(1e-4));
}

TEST_CASE("gfu_rate: realized SINR over later admitted levels") {
  const std::vector<double> lone{1.0};
  const std::vector<std::size_t> only0{0};
  CHECK(gfu_rate(0, lone, only0) == doctest::Approx(1.0));

  const std::vector<double> literal{3, 2, 1};
  const std::vector<std::size_t> all{0, 1, 2};
  CHECK(gfu_rate(0, literal, all) == doctest::Approx(std::log2(1.75)));
  CHECK(gfu_rate(0, literal, all) == doctest::Approx(0.8074).epsilon(1e-4));

  const std::vector<double> full{4, 2, 1};
  for (std::size_t n = 0; n < 3; ++n) CHECK(std::abs(gfu_rate(n, full, all) - 1.0) < 1e-12);
}

TEST_CASE("resolve_slot: idle, admitted and collided slots") {
  auto p = unit_params(1.0);
  ChannelSnapshot snap;
  snap.gbu_channels = {scalar(std::sqrt(8.0))};
  snap.gfu_channels = {scalar(1.0), scalar(1.0), scalar(1.0), scalar(1.0)};
  const auto v = DetectionMatrix::normalized(Eigen::MatrixXcd::Ones(1, 1));
  const auto budget = compute_budget(snap, v, p);  // I_max = 7, budget 7 -> levels [3, 2, 1]
  MacConfig mc;
  const auto plan = build_plan(budget, p, mc);
  REQUIRE(plan.total_levels() == 3);
  Rng rng(8);

  SUBCASE("no attempts") {
    const auto out = resolve_slot(plan, budget, {}, snap, v, p, mc, rng);
    CHECK(out.successes.empty());
    for (double r : out.gfu_rates) CHECK(r == 0.0);
    CHECK(out.gbu_rates[0] == doctest::Approx(std::log2(9.0)));
  }
  SUBCASE("two feasible attempts both succeed") {
    const std::vector<std::size_t> att{0, 2};
    const auto out = resolve_slot(plan, budget, att, snap, v, p, mc, rng);
    CHECK(out.successes == att);
    CHECK_FALSE(out.collision_flag);
    // Independent re-summation of the slot's rates.
    double expect = out.gbu_rates[0];
    for (double r : out.gfu_rates) expect += r;
    CHECK(slot_throughput(out) == doctest::Approx(expect));
    double interference = 0.0;
    for (const auto& a : out.admissions) interference += plan.per_gbu_levels[0][a.level];
    CHECK(out.gbu_rates[0] == doctest::Approx(std::log2(1.0 + 8.0 / (1.0 + interference))));
  }
  SUBCASE("more attempts than levels collide") {
    const std::vector<std::size_t> att{0, 1, 2, 3};
    const auto out = resolve_slot(plan, budget, att, snap, v, p, mc, rng);
    CHECK(out.collision_flag);
    CHECK(out.successes.empty());
    CHECK(out.collided.size() == 4);
  }
  SUBCASE("literal GBU rate charges the whole budget") {
    mc.full_budget_charge = true;
    const auto out = resolve_slot(plan, budget, {}, snap, v, p, mc, rng);
    CHECK(out.gbu_rates[0] == doctest::Approx(1.0));
  }
  SUBCASE("infeasible SIC admits but fails") {
    p.gfu_max_snr = 1.5;  // only the lowest level (1) is reachable
    std::size_t failed = 0, ok = 0;
    for (int i = 0; i < 200; ++i) {
      const std::vector<std::size_t> att{1};
      const auto out = resolve_slot(plan, budget, att, snap, v, p, mc, rng);
      REQUIRE(out.admissions.size() == 1);
      (out.admissions[0].success ? ok : failed)++;
      CHECK(out.admissions[0].success == (out.admissions[0].level == 2));
    }
    CHECK(ok > 0);
    CHECK(failed > 0);
  }
}

TEST_CASE("resolve_slot: random fuzz keeps outcome invariants") {
  Rng rng(9);
  auto p = unit_params(0.5, 50.0);
  p.num_antennas = 3;
  MacConfig mc;
  for (int trial = 0; trial < 500; ++trial) {
    auto snap = random_snapshot(3, 5, 3, rng);
    for (auto& h : snap.gbu_channels) h *= 4.0;
    const auto v = DetectionMatrix::zero_forcing(snap.gbu_channels);
    const auto budget = compute_budget(snap, v, p);
    const auto plan = build_plan(budget, p, mc);
    std::vector<std::size_t> att;
    for (std::size_t g = 0; g < 5; ++g) {
      if (uniform01(rng) < 0.5) att.push_back(g);
    }
    const auto out = resolve_slot(plan, budget, att, snap, v, p, mc, rng);
    for (std::size_t g : out.successes) CHECK(std::find(att.begin(), att.end(), g) != att.end());
    if (out.collision_flag) CHECK(out.successes.empty());
    std::size_t failed_sic = 0;
    for (const auto& a : out.admissions) failed_sic += a.success ? 0 : 1;
    CHECK(out.successes.size() + failed_sic + out.collided.size() == att.size());
    for (std::size_t g = 0; g < 5; ++g) {
      const bool success = std::binary_search(out.successes.begin(), out.successes.end(), g);
      if (!success) CHECK(out.gfu_rates[g] == 0.0);
    }
    for (std::size_t k = 0; k < 3; ++k) {
      double lsum = 0.0;
      for (double l : plan.per_gbu_levels[k]) lsum += l;
      CHECK(lsum * p.noise_power_w <= budget.per_gbu_gf[k] + 1e-9);
      CHECK(budget.per_gbu_gf[k] == doctest::Approx(std::max(0.0, budget.per_gbu_max[k] - budget.per_gbu_gb[k])));
    }
  }
}

TEST_CASE("mode names round-trip") {
  CHECK(parse_cascade_mode(to_string(CascadeMode::full_sum)) == CascadeMode::full_sum);
  CHECK(parse_cascade_mode("paper-literal") == CascadeMode::paper_literal);
  CHECK(parse_contention_rule(to_string(ContentionRule::capture)) == ContentionRule::capture);
  CHECK_THROWS(parse_cascade_mode("bogus"));
}
