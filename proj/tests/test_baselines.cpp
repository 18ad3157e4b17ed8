#include <doctest.h>

#include "sgf/baselines.hpp"
#include "sgf/errors.hpp"
#include "sgf/rng.hpp"

using namespace sgf;
using namespace sgf::policy;

TEST_CASE("adaptive_tp: formula and clamp") {
  CHECK(adaptive_tp(2, 4) == 0.5);
  CHECK(adaptive_tp(7, 4) == 1.0);
  CHECK(adaptive_tp(0, 4) == 0.0);
  CHECK_THROWS_AS(adaptive_tp(1, 0), ConfigError);
}

TEST_CASE("state_dependent_tp: formula and degenerate case") {
  CHECK(state_dependent_tp(5, 2) == doctest::Approx(1.0 / 3.0));
  CHECK(state_dependent_tp(5, 4) == 1.0);
  CHECK(state_dependent_tp(5, 5) == 0.0);
  CHECK_THROWS_AS(state_dependent_tp(5, 6), ConfigError);
}

TEST_CASE("fixed_tp: bounds and frequency") {
  CHECK(fixed_tp(0.0) == 0.0);
  CHECK(fixed_tp(1.0) == 1.0);
  CHECK_THROWS_AS(fixed_tp(1.5), ConfigError);
  CHECK_THROWS_AS(fixed_tp(-0.1), ConfigError);
  Rng rng(42);
  const int n = 1000000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += bernoulli(rng, fixed_tp(0.3)) ? 1 : 0;
  CHECK(std::abs(hits / static_cast<double>(n) - 0.3) < 0.002);
}

TEST_CASE("baseline outputs stay in [0, 1] and are monotone") {
  for (std::size_t m = 1; m <= 12; ++m) {
    double prev = -1.0;
    for (std::size_t l = 0; l <= 20; ++l) {
      const double p = adaptive_tp(l, m);
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
      CHECK(p >= prev);
      prev = p;
      if (m > 1) CHECK(adaptive_tp(l, m) <= adaptive_tp(l, m - 1));
    }
    prev = -1.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double p = state_dependent_tp(m, j);
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
      CHECK(p >= prev);
      prev = p;
    }
  }
}

TEST_CASE("PolicySpec parsing and dispatch") {
  const auto f = PolicySpec::parse("fixed:0.2");
  CHECK(f.kind == PolicyKind::fixed);
  CHECK(f.p == 0.2);
  CHECK(f.to_string() == "fixed:0.2");
  CHECK(PolicySpec::parse(f.to_string()).p == f.p);
  CHECK(PolicySpec::parse("adaptive").kind == PolicyKind::adaptive);
  CHECK(PolicySpec::parse("state-dependent").kind == PolicyKind::state_dependent);
  const auto l = PolicySpec::parse("learned:/tmp/x.json");
  CHECK(l.kind == PolicyKind::learned);
  CHECK(l.checkpoint == "/tmp/x.json");
  CHECK_THROWS_AS(PolicySpec::parse("fixed:2"), ConfigError);
  CHECK_THROWS_AS(PolicySpec::parse("greedy"), ConfigError);

  const LowerContext ctx{3, 5, 2};
  CHECK(baseline_tp(PolicySpec::parse("adaptive"), ctx) == doctest::Approx(0.6));
  CHECK(baseline_tp(PolicySpec::parse("state-dependent"), ctx) == doctest::Approx(1.0 / 3.0));
  CHECK(baseline_tp(f, ctx) == 0.2);
}
