#include "doctest.h"

#include "carl/errors.hpp"
#include "carl/extract.hpp"
#include "carl/scalarise.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <random>

using namespace carl;

namespace {

constexpr double kEps = 1e-4;
constexpr double kEta = 1e-4;

LagrangianSample cold_sample(const CsspModel& m, const Scalarisation& lambda) {
  return carl::oracle(m, lambda, nullptr, ideal_point_heuristic(m), kEps);
}

Scalarisation random_lambda(int n, std::mt19937_64& rng, double hi = 2.0) {
  std::uniform_real_distribution<double> u(0.0, hi);
  Eigen::VectorXd l(n);
  for (int i = 0; i < n; ++i) l[i] = u(rng);
  return Scalarisation(l);
}

ScalariseOptions options(bool warm = true) {
  ScalariseOptions opt;
  opt.search.epsilon = kEps;
  opt.eta = kEta;
  opt.warm_start = warm;
  return opt;
}

}  // namespace

TEST_SUITE("scalarise") {
  TEST_CASE("oracle on the pathological model at the origin") {
    const CsspModel m = fixture::coord_pathological();
    const LagrangianSample s = cold_sample(m, Scalarisation::zeros(2));
    CHECK(s.L == doctest::Approx(1.0));
    // a1 and a2 tie at 1; [1, 0, 11] precedes [1, 11, 0], so a2 sets g.
    CHECK(s.g.isApprox(Eigen::Vector2d(-1, 10)));
    CHECK(s.v0.isApprox(Eigen::Vector3d(1, 0, 11)));
  }

  TEST_CASE("oracle on the pathological model at [2, 2]") {
    const CsspModel m = fixture::coord_pathological();
    const LagrangianSample s = cold_sample(m, Scalarisation(Eigen::Vector2d(2, 2)));
    CHECK(s.L == doctest::Approx(10.0));
    CHECK(s.g.cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("oracle on an unconstrained model") {
    const CsspModel m = fixture::strong_eps();
    const LagrangianSample s = cold_sample(m, Scalarisation::zeros(0));
    CHECK(s.L == doctest::Approx(4.0));
    CHECK(s.g.size() == 0);
    CHECK(s.L == s.v0[0]);
  }

  TEST_CASE("samples satisfy their defining identities") {
    std::mt19937_64 rng(4);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const CsspModel m = generate(oracle::random_spec(seed));
      const Scalarisation lambda = random_lambda(m.n(), rng);
      const LagrangianSample s = cold_sample(m, lambda);
      CHECK(s.g.isApprox(s.v0.tail(m.n()) - m.bounds()));
      CHECK(s.L == doctest::Approx(lambda.project(s.v0) - lambda.lambda().dot(m.bounds())));
    }
  }

  TEST_CASE("line search stops at a boundary maximum") {
    const CsspModel m = fixture::getting_to_work();
    LagrangianOracle lo(m, HeuristicKind::IdealPoint, options());
    const LagrangianSample s = exact_line_search(lo, Scalarisation::zeros(2), 0);
    CHECK(s.lambda.lambda().isZero());
    CHECK(lo.trace().lambda_ssps == 1);
  }

  TEST_CASE("line search finds the kink of two crossing lines") {
    const CsspModel m = fixture::kinked_line();
    LagrangianOracle lo(m, HeuristicKind::IdealPoint, options());
    const LagrangianSample s = exact_line_search(lo, Scalarisation::zeros(1), 0);
    CHECK(std::abs(s.lambda[0] - 0.9) <= kEta);
    CHECK(s.L == doctest::Approx(10.0));
  }

  TEST_CASE("an unattainable bound makes the coordinate unbounded") {
    ModelSpec spec = fixture::kinked_line().to_spec();
    spec.bounds = {1};
    const CsspModel m(spec);
    LagrangianOracle lo(m, HeuristicKind::IdealPoint, options());
    CHECK_THROWS_AS(exact_line_search(lo, Scalarisation::zeros(1), 0), UnboundedCoordinate);
  }

  TEST_CASE("coordinate search on getting to work stays at the origin") {
    const CsspModel m = fixture::getting_to_work();
    LagrangianOracle lo(m, HeuristicKind::IdealPoint, options());
    const auto [lambda, sample] = coordinate_search(lo);
    CHECK(lambda.lambda().isZero());
    CHECK(sample.L == doctest::Approx(1.0));
    CHECK(lo.trace().outcome == SearchOutcome::CoordinateConverged);
  }

  TEST_CASE("coordinate search climbs the staircase") {
    const CsspModel m = fixture::coord_interesting();
    LagrangianOracle lo(m, HeuristicKind::IdealPoint, options());
    const auto [lambda, sample] = coordinate_search(lo);
    CHECK((lambda.lambda() - Eigen::Vector2d(0.2, 0.2)).cwiseAbs().maxCoeff() <= 2 * kEta);
    CHECK(sample.L == doctest::Approx(4.0).epsilon(1e-4));
    const auto& steps = lo.trace().steps;
    REQUIRE(steps.size() >= 2);
    CHECK(std::abs(steps[1][0] - 0.025) <= kEta);
    CHECK(steps[1][1] == 0.0);
    // Accepted steps never lose more than eta.
    for (std::size_t k = 1; k < steps.size(); ++k) {
      CHECK(oracle::lagrangian(m, steps[k]) >= oracle::lagrangian(m, steps[k - 1]) - kEta - 2 * kEps);
    }
  }

  TEST_CASE("coordinate search gets stuck on the pathological model") {
    const CsspModel m = fixture::coord_pathological();
    LagrangianOracle lo(m, HeuristicKind::IdealPoint, options());
    const auto [lambda, sample] = coordinate_search(lo);
    CHECK(lambda.lambda().isZero());
    CHECK(std::abs(sample.L - 1.0) <= kEps);
  }

  TEST_CASE("failure detection") {
    CHECK(detect_coordinate_failure(10.0, 1.0));
    CHECK_FALSE(detect_coordinate_failure(4.0, 4.0));
    CHECK_FALSE(detect_coordinate_failure(4.0 + 1e-7, 4.0));
    CHECK(detect_coordinate_failure(4.01, 4.0));
    CHECK_FALSE(detect_coordinate_failure(4.01, 4.0, 0.1));
    // Unconstrained: the extracted cost is L itself.
    const CsspModel m = fixture::strong_eps();
    const LagrangianSample s = cold_sample(m, Scalarisation::zeros(0));
    CHECK_FALSE(detect_coordinate_failure(s.v0[0], s.L));
  }

  TEST_CASE("subgradient ascent escapes the pathological origin") {
    const CsspModel m = fixture::coord_pathological();
    LagrangianOracle lo(m, HeuristicKind::IdealPoint, options());
    const LagrangianSample best = subgradient_fallback(lo, Scalarisation::zeros(2));
    CHECK(best.L >= 10.0 - 20 * kEta);
    CHECK(best.L <= 10.0 + kEps);
    CHECK(lo.trace().outcome == SearchOutcome::SubgradientConverged);
  }

  TEST_CASE("subgradient ascent keeps a stationary point") {
    const CsspModel m = fixture::coord_pathological();
    LagrangianOracle lo(m, HeuristicKind::IdealPoint, options());
    const LagrangianSample best = subgradient_fallback(lo, Scalarisation(Eigen::Vector2d(2, 2)));
    CHECK(best.lambda.lambda().isApprox(Eigen::Vector2d(2, 2)));
    CHECK(lo.trace().lambda_ssps == 1);
  }

  TEST_CASE("subgradient steps are projected onto the nonnegative orthant") {
    const CsspModel m = fixture::getting_to_work();
    LagrangianOracle lo(m, HeuristicKind::IdealPoint, options());
    subgradient_fallback(lo, Scalarisation(Eigen::Vector2d(1, 1)));
    const auto& samples = lo.trace().samples;
    REQUIRE(samples.size() >= 2);
    CHECK(samples[0].g[0] < -1.0);
    CHECK(samples[1].lambda[0] == 0.0);
    for (const auto& s : samples) CHECK(s.lambda.lambda().minCoeff() >= 0.0);
  }

  TEST_CASE("the subgradient step cap is enforced") {
    const CsspModel m = fixture::coord_pathological();
    ScalariseOptions opt = options();
    // From the origin the ascent reaches a stationary point on its second step.
    opt.max_subgradient_iters = 1;
    LagrangianOracle lo(m, HeuristicKind::IdealPoint, opt);
    CHECK_THROWS_AS(subgradient_fallback(lo, Scalarisation::zeros(2)), IterationCapExceeded);
    opt.max_subgradient_iters = 2;
    LagrangianOracle enough(m, HeuristicKind::IdealPoint, opt);
    CHECK(subgradient_fallback(enough, Scalarisation::zeros(2)).L == doctest::Approx(24.5 - 5 - 9.5));
  }

  TEST_CASE("surface samples") {
    const CsspModel m = fixture::coord_pathological();
    std::vector<Scalarisation> grid;
    for (double x : {0.0, 0.1, 0.5, 1.0, 2.5}) grid.emplace_back(Eigen::Vector2d(x, 0));
    const auto surface = sample_surface(m, grid, HeuristicKind::IdealPoint, options());
    REQUIRE(surface.size() == grid.size());
    CHECK(surface[0].second == doctest::Approx(1.0));
    for (std::size_t k = 1; k < grid.size(); ++k) {
      CHECK(surface[k].second == doctest::Approx(1.0 - grid[k][0]));
    }
    const CsspModel gtw = fixture::getting_to_work();
    CHECK(sample_surface(gtw, {Scalarisation::zeros(2)}, HeuristicKind::Zero)[0].second == doctest::Approx(1.0));
    const CsspModel ssp = fixture::strong_eps();
    const auto single = sample_surface(ssp, {Scalarisation::zeros(0)}, HeuristicKind::IdealPoint);
    REQUIRE(single.size() == 1);
    CHECK(single[0].second == doctest::Approx(4.0));
    CHECK_THROWS_AS(sample_surface(m, {Scalarisation::zeros(1)}, HeuristicKind::Zero), DimensionMismatch);
  }

  TEST_CASE("L is concave along random segments") {
    std::mt19937_64 rng(12);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const CsspModel m = generate(oracle::random_spec(seed));
      const Scalarisation a = random_lambda(m.n(), rng), b = random_lambda(m.n(), rng);
      const double la = cold_sample(m, a).L, lb = cold_sample(m, b).L;
      for (double t : {0.25, 0.5, 0.75}) {
        const Scalarisation mid(t * a.lambda() + (1 - t) * b.lambda());
        CAPTURE(seed);
        CHECK(cold_sample(m, mid).L >= t * la + (1 - t) * lb - 2 * kEps);
      }
    }
  }

  TEST_CASE("sampled subgradients support L") {
    std::mt19937_64 rng(13);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const CsspModel m = generate(oracle::random_spec(seed));
      const LagrangianSample s = cold_sample(m, random_lambda(m.n(), rng));
      for (int probe = 0; probe < 50; ++probe) {
        const Scalarisation p = random_lambda(m.n(), rng, 4.0);
        const double bound = s.L + s.g.dot(p.lambda() - s.lambda.lambda()) + 2 * kEps;
        CAPTURE(seed);
        CHECK(oracle::lagrangian(m, p) <= bound);
      }
    }
  }

  TEST_CASE("L never exceeds the cost of a feasible policy") {
    std::mt19937_64 rng(14);
    long compared = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const CsspModel m = generate(oracle::random_spec(seed, 8));
      std::vector<double> feasible_costs;
      oracle::for_each_policy(m, [&](const DeterministicPolicy& pi) {
        const auto c = oracle::iterate_policy(m, pi);
        if (c && feasibility_check(m, *c)) feasible_costs.push_back((*c)[0]);
      });
      feasible_costs.push_back(flat_dual_solve(m).cost[0]);
      for (int k = 0; k < 5; ++k) {
        const double L = cold_sample(m, random_lambda(m.n(), rng, 3.0)).L;
        for (double c : feasible_costs) {
          CHECK(L <= c + kEps);
          ++compared;
        }
      }
    }
    CHECK(compared > 500);
  }

  TEST_CASE("warm starting does not change the coordinate search result") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const CsspModel m = generate(oracle::random_spec(seed));
      LagrangianOracle warm(m, HeuristicKind::IdealPoint, options(true));
      LagrangianOracle fresh(m, HeuristicKind::IdealPoint, options(false));
      const double lw = coordinate_search(warm).second.L;
      const double lc = coordinate_search(fresh).second.L;
      CAPTURE(seed);
      CHECK(std::abs(lw - lc) <= 2 * kEps);
    }
  }
}
