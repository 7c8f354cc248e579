#include <cmath>
#include <limits>
#include <sstream>

#include "awh/model.hpp"
#include "awh/numeric.hpp"
#include "awh/rng.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace awh;

namespace {

// direct-summation oracle, deliberately without log-sum-exp
double naive_free_energy(const EnergyModel& m, int j) {
  double z = 0.0;
  for (int x = 0; x < m.num_states(); ++x) z += std::exp(-m.energy(x, j));
  return -std::log(z);
}

std::vector<double> naive_marginal(const EnergyModel& m, std::span<const double> theta) {
  std::vector<double> w(theta.size(), 0.0);
  double z = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    w[j] = std::exp(theta[j] - naive_free_energy(m, int(j)));
    z += w[j];
  }
  for (double& v : w) v /= z;
  return w;
}

EnergyModel uniform_model(int nx, int nl) {
  std::vector<double> labels;
  for (int j = 0; j < nl; ++j) labels.push_back(double(j));
  return EnergyModel(nx, labels, [](int, int) { return 0.0; });
}

}  // namespace

TEST_CASE("free energy: uniform energies give -log|X|") {
  const auto m = uniform_model(4, 3);
  for (int j = 0; j < 3; ++j)
    CHECK(m.free_energy(j) == doctest::Approx(-std::log(4.0)).epsilon(1e-14));
}

TEST_CASE("free energy: single dominant state") {
  const auto m = EnergyModel(2, {0.0, 1.0}, std::vector<double>{0.0, 0.0, 1e3, 1e3});
  CHECK(std::abs(m.free_energy(0)) < 1e-10);
  CHECK(std::abs(m.free_energy(1)) < 1e-10);
}

TEST_CASE("free energy: double-well golden value at lambda=1") {
  // frozen from an independent direct-summation scratch computation
  const auto m = make_double_well(32, {1.0, 2.0});
  CHECK(m.free_energy(0) == doctest::Approx(-2.834164562568334).epsilon(1e-14));
}

TEST_CASE("free energy: fixture ladder matches direct summation") {
  const auto m = make_double_well();
  for (int j = 0; j < m.num_lambdas(); ++j)
    CHECK(std::abs(m.free_energy(j) - naive_free_energy(m, j)) < 1e-12);
}

TEST_CASE("free energy: ising chain matches the transfer-matrix closed form") {
  const auto m = make_ising_chain(6);
  for (int j = 0; j < m.num_lambdas(); ++j) {
    const double beta = m.label(j);
    const int L = 6;
    const double z = std::pow(2.0 * std::cosh(beta), L) + std::pow(2.0 * std::sinh(beta), L);
    CHECK(m.free_energy(j) == doctest::Approx(-std::log(z)).epsilon(1e-12));
  }
}

TEST_CASE("log-sum-exp keeps +-700 energy offsets finite") {
  const auto m = EnergyModel(2, {0.0, 1.0}, std::vector<double>{-700.0, 700.0, -690.0, 690.0});
  for (int j = 0; j < 2; ++j) {
    CHECK(std::isfinite(m.free_energy(j)));
    const auto p = m.gibbs_distribution(j);
    CHECK(std::isfinite(p[0]));
    CHECK(std::isfinite(p[1]));
  }
}

TEST_CASE("gibbs density: uniform model and two-state closed form") {
  const auto u = uniform_model(4, 2);
  for (int x = 0; x < 4; ++x) CHECK(u.gibbs_density(x, 0) == doctest::Approx(0.25));

  const auto m = EnergyModel(2, {0.0, 1.0},
                             std::vector<double>{0.0, 0.0, std::log(3.0), std::log(3.0)});
  CHECK(m.gibbs_density(0, 0) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(m.gibbs_density(1, 0) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("gibbs density: fixture matches direct summation and sums to 1") {
  const auto m = make_double_well();
  for (int j = 0; j < m.num_lambdas(); ++j) {
    const double z = std::exp(-naive_free_energy(m, j));
    Kahan sum;
    for (int x = 0; x < m.num_states(); ++x) {
      const double direct = std::exp(-m.energy(x, j)) / z;
      CHECK(std::abs(m.gibbs_density(x, j) - direct) < 1e-12);
      sum.add(m.gibbs_density(x, j));
    }
    CHECK(std::abs(sum.value() - 1.0) < 1e-12);
  }
}

TEST_CASE("marginal: theta = F gives the uniform distribution") {
  const auto m = make_double_well();
  std::vector<double> theta;
  for (int j = 0; j < m.num_lambdas(); ++j) theta.push_back(m.free_energy(j));
  for (double p : m.marginal_lambda(theta))
    CHECK(p == doctest::Approx(1.0 / 8).epsilon(1e-13));
}

TEST_CASE("marginal: optimal theta reproduces rho") {
  const auto m = make_double_well();
  std::vector<double> w;
  for (int j = 1; j <= 8; ++j) w.push_back(double(j));
  const auto rho = TargetDistribution::from_weights(w);
  const auto p = m.marginal_lambda(m.optimal_theta(rho));
  for (int j = 0; j < 8; ++j) CHECK(std::abs(p[std::size_t(j)] - rho[j]) < 1e-12);
}

TEST_CASE("marginal: random theta matches direct summation") {
  const auto m = make_double_well();
  SplitMix64 rng(42);
  for (int it = 0; it < 10; ++it) {
    std::vector<double> theta;
    for (int j = 0; j < 8; ++j) theta.push_back(4.0 * rng.next_double() - 2.0);
    const auto a = m.marginal_lambda(theta);
    const auto b = naive_marginal(m, theta);
    for (int j = 0; j < 8; ++j) CHECK(std::abs(a[std::size_t(j)] - b[std::size_t(j)]) < 1e-12);
  }
}

TEST_CASE("marginal: invariant under constant shifts of theta") {
  const auto m = make_double_well();
  SplitMix64 rng(7);
  std::vector<double> theta;
  for (int j = 0; j < 8; ++j) theta.push_back(2.0 * rng.next_double() - 1.0);
  const auto base = m.marginal_lambda(theta);
  for (double c : {-100.0, -1.0, 0.37, 55.0}) {
    auto shifted = theta;
    for (double& t : shifted) t += c;
    const auto p = m.marginal_lambda(shifted);
    for (int j = 0; j < 8; ++j) CHECK(std::abs(p[std::size_t(j)] - base[std::size_t(j)]) < 1e-12);
  }
}

TEST_CASE("conditional: constant row and theta=0 give uniform") {
  const auto m = uniform_model(3, 5);
  const std::vector<double> theta(5, 0.0);
  for (double p : m.conditional_lambda(1, theta))
    CHECK(p == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("conditional: two-point logistic closed form") {
  // -E(x,0)+theta(0) = -E(x,1)+theta(1) + log 9  ->  (0.9, 0.1)
  const auto m = EnergyModel(2, {0.0, 1.0},
                             std::vector<double>{0.0, std::log(9.0), 0.0, std::log(9.0)});
  const std::vector<double> theta(2, 0.0);
  const auto p = m.conditional_lambda(0, theta);
  CHECK(p[0] == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("conditional: fixture x=7 random theta matches direct summation") {
  const auto m = make_double_well();
  SplitMix64 rng(3);
  std::vector<double> theta;
  for (int j = 0; j < 8; ++j) theta.push_back(3.0 * rng.next_double() - 1.5);
  const auto p = m.conditional_lambda(7, theta);
  double z = 0.0;
  for (int j = 0; j < 8; ++j) z += std::exp(-m.energy(7, j) + theta[std::size_t(j)]);
  Kahan sum;
  for (int j = 0; j < 8; ++j) {
    const double direct = std::exp(-m.energy(7, j) + theta[std::size_t(j)]) / z;
    CHECK(std::abs(p[std::size_t(j)] - direct) < 1e-12);
    sum.add(p[std::size_t(j)]);
  }
  CHECK(std::abs(sum.value() - 1.0) < 1e-12);
}

TEST_CASE("joint density: equal exponents, marginals, and normalization") {
  const auto m = uniform_model(2, 2);
  const std::vector<double> theta(2, 0.0);
  for (double v : m.joint_density(theta)) CHECK(v == doctest::Approx(0.25).epsilon(1e-14));

  const auto dw = make_double_well();
  SplitMix64 rng(11);
  std::vector<double> th;
  for (int j = 0; j < 8; ++j) th.push_back(2.0 * rng.next_double() - 1.0);
  const auto joint = dw.joint_density(th);
  Kahan total;
  for (double v : joint) {
    CHECK(v > 0.0);
    total.add(v);
  }
  CHECK(std::abs(total.value() - 1.0) < 1e-12);

  // column sums reproduce the lambda marginal
  const auto marginal = dw.marginal_lambda(th);
  for (int j = 0; j < 8; ++j) {
    Kahan col;
    for (int x = 0; x < 32; ++x) col.add(joint[std::size_t(x) * 8 + std::size_t(j)]);
    CHECK(std::abs(col.value() - marginal[std::size_t(j)]) < 1e-12);
  }
  // row sums reproduce the x marginal
  const auto xm = dw.x_marginal(th);
  for (int x = 0; x < 32; ++x) {
    Kahan row;
    for (int j = 0; j < 8; ++j) row.add(joint[std::size_t(x) * 8 + std::size_t(j)]);
    CHECK(std::abs(row.value() - xm[std::size_t(x)]) < 1e-12);
  }
}

TEST_CASE("joint density: gibbs density equals the lambda conditional of the joint") {
  const auto m = make_double_well();
  SplitMix64 rng(13);
  std::vector<double> th;
  for (int j = 0; j < 8; ++j) th.push_back(2.0 * rng.next_double() - 1.0);
  const auto joint = m.joint_density(th);
  const auto marginal = m.marginal_lambda(th);
  for (int j = 0; j < 8; ++j)
    for (int x = 0; x < 32; ++x) {
      const double cond = joint[std::size_t(x) * 8 + std::size_t(j)] / marginal[std::size_t(j)];
      CHECK(std::abs(cond - m.gibbs_density(x, j)) < 1e-12);
    }
}

TEST_CASE("conditional and marginal are consistent through the x marginal") {
  const auto m = test::tiny_model();
  SplitMix64 rng(17);
  std::vector<double> th{rng.next_double(), -rng.next_double()};
  const auto xm = m.x_marginal(th);
  const auto marginal = m.marginal_lambda(th);
  for (int j = 0; j < 2; ++j) {
    Kahan acc;
    for (int x = 0; x < 3; ++x)
      acc.add(m.conditional_lambda(x, th)[std::size_t(j)] * xm[std::size_t(x)]);
    CHECK(std::abs(acc.value() - marginal[std::size_t(j)]) < 1e-12);
  }
}

TEST_CASE("optimal theta: constant free energy and uniform rho") {
  const auto m = uniform_model(4, 3);
  const auto t = m.optimal_theta(TargetDistribution::uniform(3));
  CHECK(t[0] == doctest::Approx(t[1]).epsilon(1e-15));
  CHECK(t[1] == doctest::Approx(t[2]).epsilon(1e-15));
}

TEST_CASE("optimal theta: uniform rho differences equal free-energy differences") {
  const auto m = make_double_well();
  const auto t = m.optimal_theta(TargetDistribution::uniform(8));
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      CHECK(std::abs((t[std::size_t(i)] - t[std::size_t(j)]) -
                     (m.free_energy(i) - m.free_energy(j))) < 1e-13);
}

TEST_CASE("expectation: indicator of everything is 1") {
  const auto m = make_double_well();
  const std::vector<double> ones(32, 1.0);
  for (int j = 0; j < 8; ++j)
    CHECK(m.expectation(ones, j) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("energy CSV round-trips with identical free energies") {
  const auto m = make_double_well();
  std::stringstream ss;
  m.export_energy_csv(ss);
  std::vector<double> labels(m.labels().begin(), m.labels().end());
  const auto back = EnergyModel::import_energy_csv(ss, labels);
  REQUIRE(back.num_states() == m.num_states());
  REQUIRE(back.num_lambdas() == m.num_lambdas());
  for (int j = 0; j < 8; ++j) CHECK(back.free_energy(j) == m.free_energy(j));
}

TEST_CASE("validation: target distribution and model invariants") {
  CHECK_THROWS_AS(TargetDistribution({0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(TargetDistribution({1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(EnergyModel(1, {0.0, 1.0}, [](int, int) { return 0.0; }),
                  std::invalid_argument);
  CHECK_THROWS_AS(EnergyModel(4, {1.0, 1.0}, [](int, int) { return 0.0; }),
                  std::invalid_argument);
  CHECK_THROWS_AS(EnergyModel(2, {0.0, 1.0},
                              std::vector<double>{0.0, 0.0, 0.0,
                                                  std::numeric_limits<double>::infinity()}),
                  std::invalid_argument);
}
