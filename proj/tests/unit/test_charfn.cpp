#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "thmm/charfn.hpp"
#include "thmm/simulator.hpp"

using thmm::Complex;

namespace {

// (1/(b-a)) * integral of e^{itx} over [a, b], composite midpoint rule.
Complex quadrature_cell(double a, double b, double t, int m = 20000) {
  Complex acc{0.0, 0.0};
  const double h = (b - a) / m;
  for (int k = 0; k < m; ++k) {
    const double x = a + (k + 0.5) * h;
    acc += Complex{std::cos(t * x), std::sin(t * x)};
  }
  return acc / static_cast<double>(m);
}

thmm::GridDensity2D random_density(std::mt19937_64& gen, std::size_t r) {
  std::exponential_distribution<double> e(1.0);
  thmm::GridDensity2D d = thmm::GridDensity2D::uniform(r);
  double s = 0.0;
  for (double& v : d.p) s += (v = e(gen));
  for (double& v : d.p) v /= s;
  return d;
}

}  // namespace

TEST_CASE("cell characteristic function matches quadrature") {
  for (double t : {-7.3, -0.5, 0.01, 1.0, 4.2, 19.0}) {
    for (auto [a, b] : {std::pair{-1.0, -0.8}, {0.1, 0.3}, {-0.05, 0.6}}) {
      const Complex got = thmm::cell_charfn(a, b, t);
      const Complex want = quadrature_cell(a, b, t);
      CHECK(std::abs(got - want) < 1e-7);
    }
  }
}

TEST_CASE("cell characteristic function edge cases") {
  CHECK(thmm::cell_charfn(-1.0, 1.0, 0.0) == Complex{1.0, 0.0});
  CHECK_THROWS_AS(thmm::cell_charfn(0.5, 0.5, 1.0), std::invalid_argument);
  // Both sides of the series switch agree with the closed form.
  const double a = 0.2, b = 0.4;
  auto closed = [&](double t) {
    const double h = 0.5 * (b - a) * t;
    const double c = 0.5 * (a + b) * t;
    return Complex{std::cos(c), std::sin(c)} * (std::sin(h) / h);
  };
  for (double t : {1e-5, 0.99999e-4 / (b - a), 1.00001e-4 / (b - a), 1e-2}) {
    CHECK(std::abs(thmm::cell_charfn(a, b, t) - closed(t)) < 1e-15);
  }
}

TEST_CASE("grid characteristic function matches Monte Carlo") {
  std::mt19937_64 gen(3);
  const auto d = random_density(gen, 4);
  std::discrete_distribution<std::size_t> cell(d.p.begin(), d.p.end());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 400000;
  const double t1 = 2.3, t2 = -1.1;
  Complex acc{0.0, 0.0};
  for (int k = 0; k < n; ++k) {
    const std::size_t c = cell(gen);
    const std::size_t i = c / 4, j = c % 4;
    const double x1 = d.edge(i) + u(gen) * (d.edge(i + 1) - d.edge(i));
    const double x2 = d.edge(j) + u(gen) * (d.edge(j + 1) - d.edge(j));
    acc += Complex{std::cos(t1 * x1 + t2 * x2), std::sin(t1 * x1 + t2 * x2)};
  }
  acc /= static_cast<double>(n);
  CHECK(std::abs(thmm::grid_charfn(d, t1, t2) - acc) < 5.0 / std::sqrt(n));
  CHECK(std::abs(thmm::grid_charfn(d, 0.0, 0.0) - Complex{1.0, 0.0}) < 1e-15);
}

TEST_CASE("grid geometry and cell lookup") {
  auto d = thmm::GridDensity2D::uniform(4);
  CHECK(d.edge(0) == -1.0);
  CHECK(d.edge(4) == 1.0);
  CHECK(d.cell_of(-1.0) == 0);
  CHECK(d.cell_of(1.0) == 3);
  CHECK(d.cell_of(0.0) == 2);
  CHECK(d.cell_of(-0.5) == 1);
  CHECK_THROWS_AS(d.cell_of(1.0000001), std::out_of_range);
  const auto m = d.marginal_first();
  for (double v : m) CHECK(v == doctest::Approx(0.25));
  d.p[0] = 0.5;
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
}

TEST_CASE("empirical characteristic function conventions") {
  const std::vector<double> y{0.3, -0.2, 0.9, 0.1};
  const thmm::EmpCharFn phi(y);
  CHECK(phi(0.0, 0.0) == Complex{0.75, 0.0});
  const double t1 = 1.7, t2 = -0.4;
  Complex direct{0.0, 0.0};
  for (std::size_t j = 0; j + 1 < y.size(); ++j) {
    const double a = t1 * y[j] + t2 * y[j + 1];
    direct += Complex{std::cos(a), std::sin(a)};
  }
  direct /= 4.0;
  CHECK(std::abs(phi(t1, t2) - direct) < 1e-15);
  CHECK_THROWS_AS(thmm::EmpCharFn(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("empirical characteristic function is Hermitian and bounded") {
  thmm::CosineModelConfig cfg;
  cfg.n = 500;
  const auto s = thmm::simulate_cosine(cfg);
  const thmm::EmpCharFn phi(s);
  std::mt19937_64 gen(1);
  std::normal_distribution<double> z(0.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    const double t1 = z(gen), t2 = z(gen);
    const Complex v = phi(t1, t2);
    CHECK(std::abs(v - std::conj(phi(-t1, -t2))) < 1e-14);
    CHECK(std::abs(v) <= 1.0);
  }
}

TEST_CASE("weight nodes are deterministic with the requested spread") {
  const auto a = thmm::WeightNodes::draw(5);
  const auto b = thmm::WeightNodes::draw(5);
  REQUIRE(a.size() == 5000);
  CHECK(a.nodes == b.nodes);
  double s2 = 0.0;
  for (const auto& u : a.nodes) s2 += u[0] * u[0] + u[1] * u[1];
  CHECK(std::sqrt(s2 / 10000) == doctest::Approx(3.0).epsilon(0.03));
  CHECK_THROWS(thmm::WeightNodes::draw(1, 0));
}

TEST_CASE("cached and uncached criteria agree bit for bit") {
  thmm::CosineModelConfig cfg;
  cfg.n = 400;
  const auto s = thmm::simulate_cosine(cfg);
  const thmm::EmpCharFn phi(s);
  const auto nodes = thmm::WeightNodes::draw(2, 300);
  const thmm::MnCriterion cached(phi, nodes, 5);
  std::mt19937_64 gen(8);
  for (int k = 0; k < 5; ++k) {
    const auto d = random_density(gen, 5);
    CHECK(cached(d) == thmm::mn_criterion(phi, d, nodes));
  }
  auto shifted = thmm::GridDensity2D::uniform(5).translated(0.1);
  CHECK_THROWS_AS(cached(shifted), std::invalid_argument);
}

TEST_CASE("criterion vanishes when the target is the model's own characteristic function") {
  std::mt19937_64 gen(4);
  const auto nodes = thmm::WeightNodes::draw(9, 500);
  for (int k = 0; k < 5; ++k) {
    const auto d = random_density(gen, 6);
    const thmm::CharFn2D target = [&d](double t1, double t2) { return thmm::grid_charfn(d, t1, t2); };
    CHECK(thmm::mn_criterion(target, d, nodes) < 1e-28);
    CHECK(thmm::mn_criterion(target, thmm::GridDensity2D::uniform(6), nodes) > 1e-8);
  }
}

TEST_CASE("criterion is invariant to translating the grid density") {
  thmm::CosineModelConfig cfg;
  cfg.n = 300;
  const auto s = thmm::simulate_cosine(cfg);
  const thmm::EmpCharFn phi(s);
  const auto nodes = thmm::WeightNodes::draw(1, 400);
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> shift(-1.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    const auto d = random_density(gen, 4);
    const double base = thmm::mn_criterion(phi, d, nodes);
    const double moved = thmm::mn_criterion(phi, d.translated(shift(gen)), nodes);
    CHECK(std::abs(base - moved) <= 1e-10 * base);
  }
}
