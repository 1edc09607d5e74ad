#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "thmm/hmm_mle.hpp"

using thmm::EmConfig;
using thmm::HmmParams;

namespace oracle = thmm::oracle;

TEST_CASE("log-likelihood matches exhaustive path sums") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t r = 1 + trial % 3;
    const std::size_t d = 1 + trial % 2;
    const std::size_t n = 1 + trial % 7;
    const HmmParams p = oracle::random_params(gen, r, d);
    const auto y = oracle::random_series(gen, p, n);
    const double expect = oracle::path_sum_loglik(p, y);
    CHECK(thmm::log_likelihood(p, y) == doctest::Approx(expect).epsilon(1e-10));
    CHECK(thmm::forward_backward(p, y).loglik == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("one state factorizes over observations") {
  std::mt19937_64 gen(3);
  HmmParams p = oracle::random_params(gen, 1, 2);
  const auto y = oracle::random_series(gen, p, 50);
  double expect = 0.0;
  for (double v : y) expect += std::log(oracle::mixture_pdf(p.noise, v - p.support[0]));
  CHECK(thmm::log_likelihood(p, y) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("duplicating a state leaves the likelihood unchanged") {
  std::mt19937_64 gen(5);
  const HmmParams p = oracle::random_params(gen, 2, 1);
  const auto y = oracle::random_series(gen, p, 40);
  // Split state 1 into two copies at the same location; a tiny offset keeps
  // the support strictly increasing without changing the answer materially.
  HmmParams lifted;
  lifted.support = {p.support[0], p.support[1], p.support[1] + 1e-12};
  lifted.noise = p.noise;
  lifted.transition.resize(3, 3);
  for (int i = 0; i < 3; ++i) {
    const int src = i == 0 ? 0 : 1;
    lifted.transition(i, 0) = p.transition(src, 0);
    lifted.transition(i, 1) = 0.5 * p.transition(src, 1);
    lifted.transition(i, 2) = 0.5 * p.transition(src, 1);
  }
  CHECK(thmm::log_likelihood(lifted, y) == doctest::Approx(thmm::log_likelihood(p, y)).epsilon(1e-9));
}

TEST_CASE("posteriors agree with enumeration and are normalized") {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t r = 2 + trial % 2;
    const HmmParams p = oracle::random_params(gen, r, 2);
    const auto y = oracle::random_series(gen, p, 6);
    const auto post = thmm::forward_backward(p, y, true);
    const Eigen::MatrixXd expect = oracle::path_sum_posteriors(p, y);
    CHECK((post.state - expect).cwiseAbs().maxCoeff() < 1e-10);
    for (Eigen::Index k = 0; k < post.state.rows(); ++k) {
      CHECK(post.state.row(k).sum() == doctest::Approx(1.0).epsilon(1e-13));
    }
    REQUIRE(post.pairwise.size() == y.size() - 1);
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
    for (std::size_t k = 0; k + 1 < y.size(); ++k) {
      const auto& xi = post.pairwise[k];
      total += xi;
      // Marginals of the pairwise law are the single-time posteriors.
      CHECK((xi.rowwise().sum().transpose() - post.state.row(static_cast<Eigen::Index>(k))).cwiseAbs().maxCoeff() <
            1e-12);
      CHECK((xi.colwise().sum() - post.state.row(static_cast<Eigen::Index>(k + 1))).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK((total - post.pairwise_sum).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("noiseless alternation concentrates the posteriors") {
  HmmParams p;
  p.support = {-1.0, 1.0};
  p.transition.resize(2, 2);
  p.transition << 0.05, 0.95, 0.95, 0.05;
  p.noise = thmm::GaussianMixture::single(0.05);
  std::vector<double> y;
  for (int k = 0; k < 30; ++k) y.push_back(k % 2 == 0 ? -1.0 : 1.0);
  const auto post = thmm::forward_backward(p, y, false);
  for (int k = 0; k < 30; ++k) CHECK(post.state(k, k % 2) > 1.0 - 1e-12);
}

TEST_CASE("EM never decreases the likelihood") {
  std::mt19937_64 gen(23);
  for (bool update : {false, true}) {
    const HmmParams truth = oracle::random_params(gen, 3, 2);
    const auto y = oracle::random_series(gen, truth, 800);
    EmConfig cfg;
    cfg.update_support = update;
    HmmParams p = thmm::initial_params(y, 3, 2, 9, cfg);
    double prev = thmm::log_likelihood(p, y);
    for (int it = 0; it < 40; ++it) {
      p = thmm::em_step(p, y, cfg);
      const double cur = thmm::log_likelihood(p, y);
      CHECK(cur >= prev - 1e-8 * std::abs(prev));
      prev = cur;
      CHECK_NOTHROW(p.validate(cfg.transition_floor(3), cfg.s_floor));
      CHECK(std::abs(p.noise.center()) < 1e-12);
    }
  }
}

TEST_CASE("translation moves support and noise in opposite directions") {
  std::mt19937_64 gen(29);
  for (int trial = 0; trial < 30; ++trial) {
    const HmmParams p = oracle::random_params(gen, 1 + trial % 3, 1 + trial % 2);
    const auto y = oracle::random_series(gen, p, 200);
    const double m = 2.0 * (std::uniform_real_distribution<double>(0.0, 1.0)(gen) - 0.5);
    const double a = thmm::log_likelihood(p, y);
    const double b = thmm::log_likelihood(p.translated(m), y);
    CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));

    const auto law = thmm::pair_law(p);
    const auto moved = thmm::pair_law(p.translated(m));
    REQUIRE(law.points.size() == moved.points.size());
    for (std::size_t i = 0; i < law.points.size(); ++i) {
      CHECK(moved.points[i][0] == p.support[i / p.states()] + m);
      CHECK(moved.points[i][1] == p.support[i % p.states()] + m);
      CHECK(moved.weights[i] == law.weights[i]);
    }
  }
}

TEST_CASE("stationary distribution") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = oracle::random_params(gen, 2 + trial % 5, 1);
    const Eigen::VectorXd mu = thmm::stationary_distribution(p.transition);
    CHECK((p.transition.transpose() * mu - mu).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(mu.sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK((mu - oracle::stationary(p.transition)).cwiseAbs().maxCoeff() < 1e-12);
  }
  Eigen::MatrixXd periodic(2, 2);
  periodic << 0.0, 1.0, 1.0, 0.0;
  const Eigen::VectorXd mu = thmm::stationary_distribution(periodic);
  CHECK(mu[0] == doctest::Approx(0.5));

  Eigen::MatrixXd reducible = Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(thmm::stationary_distribution(reducible), thmm::NumericalFailure);
}

TEST_CASE("fit_mle recovers a two-state chain") {
  HmmParams truth;
  truth.support = {-0.5, 0.5};
  truth.transition.resize(2, 2);
  truth.transition << 0.9, 0.1, 0.2, 0.8;
  truth.noise = thmm::GaussianMixture::single(0.05);
  std::mt19937_64 gen(37);
  const auto y = oracle::random_series(gen, truth, 20000);

  EmConfig cfg;
  cfg.update_support = true;
  cfg.n_starts = 2;
  cfg.seed = 4;
  const auto fit = thmm::fit_mle(y, 2, 1, cfg, {});
  CHECK(fit.n == y.size());
  CHECK(fit.params.noise.means[0] == 0.0);
  for (int z = 0; z < 2; ++z) CHECK(std::abs(fit.params.support[static_cast<std::size_t>(z)] - truth.support[static_cast<std::size_t>(z)]) < 0.02);
  CHECK((fit.params.transition - truth.transition).cwiseAbs().maxCoeff() < 0.05);
  CHECK(fit.params.noise.stds[0] == doctest::Approx(0.05).epsilon(0.1));
  CHECK(fit.loglik >= thmm::log_likelihood(truth, y) - 1.0);

  const auto again = thmm::fit_mle(y, 2, 1, cfg, {});
  CHECK(again.loglik == fit.loglik);
  CHECK(again.params.support == fit.params.support);
}

TEST_CASE("fit_mle rejects bad input") {
  const std::vector<double> y{0.1, 0.2};
  CHECK_THROWS_AS(thmm::fit_mle(y, 0, 1, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(thmm::fit_mle(std::vector<double>{}, 2, 1, {}, {}), std::invalid_argument);
  std::mt19937_64 gen(1);
  const std::vector<double> bad{0.1, NAN};
  CHECK_THROWS_AS(thmm::log_likelihood(oracle::random_params(gen, 2, 1), bad), std::invalid_argument);
}
