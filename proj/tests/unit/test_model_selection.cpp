#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#if THMM_HAVE_BOOST_MP
#include <boost/multiprecision/cpp_dec_float.hpp>
#endif

#include "oracles.hpp"
#include "thmm/model_selection.hpp"

using thmm::PenaltyForm;
using thmm::PenaltySpec;

namespace {

std::vector<double> three_state_series(std::size_t n, std::uint64_t seed) {
  thmm::HmmParams p;
  p.support = {-0.6, 0.0, 0.6};
  p.transition.resize(3, 3);
  p.transition << 0.8, 0.1, 0.1, 0.1, 0.8, 0.1, 0.1, 0.1, 0.8;
  p.noise = thmm::GaussianMixture::single(0.1);
  std::mt19937_64 gen(seed);
  return thmm::oracle::random_series(gen, p, n);
}

}  // namespace

TEST_CASE("simple penalty at a small n") {
  const double expect = 2.0 * std::pow(std::log(16.0), 15) / 16.0;
  CHECK(thmm::penalty(16, 1, 1, 1, {}) == doctest::Approx(expect).epsilon(1e-14));
  CHECK_THROWS_AS(thmm::penalty(2, 1, 1, 1, {}), std::invalid_argument);
}

TEST_CASE("penalties grow with r and D") {
  for (auto form : {PenaltyForm::Simple, PenaltyForm::LogLog, PenaltyForm::SlopeHeuristic}) {
    const PenaltySpec spec{form, 0.5};
    for (std::size_t r = 1; r < 6; ++r) {
      for (std::size_t d = 1; d < 4; ++d) {
        const double base = thmm::penalty(10000, r, d, thmm::mixture_dimension(d), spec);
        CHECK(base > 0.0);
        CHECK(thmm::penalty(10000, r + 1, d, thmm::mixture_dimension(d), spec) > base);
        CHECK(thmm::penalty(10000, r, d + 1, thmm::mixture_dimension(d + 1), spec) > base);
      }
    }
  }
}

#if THMM_HAVE_BOOST_MP
TEST_CASE("penalties against 50-digit arithmetic") {
  using Big = boost::multiprecision::cpp_dec_float_50;
  const Big n = 100000;
  const Big logn = log(n);
  const Big simple = Big(2 + 100) * pow(logn, 15) / n;
  CHECK(thmm::penalty(100000, 10, 2, thmm::mixture_dimension(2), {}) ==
        doctest::Approx(simple.convert_to<double>()).epsilon(1e-13));

  const Big c = Big("1e-13");
  const Big appendix = c * Big(4 + 10 + 100 - 1) * pow(logn, 14) * log(logn) / n;
  const PenaltySpec spec{PenaltyForm::LogLog, 1e-13};
  CHECK(thmm::penalty(100000, 10, 2, thmm::mixture_dimension(2), spec) ==
        doctest::Approx(appendix.convert_to<double>()).epsilon(1e-13));
}
#endif

TEST_CASE("penalty form names") {
  for (auto form : {PenaltyForm::Simple, PenaltyForm::LogLog, PenaltyForm::SlopeHeuristic}) {
    CHECK(thmm::parse_penalty_form(thmm::to_string(form)) == form);
  }
  CHECK_THROWS_AS(thmm::parse_penalty_form("bic"), std::invalid_argument);
}

TEST_CASE("selection picks the true number of states") {
  const auto y = three_state_series(3000, 1);
  thmm::EmConfig em;
  em.n_starts = 1;
  em.max_iters = 100;
  const std::vector<std::size_t> rs{1, 3, 9}, ds{1};
  const auto res = thmm::select_model(y, rs, ds, em, {PenaltyForm::LogLog, thmm::kCalibratedLogLogConstant});
  CHECK(res.best.params.states() == 3);
  REQUIRE(res.table.size() == 3);
  CHECK(res.table[0].fitted);
  CHECK(res.table[2].skipped);
  CHECK(res.warnings.size() == 1);
  CHECK(res.table[1].penalized > res.table[0].penalized);
  CHECK(res.best.penalized == res.table[1].penalized);
}

TEST_CASE("single candidate and empty outcomes") {
  const auto y = three_state_series(600, 2);
  thmm::EmConfig em;
  em.n_starts = 1;
  em.max_iters = 20;
  const std::vector<std::size_t> one{2}, d{1};
  CHECK(thmm::select_model(y, one, d, em, {}).best.params.states() == 2);

  const std::vector<std::size_t> too_big{50};
  CHECK_THROWS_AS(thmm::select_model(y, too_big, d, em, {}), std::runtime_error);
  CHECK_THROWS_AS(thmm::select_model(y, std::vector<std::size_t>{}, d, em, {}), std::invalid_argument);
}

TEST_CASE("slope heuristic fits a positive constant") {
  const auto y = three_state_series(2000, 3);
  thmm::EmConfig em;
  em.n_starts = 1;
  em.max_iters = 50;
  const std::vector<std::size_t> rs{1, 2, 3, 4, 5}, ds{1};
  const auto res = thmm::select_model(y, rs, ds, em, {PenaltyForm::SlopeHeuristic, 0.0});
  CHECK(res.penalty.constant > 0.0);
  for (const auto& row : res.table) CHECK(row.fitted);
}
