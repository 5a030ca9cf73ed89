#include <cmath>
#include <numbers>

#include "doctest.h"
#include "skillspace/rng.hpp"
#include "skillspace/stats.hpp"
#include "stats_reference.hpp"

using namespace skillspace;
using namespace skillspace::stats;

namespace {

std::string kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return "";
}

}  // namespace

TEST_CASE("reference values from scipy and statsmodels") {
  const auto r = testing::check_stats_reference(1e-6);
  for (const auto& f : r.failures) INFO(f);
  CHECK(r.failures.empty());
  CHECK(r.checked > 150);
  MESSAGE("worst absolute error " << r.worst);
}

TEST_CASE("incomplete beta closed forms and symmetry") {
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const double x = rng.uniform(0.001, 0.999);
    const double a = rng.uniform(0.1, 40.0), b = rng.uniform(0.1, 40.0);
    CHECK(incomplete_beta(1, 1, x) == doctest::Approx(x).epsilon(1e-13));
    CHECK(incomplete_beta(a, 1, x) == doctest::Approx(std::pow(x, a)).epsilon(1e-11));
    CHECK(incomplete_beta(1, b, x) == doctest::Approx(1 - std::pow(1 - x, b)).epsilon(1e-11));
    CHECK(incomplete_beta(a, b, x) + incomplete_beta(b, a, 1 - x) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(incomplete_beta(2, 3, 0.0) == 0.0);
  CHECK(incomplete_beta(2, 3, 1.0) == 1.0);
  CHECK(kind_of([] { incomplete_beta(0, 1, 0.5); }) == "BadArgument");
}

TEST_CASE("student t closed forms") {
  for (double t : {-50.0, -3.0, -0.4, 0.0, 0.7, 2.5, 12.0}) {
    CHECK(student_t_cdf(t, 1) == doctest::Approx(0.5 + std::atan(t) / std::numbers::pi));
    CHECK(student_t_cdf(t, 2) == doctest::Approx(0.5 + t / (2 * std::sqrt(2 + t * t))));
    CHECK(student_t_cdf(t, 1e7) == doctest::Approx(normal_cdf(t)).epsilon(1e-6));
    CHECK(student_t_two_sided_p(t, 7) ==
          doctest::Approx(2 * student_t_cdf(-std::abs(t), 7)).epsilon(1e-12));
  }
  CHECK(normal_two_sided_p(1.959963984540054) == doctest::Approx(0.05));
}

TEST_CASE("quantile inverts the cdf") {
  for (double df : {1.0, 2.5, 7.0, 30.0, 1000.0})
    for (double p : {1e-6, 0.01, 0.2, 0.5, 0.8, 0.975, 1 - 1e-6}) {
      INFO("df=", df, " p=", p);
      CHECK(student_t_cdf(student_t_quantile(p, df), df) == doctest::Approx(p).epsilon(1e-10));
    }
  CHECK(kind_of([] { student_t_quantile(1.0, 3); }) == "BadArgument");
}

TEST_CASE("t-test invariants") {
  Rng rng(4);
  std::vector<double> x(40), y(40);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal(1.0, 2.0);
    y[i] = rng.normal(0.0, 1.0);
  }
  const auto p = paired_t_test(x, y);
  const auto q = paired_t_test(y, x);
  CHECK(p.t_stat == doctest::Approx(-q.t_stat));
  CHECK(p.p_value == doctest::Approx(q.p_value));
  CHECK(p.df == 39);
  CHECK(p.ci_low < p.mean_diff);
  CHECK(p.mean_diff < p.ci_high);

  const auto w = welch_t_test(x, y);
  CHECK(w.n_x == 40);
  CHECK(w.df > 39);
  CHECK(w.df < 78);
  // the interval excludes zero exactly when p < 0.05
  CHECK((w.ci_low > 0 || w.ci_high < 0) == (w.p_value < 0.05));

  const std::vector<double> one = {1}, two = {1, 1}, three = {1, 2, 3};
  CHECK(kind_of([&] { paired_t_test(one, one); }) == "TooFewSamples");
  CHECK(kind_of([&] { paired_t_test(two, three); }) == "DimensionMismatch");
  CHECK(kind_of([&] { paired_t_test(three, three); }) == "ZeroVariance");
  CHECK(kind_of([&] { welch_t_test(two, three); }) == "ZeroVariance");
  CHECK(kind_of([&] { welch_t_test(one, three); }) == "TooFewSamples");
}

TEST_CASE("ols recovers an exact linear model") {
  Rng rng(7);
  const std::size_t n = 60;
  Matrix<double> X(n, 3);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = rng.normal();
    X(i, 2) = rng.normal();
    y[i] = 2.0 - 3.0 * X(i, 1) + 0.5 * X(i, 2) + rng.normal(0.0, 1e-3);
  }
  const std::vector<std::string> names = {"(Intercept)", "a", "b"};
  const auto r = ols(X, y, names);
  CHECK(r.at("(Intercept)").estimate == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(r.at("a").estimate == doctest::Approx(-3.0).epsilon(1e-3));
  CHECK(r.at("b").estimate == doctest::Approx(0.5).epsilon(1e-2));
  CHECK(r.r_squared > 0.999);
  CHECK(r.df_residual == 57);
  CHECK(r.n == n);
  CHECK(r.to_table().rows().size() == 3);
  CHECK(kind_of([&] { r.at("c"); }) == "UnknownPredictor");

  Matrix<double> dup(n, 3);
  for (std::size_t i = 0; i < n; ++i) {
    dup(i, 0) = 1.0;
    dup(i, 1) = X(i, 1);
    dup(i, 2) = 2 * X(i, 1) - 1;
  }
  try {
    ols(dup, y, names);
    FAIL("expected RankDeficient");
  } catch (const StatsError& e) {
    CHECK(e.kind() == "RankDeficient");
    CHECK(std::string(e.what()).find("'b'") != std::string::npos);
  }
  Matrix<double> wide(3, 3, 1.0);
  const std::vector<double> y3 = {1, 2, 3};
  CHECK(kind_of([&] { ols(wide, y3, names); }) == "TooFewSamples");
}

TEST_CASE("logistic regression") {
  Rng rng(10);
  const std::size_t n = 4000;
  Matrix<double> X(n, 2);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = rng.normal();
    const double p = 1.0 / (1.0 + std::exp(-(-0.5 + 1.2 * X(i, 1))));
    y[i] = rng.uniform01() < p ? 1.0 : 0.0;
  }
  const std::vector<std::string> names = {"(Intercept)", "x"};
  const auto r = logistic_regression(X, y, names);
  const auto& b = r.at("x");
  CHECK(std::abs(b.estimate - 1.2) < 3 * b.std_error);
  CHECK(std::abs(r.at("(Intercept)").estimate + 0.5) < 3 * r.at("(Intercept)").std_error);
  CHECK(r.deviance < r.null_deviance);
  CHECK(r.deviance == doctest::Approx(-2 * r.log_likelihood));

  std::vector<double> flat(n, 1.0);
  CHECK(kind_of([&] { logistic_regression(X, flat, names); }) == "SingleClass");
  auto bad = y;
  bad[0] = 2.0;
  CHECK(kind_of([&] { logistic_regression(X, bad, names); }) == "BadResponse");
  std::vector<double> separated(n);
  for (std::size_t i = 0; i < n; ++i) separated[i] = X(i, 1) > 0 ? 1.0 : 0.0;
  CHECK(kind_of([&] { logistic_regression(X, separated, names); }) == "SeparationDetected");
}

TEST_CASE("vif") {
  Rng rng(12);
  const std::size_t n = 500;
  std::vector<std::vector<double>> cols(3, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    cols[0][i] = rng.normal();
    cols[1][i] = rng.normal();
    cols[2][i] = cols[0][i] + 0.5 * rng.normal();
  }
  const auto X = design_from_columns(cols);
  const std::vector<std::string> names = {"a", "b", "c"};
  const auto v = vif(X, names);
  // c = a + noise(0.5): R^2 of a on c is 1 / 1.25, so VIF = 5
  CHECK(v[0] == doctest::Approx(5.0).epsilon(0.15));
  CHECK(v[1] == doctest::Approx(1.0).epsilon(0.05));
  CHECK(v[2] == doctest::Approx(5.0).epsilon(0.15));

  Matrix<double> one_col(n, 1);
  CHECK(kind_of([&] { vif(one_col, names); }) == "TooFewColumns");
  CHECK(is_constant_column(Matrix<double>(4, 1, 3.0), 0));
  const std::vector<std::vector<double>> ragged = {{1, 2}, {1}};
  CHECK(kind_of([&] { design_from_columns(ragged); }) == "DimensionMismatch");
}
