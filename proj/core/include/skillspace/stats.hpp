#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "skillspace/error.hpp"
#include "skillspace/matrix.hpp"
#include "skillspace/tabular.hpp"

namespace skillspace::stats {

class StatsError : public Error {
 public:
  using Error::Error;
};

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double df);
// P(|T| >= |t|).
double student_t_two_sided_p(double t, double df);
// Inverse CDF for p in (0, 1).
double student_t_quantile(double p, double df);

double normal_cdf(double z);
double normal_two_sided_p(double z);

struct TTestResult {
  double mean_diff = 0.0;
  double ci_low = 0.0;   // 95% two-sided
  double ci_high = 0.0;
  double t_stat = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  std::size_t n_x = 0;
  std::size_t n_y = 0;
};

// Classic paired t on d = x - y.
TTestResult paired_t_test(std::span<const double> x, std::span<const double> y);
// Unequal-variance t with Welch-Satterthwaite degrees of freedom.
TTestResult welch_t_test(std::span<const double> x, std::span<const double> y);

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double statistic = 0.0;  // t (OLS) or z (logistic)
  double p_value = 1.0;
};

struct RegressionResult {
  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  std::vector<Coefficient> coefficients;
  std::size_t n = 0;
  double df_residual = 0.0;
  // OLS
  double r_squared = kNaN;
  double adj_r_squared = kNaN;
  double sigma = kNaN;
  // logistic
  double log_likelihood = kNaN;
  double deviance = kNaN;
  double null_deviance = kNaN;
  int iterations = 0;
  // Filled on request, aligned with coefficients (NaN for the intercept).
  std::vector<double> vif;

  const Coefficient& at(std::string_view name) const;

  // predictor, estimate, std_error, statistic, p_value[, vif]
  Table to_table() const;
  // Predictor | Coefficient +/- Std. Error | p-Value
  std::string to_text() const;
};

// Least squares by Householder QR. Throws StatsError "RankDeficient" naming
// the first column that is (numerically) in the span of the earlier ones,
// or "TooFewSamples" when n <= k. R^2 is centered when a constant lies in the
// column space of the design and uncentered otherwise.
RegressionResult ols(const Matrix<double>& X, std::span<const double> y,
                     std::span<const std::string> names);

struct LogisticOptions {
  int max_iterations = 50;
  double tolerance = 1e-8;          // on max |delta coefficient|
  double separation_bound = 15.0;   // on |coefficient * sd(column)|
};

// Maximum likelihood by IRLS with step halving; Wald standard errors from the
// inverse observed information.
RegressionResult logistic_regression(const Matrix<double>& X, std::span<const double> y,
                                     std::span<const std::string> names,
                                     const LogisticOptions& options = {});

// VIF_j = 1 / (1 - R^2_j), regressing column j on an intercept and the other
// columns. X must not contain an intercept column.
std::vector<double> vif(const Matrix<double>& X, std::span<const std::string> names);

// Column-wise helpers for building designs.
Matrix<double> design_from_columns(std::span<const std::vector<double>> columns);
bool is_constant_column(const Matrix<double>& X, std::size_t col);

double mean(std::span<const double> v);
double sample_variance(std::span<const double> v);

}  // namespace skillspace::stats
