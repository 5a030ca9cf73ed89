#include "skillspace/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace skillspace::stats {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 200000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw StatsError("DidNotConverge", "incomplete beta continued fraction");
}

MatrixXd to_eigen(const Matrix<double>& X) {
  MatrixXd m(X.rows(), X.cols());
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t j = 0; j < X.cols(); ++j) m(i, j) = X(i, j);
  return m;
}

std::string column_name(std::span<const std::string> names, std::size_t j) {
  return j < names.size() ? names[j] : fmt::format("x{}", j);
}

// Upper-triangular R from a Householder QR, checked for rank deficiency.
struct QrSolve {
  Eigen::HouseholderQR<MatrixXd> qr;
  MatrixXd r;

  QrSolve(const MatrixXd& a, std::span<const std::string> names) : qr(a) {
    const auto k = a.cols();
    r = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < k; ++j) {
      const double col_norm = a.col(j).norm();
      if (col_norm == 0.0 || std::fabs(r(j, j)) <= 1e-10 * col_norm) {
        throw StatsError("RankDeficient",
                         "column '" + column_name(names, static_cast<std::size_t>(j)) +
                             "' is linearly dependent on earlier columns");
      }
    }
  }

  VectorXd solve(const VectorXd& rhs) const { return qr.solve(rhs); }

  // Diagonal of (R^T R)^{-1} = squared row norms of R^{-1}.
  VectorXd inverse_gram_diagonal() const {
    const auto k = r.cols();
    MatrixXd rinv = r.triangularView<Eigen::Upper>().solve(MatrixXd::Identity(k, k));
    return rinv.rowwise().squaredNorm();
  }
};

bool has_constant_column(const MatrixXd& X) {
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double first = X(0, j);
    if (first != 0.0 && (X.col(j).array() == first).all()) return true;
  }
  return false;
}

void check_shape(const Matrix<double>& X, std::span<const double> y,
                 std::span<const std::string> names) {
  if (X.rows() != y.size()) {
    throw StatsError("DimensionMismatch",
                     fmt::format("design has {} rows but response has {}", X.rows(),
                                 y.size()));
  }
  if (!names.empty() && names.size() != X.cols()) {
    throw StatsError("DimensionMismatch", "one name per design column required");
  }
  if (X.cols() == 0 || X.rows() <= X.cols()) {
    throw StatsError("TooFewSamples",
                     fmt::format("need more rows than columns (n={}, k={})", X.rows(),
                                 X.cols()));
  }
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

// ---------------------------------------------------------------------------
// Distributions

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw StatsError("BadArgument", "beta parameters must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  const double p = incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
  return std::clamp(p, 0.0, 1.0);
}

double student_t_cdf(double t, double df) {
  const double tail = 0.5 * student_t_two_sided_p(t, df);
  return t >= 0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) throw StatsError("BadArgument", "quantile needs 0 < p < 1");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -student_t_quantile(1.0 - p, df);
  double lo = 0.0;
  double hi = 1.0;
  while (student_t_cdf(hi, df) < p) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (student_t_cdf(mid, df) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_two_sided_p(double z) { return std::erfc(std::fabs(z) / std::numbers::sqrt2); }

// ---------------------------------------------------------------------------
// t-tests

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

TTestResult paired_t_test(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw StatsError("DimensionMismatch", "paired samples differ in length");
  }
  if (x.size() < 2) throw StatsError("TooFewSamples", "paired t-test needs n >= 2");
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
  const double n = static_cast<double>(d.size());
  const double var = sample_variance(d);
  if (!(var > 0.0)) throw StatsError("ZeroVariance", "differences have zero variance");

  TTestResult r;
  r.n_x = r.n_y = d.size();
  r.mean_diff = mean(d);
  const double se = std::sqrt(var / n);
  r.df = n - 1.0;
  r.t_stat = r.mean_diff / se;
  r.p_value = student_t_two_sided_p(r.t_stat, r.df);
  const double q = student_t_quantile(0.975, r.df);
  r.ci_low = r.mean_diff - q * se;
  r.ci_high = r.mean_diff + q * se;
  return r;
}

TTestResult welch_t_test(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || y.size() < 2) {
    throw StatsError("TooFewSamples", "Welch t-test needs at least 2 values per sample");
  }
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  const double vx = sample_variance(x);
  const double vy = sample_variance(y);
  if (!(vx > 0.0) || !(vy > 0.0)) {
    throw StatsError("ZeroVariance", "a sample has zero variance");
  }
  const double ax = vx / nx;
  const double ay = vy / ny;
  const double se = std::sqrt(ax + ay);

  TTestResult r;
  r.n_x = x.size();
  r.n_y = y.size();
  r.mean_diff = mean(x) - mean(y);
  r.t_stat = r.mean_diff / se;
  r.df = (ax + ay) * (ax + ay) / (ax * ax / (nx - 1.0) + ay * ay / (ny - 1.0));
  r.p_value = student_t_two_sided_p(r.t_stat, r.df);
  const double q = student_t_quantile(0.975, r.df);
  r.ci_low = r.mean_diff - q * se;
  r.ci_high = r.mean_diff + q * se;
  return r;
}

// ---------------------------------------------------------------------------
// Regression

const Coefficient& RegressionResult::at(std::string_view name) const {
  for (const auto& c : coefficients)
    if (c.name == name) return c;
  throw StatsError("UnknownPredictor", "no coefficient named '" + std::string(name) + "'");
}

Table RegressionResult::to_table() const {
  std::vector<std::string> header{"predictor", "estimate", "std_error", "statistic",
                                  "p_value"};
  if (!vif.empty()) header.push_back("vif");
  Table t(header);
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    const auto& c = coefficients[i];
    std::vector<std::string> row{c.name, format_double(c.estimate),
                                 format_double(c.std_error), format_double(c.statistic),
                                 format_double(c.p_value)};
    if (!vif.empty()) row.push_back(std::isnan(vif[i]) ? "" : format_double(vif[i]));
    t.add_row(std::move(row));
  }
  return t;
}

std::string RegressionResult::to_text() const {
  std::vector<std::string> header{"Predictor", "Coefficient +/- Std. Error", "p-Value"};
  if (!vif.empty()) header.push_back("VIF");
  Table t(header);
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    const auto& c = coefficients[i];
    std::vector<std::string> row{
        c.name, fmt::format("{:.3f} +/- {:.3f}", c.estimate, c.std_error),
        c.p_value < 2e-16 ? std::string("< 2e-16") : fmt::format("{:.3g}", c.p_value)};
    if (!vif.empty()) row.push_back(std::isnan(vif[i]) ? "" : fmt::format("{:.2f}", vif[i]));
    t.add_row(std::move(row));
  }
  std::string out = t.to_text();
  if (!std::isnan(r_squared)) {
    out += fmt::format("n = {}, R^2 = {:.4f}, adjusted R^2 = {:.4f}\n", n, r_squared,
                       adj_r_squared);
  }
  if (!std::isnan(deviance)) {
    out += fmt::format("n = {}, deviance = {:.4f}, null deviance = {:.4f}, iterations = {}\n",
                       n, deviance, null_deviance, iterations);
  }
  return out;
}

RegressionResult ols(const Matrix<double>& Xm, std::span<const double> yv,
                     std::span<const std::string> names) {
  check_shape(Xm, yv, names);
  const MatrixXd X = to_eigen(Xm);
  const VectorXd y = Eigen::Map<const VectorXd>(yv.data(), static_cast<Eigen::Index>(yv.size()));
  const QrSolve qr(X, names);

  const VectorXd beta = qr.solve(y);
  const VectorXd resid = y - X * beta;
  const double n = static_cast<double>(X.rows());
  const double k = static_cast<double>(X.cols());
  const double rss = resid.squaredNorm();
  const double sigma2 = rss / (n - k);
  const VectorXd diag = qr.inverse_gram_diagonal();

  RegressionResult r;
  r.n = Xm.rows();
  r.df_residual = n - k;
  r.sigma = std::sqrt(sigma2);
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    Coefficient c;
    c.name = column_name(names, static_cast<std::size_t>(j));
    c.estimate = beta(j);
    c.std_error = std::sqrt(sigma2 * diag(j));
    if (c.std_error > 0.0) {
      c.statistic = c.estimate / c.std_error;
      c.p_value = student_t_two_sided_p(c.statistic, n - k);
    } else {
      c.statistic = c.estimate == 0.0 ? 0.0 : std::copysign(INFINITY, c.estimate);
      c.p_value = c.estimate == 0.0 ? 1.0 : 0.0;
    }
    r.coefficients.push_back(std::move(c));
  }

  // A constant in the column space (explicit, or implied by a full set of
  // indicators) makes the centered total sum of squares the right baseline.
  bool centered = has_constant_column(X);
  if (!centered) {
    const VectorXd ones = VectorXd::Ones(X.rows());
    centered = (ones - X * qr.solve(ones)).norm() <= 1e-8 * std::sqrt(n);
  }
  const double tss = centered ? (y.array() - y.mean()).square().sum() : y.squaredNorm();
  r.r_squared = tss > 0.0 ? 1.0 - rss / tss : 1.0;
  const double df_model_adj = centered ? n - 1.0 : n;
  r.adj_r_squared = 1.0 - (1.0 - r.r_squared) * df_model_adj / (n - k);
  return r;
}

RegressionResult logistic_regression(const Matrix<double>& Xm, std::span<const double> yv,
                                     std::span<const std::string> names,
                                     const LogisticOptions& opt) {
  check_shape(Xm, yv, names);
  std::size_t ones = 0;
  for (double v : yv) {
    if (v != 0.0 && v != 1.0) throw StatsError("BadResponse", "response must be 0 or 1");
    ones += v == 1.0;
  }
  if (ones == 0 || ones == yv.size()) {
    throw StatsError("SingleClass", "response contains only one class");
  }

  const MatrixXd X = to_eigen(Xm);
  const VectorXd y = Eigen::Map<const VectorXd>(yv.data(), static_cast<Eigen::Index>(yv.size()));
  const auto n = X.rows();
  const auto k = X.cols();
  // Rank check on the unweighted design.
  { QrSolve check(X, names); }

  VectorXd sd(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double m = X.col(j).mean();
    sd(j) = std::sqrt((X.col(j).array() - m).square().sum() / static_cast<double>(n - 1));
  }

  auto loglik = [&](const VectorXd& eta) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) ll += y(i) * eta(i) - softplus(eta(i));
    return ll;
  };

  VectorXd beta = VectorXd::Zero(k);
  VectorXd eta = VectorXd::Zero(n);
  double ll = loglik(eta);
  std::string trace;
  bool converged = false;
  int iter = 0;
  VectorXd w(n);
  while (iter < opt.max_iterations) {
    ++iter;
    VectorXd sqrt_w(n);
    VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mu = logistic(eta(i));
      w(i) = std::max(mu * (1.0 - mu), 1e-300);
      sqrt_w(i) = std::sqrt(w(i));
      rhs(i) = (y(i) - mu) / sqrt_w(i);
    }
    const MatrixXd wx = sqrt_w.asDiagonal() * X;
    Eigen::HouseholderQR<MatrixXd> qr(wx);
    VectorXd step = qr.solve(rhs);

    VectorXd candidate = beta + step;
    VectorXd cand_eta = X * candidate;
    double cand_ll = loglik(cand_eta);
    for (int half = 0; half < 30 && cand_ll < ll - 1e-12 * std::fabs(ll); ++half) {
      step *= 0.5;
      candidate = beta + step;
      cand_eta = X * candidate;
      cand_ll = loglik(cand_eta);
    }
    const double delta = step.cwiseAbs().maxCoeff();
    beta = candidate;
    eta = cand_eta;
    ll = cand_ll;
    trace += fmt::format("iter {}: loglik {:.10g}, max|delta| {:.3g}\n", iter, ll, delta);

    for (Eigen::Index j = 0; j < k; ++j) {
      if (sd(j) > 0.0 && std::fabs(beta(j) * sd(j)) > opt.separation_bound) {
        throw StatsError("SeparationDetected",
                         fmt::format("coefficient of '{}' diverges ({:.3g} per sd); the "
                                     "classes are (quasi-)separated",
                                     column_name(names, static_cast<std::size_t>(j)),
                                     beta(j) * sd(j)));
      }
    }
    if (delta < opt.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw StatsError("DidNotConverge",
                     fmt::format("IRLS did not converge in {} iterations\n{}", iter, trace));
  }

  VectorXd sqrt_w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = logistic(eta(i));
    sqrt_w(i) = std::sqrt(std::max(mu * (1.0 - mu), 1e-300));
  }
  const QrSolve info(sqrt_w.asDiagonal() * X, names);
  const VectorXd diag = info.inverse_gram_diagonal();

  RegressionResult r;
  r.n = static_cast<std::size_t>(n);
  r.df_residual = static_cast<double>(n - k);
  r.iterations = iter;
  r.log_likelihood = ll;
  r.deviance = -2.0 * ll;
  const double ybar = static_cast<double>(ones) / static_cast<double>(n);
  r.null_deviance = -2.0 * static_cast<double>(n) *
                    (ybar * std::log(ybar) + (1.0 - ybar) * std::log1p(-ybar));
  for (Eigen::Index j = 0; j < k; ++j) {
    Coefficient c;
    c.name = column_name(names, static_cast<std::size_t>(j));
    c.estimate = beta(j);
    c.std_error = std::sqrt(diag(j));
    c.statistic = c.estimate / c.std_error;
    c.p_value = normal_two_sided_p(c.statistic);
    r.coefficients.push_back(std::move(c));
  }
  return r;
}

std::vector<double> vif(const Matrix<double>& Xm, std::span<const std::string> names) {
  const auto k = Xm.cols();
  if (k < 2) throw StatsError("TooFewColumns", "VIF needs at least two predictors");
  if (Xm.rows() <= k) throw StatsError("TooFewSamples", "VIF needs n > k");
  const MatrixXd X = to_eigen(Xm);
  const auto n = X.rows();
  std::vector<double> out(k);
  for (std::size_t j = 0; j < k; ++j) {
    MatrixXd others(n, static_cast<Eigen::Index>(k));
    std::vector<std::string> other_names{"(Intercept)"};
    others.col(0).setOnes();
    Eigen::Index c = 1;
    for (std::size_t m = 0; m < k; ++m) {
      if (m == j) continue;
      others.col(c++) = X.col(static_cast<Eigen::Index>(m));
      other_names.push_back(column_name(names, m));
    }
    const QrSolve qr(others, other_names);
    const VectorXd target = X.col(static_cast<Eigen::Index>(j));
    const VectorXd resid = target - others * qr.solve(target);
    const double tss = (target.array() - target.mean()).square().sum();
    if (tss == 0.0) {
      throw StatsError("RankDeficient",
                       "column '" + column_name(names, j) + "' is constant");
    }
    const double r2 = 1.0 - resid.squaredNorm() / tss;
    if (r2 >= 1.0 - 1e-12) {
      throw StatsError("RankDeficient", "column '" + column_name(names, j) +
                                            "' is a linear combination of the others");
    }
    out[j] = 1.0 / (1.0 - r2);
  }
  return out;
}

Matrix<double> design_from_columns(std::span<const std::vector<double>> columns) {
  if (columns.empty()) return {};
  const std::size_t n = columns.front().size();
  Matrix<double> X(n, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != n) throw StatsError("DimensionMismatch", "ragged columns");
    for (std::size_t i = 0; i < n; ++i) X(i, j) = columns[j][i];
  }
  return X;
}

bool is_constant_column(const Matrix<double>& X, std::size_t col) {
  for (std::size_t i = 1; i < X.rows(); ++i)
    if (X(i, col) != X(0, col)) return false;
  return true;
}

}  // namespace skillspace::stats
