#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <fmt/format.h>
#include "json.hpp"

#include "skillspace/stats.hpp"
#include "support.hpp"

namespace skillspace::testing {

struct ReferenceOutcome {
  std::size_t checked = 0;
  double worst = 0.0;
  std::vector<std::string> failures;
};

// Compares the stats module against fixtures/stats/reference.json (scipy,
// statsmodels and mpmath output) with an absolute tolerance.
inline ReferenceOutcome check_stats_reference(double tol) {
  using nlohmann::json;
  const json ref = json::parse(slurp(fixture("stats/reference.json")));
  ReferenceOutcome out;
  auto cmp = [&](const std::string& what, double got, double want) {
    ++out.checked;
    const double err = std::abs(got - want);
    if (!(err <= tol)) out.failures.push_back(fmt::format("{}: got {} want {}", what, got, want));
    if (err > out.worst || std::isnan(err)) out.worst = err;
  };
  auto matrix = [](const json& rows) {
    Matrix<double> X(rows.size(), rows.at(0).size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < rows[i].size(); ++j) X(i, j) = rows[i][j].get<double>();
    return X;
  };
  auto guarded = [&](const std::string& what, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      out.failures.push_back(what + ": threw " + e.what());
    }
  };

  std::size_t i = 0;
  for (const auto& c : ref["incomplete_beta"]) {
    const auto what = fmt::format("incomplete_beta[{}]", i++);
    guarded(what, [&] {
      cmp(what, stats::incomplete_beta(c["a"], c["b"], c["x"]), c["value"]);
    });
  }
  i = 0;
  for (const auto& c : ref["t_quantile"]) {
    const auto what = fmt::format("t_quantile[{}]", i++);
    guarded(what, [&] { cmp(what, stats::student_t_quantile(c["p"], c["df"]), c["value"]); });
  }
  i = 0;
  for (const auto& c : ref["t_tests"]) {
    const auto what = fmt::format("{}[{}]", c["kind"].get<std::string>(), i++);
    guarded(what, [&] {
      const auto x = c["x"].get<std::vector<double>>();
      const auto y = c["y"].get<std::vector<double>>();
      const auto r = c["kind"] == "paired" ? stats::paired_t_test(x, y) : stats::welch_t_test(x, y);
      cmp(what + ".mean_diff", r.mean_diff, c["mean_diff"]);
      cmp(what + ".t", r.t_stat, c["t"]);
      cmp(what + ".df", r.df, c["df"]);
      cmp(what + ".p", r.p_value, c["p"]);
      cmp(what + ".ci_low", r.ci_low, c["ci_low"]);
      cmp(what + ".ci_high", r.ci_high, c["ci_high"]);
    });
  }
  i = 0;
  for (const auto& c : ref["ols"]) {
    const auto what = fmt::format("ols[{}]", i++);
    guarded(what, [&] {
      const auto names = c["names"].get<std::vector<std::string>>();
      const auto y = c["y"].get<std::vector<double>>();
      const auto r = stats::ols(matrix(c["X"]), y, names);
      for (std::size_t j = 0; j < names.size(); ++j) {
        cmp(what + "." + names[j] + ".estimate", r.coefficients[j].estimate, c["params"][j]);
        cmp(what + "." + names[j] + ".se", r.coefficients[j].std_error, c["bse"][j]);
        cmp(what + "." + names[j] + ".t", r.coefficients[j].statistic, c["tvalues"][j]);
        cmp(what + "." + names[j] + ".p", r.coefficients[j].p_value, c["pvalues"][j]);
      }
      cmp(what + ".r2", r.r_squared, c["rsquared"]);
      cmp(what + ".adj_r2", r.adj_r_squared, c["rsquared_adj"]);
      cmp(what + ".sigma", r.sigma, c["sigma"]);
    });
  }
  i = 0;
  for (const auto& c : ref["logistic"]) {
    const auto what = fmt::format("logistic[{}]", i++);
    guarded(what, [&] {
      const auto names = c["names"].get<std::vector<std::string>>();
      const auto y = c["y"].get<std::vector<double>>();
      const auto r = stats::logistic_regression(matrix(c["X"]), y, names);
      for (std::size_t j = 0; j < names.size(); ++j) {
        cmp(what + "." + names[j] + ".estimate", r.coefficients[j].estimate, c["params"][j]);
        cmp(what + "." + names[j] + ".se", r.coefficients[j].std_error, c["bse"][j]);
        cmp(what + "." + names[j] + ".z", r.coefficients[j].statistic, c["zvalues"][j]);
        cmp(what + "." + names[j] + ".p", r.coefficients[j].p_value, c["pvalues"][j]);
      }
      cmp(what + ".loglik", r.log_likelihood, c["llf"]);
      cmp(what + ".null_deviance", r.null_deviance, -2.0 * c["llnull"].get<double>());
    });
  }
  i = 0;
  for (const auto& c : ref["vif"]) {
    const auto what = fmt::format("vif[{}]", i++);
    guarded(what, [&] {
      const auto names = c["names"].get<std::vector<std::string>>();
      const auto v = stats::vif(matrix(c["X"]), names);
      for (std::size_t j = 0; j < names.size(); ++j)
        cmp(what + "." + names[j], v[j], c["vif"][j]);
    });
  }
  return out;
}

}  // namespace skillspace::testing
