// SPDX-License-Identifier: MIT
#include "semiboost/report.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace semiboost {

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& rows) {
  const std::size_t k = rows.size();
  if (k < 2) throw std::invalid_argument("slope fit needs at least two rows");
  std::vector<double> x(k), y(k);
  for (std::size_t j = 0; j < k; ++j) {
    if (!(rows[j].first > 0.0) || !(rows[j].second > 0.0))
      throw std::invalid_argument("slope fit needs positive step counts and errors");
    x[j] = std::log(rows[j].first);
    y[j] = std::log(rows[j].second);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    mx += x[j];
    my += y[j];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    sxx += (x[j] - mx) * (x[j] - mx);
    sxy += (x[j] - mx) * (y[j] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("slope fit needs at least two distinct n");
  const double coef = sxy / sxx;

  SlopeFit fit;
  fit.slope = -coef;
  if (k >= 3) {
    double ssr = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double r = y[j] - my - coef * (x[j] - mx);
      ssr += r * r;
    }
    fit.ci = std::sqrt(ssr / static_cast<double>(k - 2) / sxx);
  }
  return fit;
}

void finalize_report(ConvergenceReport& report) {
  std::sort(report.rows.begin(), report.rows.end(),
            [](const StudyRow& a, const StudyRow& b) { return a.n < b.n; });
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : report.rows)
    if (r.usable && r.abs_error > 0.0)
      pts.push_back({static_cast<double>(r.n), r.abs_error});
  if (pts.size() >= 2) {
    const SlopeFit fit = fit_slope(pts);
    report.slope = fit.slope;
    report.slope_ci = fit.ci;
    report.noise_dominated = false;
  } else {
    report.slope = std::numeric_limits<double>::quiet_NaN();
    report.slope_ci = std::numeric_limits<double>::quiet_NaN();
    report.noise_dominated = true;
  }
}

}  // namespace semiboost
