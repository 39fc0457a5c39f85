// Quasi-Poisson regression on calendar covariates, fit by iteratively
// reweighted least squares under a log link.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "heatwarn/date.hpp"

namespace heatwarn {

enum class GlmEncoding { literal, categorical_harmonic };

struct GlmDesignConfig {
  GlmEncoding encoding = GlmEncoding::categorical_harmonic;
  int harmonics = 2;      // annual sin/cos pairs
  double period = 365.25;  // days

  int width() const {
    return encoding == GlmEncoding::literal ? 4 : 8 + 2 * harmonics;
  }
};

// literal:              [1, dow(1..7), doy(0..365), holiday]
// categorical_harmonic: [1, dow dummies Tue..Sun, holiday,
//                        sin/cos(2*pi*k*doy/period) for k=1..harmonics]
inline std::vector<double> build_design(const CalendarDate& date, bool holiday,
                                        const GlmDesignConfig& config) {
  const int dow = day_of_week(date);
  const int doy = day_of_year(date);
  std::vector<double> x;
  x.reserve(config.width());
  x.push_back(1.0);
  if (config.encoding == GlmEncoding::literal) {
    x.push_back(static_cast<double>(dow));
    x.push_back(static_cast<double>(doy));
    x.push_back(holiday ? 1.0 : 0.0);
    return x;
  }
  for (int d = 2; d <= 7; ++d) x.push_back(dow == d ? 1.0 : 0.0);
  x.push_back(holiday ? 1.0 : 0.0);
  for (int k = 1; k <= config.harmonics; ++k) {
    double phase = 2.0 * M_PI * k * doy / config.period;
    x.push_back(std::sin(phase));
    x.push_back(std::cos(phase));
  }
  return x;
}

inline std::vector<double> build_design(const CalendarDate& date,
                                        const HolidayTable& holidays,
                                        const GlmDesignConfig& config) {
  return build_design(date, holidays.contains(date), config);
}

struct GlmFit {
  std::vector<double> beta;
  double dispersion = 1.0;  // Pearson chi^2 / (n - p), diagnostic only
  GlmDesignConfig config;
  CalendarDate train_start, train_end;
  std::vector<double> deviance_trace;  // per accepted IRLS iteration
  int iterations = 0;

  double predict_one(const CalendarDate& date, bool holiday) const {
    auto x = build_design(date, holiday, config);
    double eta = 0;
    for (std::size_t j = 0; j < x.size(); ++j) eta += x[j] * beta[j];
    return std::exp(eta);
  }
  double predict_one(const CalendarDate& date,
                     const HolidayTable& holidays) const {
    return predict_one(date, holidays.contains(date));
  }
};

namespace detail {

inline double poisson_deviance(const Eigen::VectorXd& y,
                               const Eigen::VectorXd& mu) {
  double dev = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double yi = y[i], mi = mu[i];
    dev += 2.0 * ((yi > 0 ? yi * std::log(yi / mi) : 0.0) - (yi - mi));
  }
  return dev;
}

}  // namespace detail

// IRLS with a tiny ridge on the normal equations and step halving so the
// deviance never increases between accepted iterates.
inline GlmFit fit_irls(const std::vector<std::vector<double>>& designs,
                       const std::vector<double>& counts, int max_iter = 100,
                       double tol = 1e-8,
                       GlmDesignConfig config = GlmDesignConfig{}) {
  const std::size_t n = designs.size();
  if (n == 0 || counts.size() != n)
    throw DataError("fit_irls: designs/counts size mismatch");
  const std::size_t p = designs[0].size();
  if (n < p) throw DataError("fit_irls: fewer observations than parameters");

  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  double ysum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (designs[i].size() != p) throw DataError("fit_irls: ragged design");
    if (counts[i] < 0) throw DataError("fit_irls: negative count");
    for (std::size_t j = 0; j < p; ++j) X(i, j) = designs[i][j];
    y[i] = counts[i];
    ysum += counts[i];
  }
  if (ysum == 0) throw DataError("fit_irls: all counts are zero");

  constexpr double kRidge = 1e-8;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  beta[0] = std::log(ysum / n + 1e-8);

  GlmFit fit;
  fit.config = config;
  Eigen::VectorXd mu = (X * beta).array().exp();
  double dev = detail::poisson_deviance(y, mu);
  fit.deviance_trace.push_back(dev);

  bool converged = false;
  for (int it = 0; it < max_iter; ++it) {
    // Working response z = eta + (y - mu)/mu, weights w = mu.
    Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd z = eta + (y - mu).cwiseQuotient(mu);
    Eigen::MatrixXd Xw = mu.asDiagonal() * X;  // rows scaled by w
    Eigen::MatrixXd A = X.transpose() * Xw;
    A.diagonal().array() += kRidge;
    Eigen::VectorXd b = Xw.transpose() * z;
    Eigen::VectorXd beta_new = A.ldlt().solve(b);
    if (!beta_new.allFinite())
      throw DataError("fit_irls: singular fit (non-finite solve)");

    // Step-halve toward the previous iterate until the deviance does not
    // increase; plain IRLS can overshoot on its first steps.
    Eigen::VectorXd step = beta_new - beta;
    Eigen::VectorXd mu_try;
    double dev_try = 0;
    double scale = 1.0;
    bool improved = false;
    for (int half = 0; half < 30; ++half, scale *= 0.5) {
      mu_try = (X * (beta + scale * step)).array().exp();
      if (!mu_try.allFinite()) continue;
      dev_try = detail::poisson_deviance(y, mu_try);
      if (std::isfinite(dev_try) && dev_try <= dev) {
        improved = true;
        break;
      }
    }
    if (!improved) {  // no step length helps: numerically at the optimum
      converged = true;
      break;
    }
    beta += scale * step;
    mu = std::move(mu_try);
    fit.iterations = it + 1;
    double prev = dev;
    dev = dev_try;
    fit.deviance_trace.push_back(dev);
    if (prev - dev <= tol * (std::abs(prev) + 1e-12)) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw DataError("fit_irls: no convergence after " +
                    std::to_string(max_iter) + " iterations");

  double pearson = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    pearson += (y[i] - mu[i]) * (y[i] - mu[i]) / mu[i];
  fit.dispersion = n > p ? pearson / static_cast<double>(n - p) : 1.0;
  fit.beta.assign(beta.data(), beta.data() + p);
  return fit;
}

// Convenience: fit over a date span of observed counts.
inline GlmFit fit_irls_span(const std::vector<double>& counts,
                            const CalendarDate& first_date,
                            const HolidayTable& holidays,
                            GlmDesignConfig config = GlmDesignConfig{}) {
  std::vector<std::vector<double>> designs;
  designs.reserve(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    designs.push_back(
        build_design(advance(first_date, static_cast<std::int64_t>(i)),
                     holidays, config));
  GlmFit fit = fit_irls(designs, counts, 100, 1e-8, config);
  fit.train_start = first_date;
  fit.train_end = advance(first_date, static_cast<std::int64_t>(counts.size()) - 1);
  return fit;
}

inline std::vector<double> predict_mean(const GlmFit& fit,
                                        const std::vector<CalendarDate>& dates,
                                        const HolidayTable& holidays) {
  std::vector<double> out;
  out.reserve(dates.size());
  for (const auto& d : dates) out.push_back(fit.predict_one(d, holidays));
  return out;
}

}  // namespace heatwarn
