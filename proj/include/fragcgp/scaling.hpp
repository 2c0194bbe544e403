#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "fragcgp/algebra.hpp"
#include "fragcgp/dynamics.hpp"
#include "fragcgp/models.hpp"

namespace fragcgp {

struct SweepRecord {
  ModelId model = ModelId::xxz;
  int L = 0;
  long d = 0;
  long K = 0;
  std::uint64_t seed = 0;
  int n_times = 0;
  double mean_f = 0.0;
  double stderr_f = 0.0;
  double mean_cgp = 0.0;
};

struct SweepOptions {
  int n_times = 200;
  double t_min = 100.0;
  double t_max = 1100.0;
  std::uint64_t seed = 0;
};

// system-size sweep: one coupling realization per seed, nested across L, with
// the long-time CGP average evaluated in the adapted basis of each size
inline std::vector<SweepRecord> sweep(ModelId model, const std::vector<int>& L_list,
                                      SweepOptions opts = {},
                                      std::vector<TimeSample>* all_samples = nullptr) {
  std::vector<SweepRecord> records;
  records.reserve(L_list.size());
  for (const int L : L_list) {
    const HamiltonianFamily fam = build_family(model, L, opts.seed);
    const AlgebraDecomposition dec =
        adapted_decomposition(fam, derive_seed(opts.seed, "sweep-basis", L));
    const TimeAverage ta = long_time_avg_cgp(fam, dec, opts.n_times, opts.t_min, opts.t_max,
                                             derive_seed(opts.seed, "sweep-times", L),
                                             all_samples);
    SweepRecord rec;
    rec.model = model;
    rec.L = L;
    rec.d = fam.d;
    rec.K = dec.K;
    rec.seed = opts.seed;
    rec.n_times = opts.n_times;
    rec.mean_f = ta.mean_f;
    rec.stderr_f = ta.stderr_f;
    rec.mean_cgp = ta.mean_cgp;
    if (rec.mean_f < static_cast<double>(rec.K) - 1e-6)
      throw std::runtime_error("sweep: mean_f fell below K at L = " + std::to_string(L));
    records.push_back(rec);
  }
  return records;
}

struct ScalingFit {
  double amplitude = 0.0;       // A in f(x) = A x^B
  double exponent = 0.0;        // B
  double exponent_stderr = 0.0;
  double rmse_raw = 0.0;
  double rmse_log = 0.0;
  int n_points = 0;
  bool raw_converged = true;    // false when the raw-space fit fell back to log space
};

// power-law fit f(x) = A x^B: linear fit in log space seeds a
// Levenberg-Marquardt refinement on the raw residuals. Raw space is primary;
// both RMSEs are reported.
inline ScalingFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
  const int n = static_cast<int>(points.size());
  if (n < 3) throw std::invalid_argument("fit_power_law: need at least 3 points");
  for (const auto& [x, y] : points)
    if (!(x > 0.0) || !(y > 0.0))
      throw std::invalid_argument("fit_power_law: points must be positive");

  // log-space least squares for the initial guess
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    const double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  double B = (n * sxy - sx * sy) / den;
  double logA = (sy - B * sx) / n;
  double A = std::exp(logA);
  const double B_log = B, A_log = A;

  auto cost = [&](double a, double b) {
    double c = 0;
    for (const auto& [x, y] : points) {
      const double r = a * std::pow(x, b) - y;
      c += r * r;
    }
    return c;
  };

  // Levenberg-Marquardt on r_i = A x^B - y
  bool converged = false;
  double lambda = 1e-3;
  double prev = cost(A, B);
  for (int it = 0; it < 200; ++it) {
    Eigen::Matrix2d JtJ = Eigen::Matrix2d::Zero();
    Eigen::Vector2d Jtr = Eigen::Vector2d::Zero();
    for (const auto& [x, y] : points) {
      const double m = std::pow(x, B);
      const double r = A * m - y;
      const Eigen::Vector2d j(m, A * std::log(x) * m);
      JtJ += j * j.transpose();
      Jtr += j * r;
    }
    Eigen::Matrix2d damped = JtJ;
    damped(0, 0) *= (1.0 + lambda);
    damped(1, 1) *= (1.0 + lambda);
    const Eigen::Vector2d step = damped.ldlt().solve(-Jtr);
    const double A_new = A + step(0);
    const double B_new = B + step(1);
    if (!std::isfinite(A_new) || !std::isfinite(B_new) || A_new <= 0.0) {
      lambda *= 10.0;
      if (lambda > 1e12) break;
      continue;
    }
    const double c = cost(A_new, B_new);
    if (c < prev) {
      const double rel = std::abs(prev - c) / std::max(prev, 1e-300);
      A = A_new;
      B = B_new;
      prev = c;
      lambda = std::max(lambda * 0.3, 1e-12);
      if (rel < 1e-14) {
        converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) {
        converged = true;  // stalled at a minimum
        break;
      }
    }
  }

  ScalingFit fit;
  fit.n_points = n;
  if (!converged && !(prev < cost(A_log, B_log))) {
    // raw-space refinement failed; report the log-space fit, flagged
    fit.raw_converged = false;
    A = A_log;
    B = B_log;
  }
  fit.amplitude = A;
  fit.exponent = B;

  // covariance from the (raw) Jacobian at the solution
  Eigen::Matrix2d JtJ = Eigen::Matrix2d::Zero();
  double rss = 0, rss_log = 0;
  for (const auto& [x, y] : points) {
    const double m = std::pow(x, B);
    const double r = A * m - y;
    rss += r * r;
    const double rl = std::log(y) - (std::log(A) + B * std::log(x));
    rss_log += rl * rl;
    const Eigen::Vector2d j(m, A * std::log(x) * m);
    JtJ += j * j.transpose();
  }
  fit.rmse_raw = std::sqrt(rss / n);
  fit.rmse_log = std::sqrt(rss_log / n);
  if (n > 2) {
    const double s2 = rss / (n - 2);
    const Eigen::Matrix2d cov = s2 * JtJ.inverse();
    fit.exponent_stderr = std::sqrt(std::max(0.0, cov(1, 1)));
  }
  return fit;
}

struct BoundComparison {
  ModelId model = ModelId::xxz;
  ScalingFit f_fit;              // fit of mean_f against d
  ScalingFit k_fit;              // fit of the analytic bound K against d
  std::vector<int> L;            // per record
  std::vector<double> f_over_K;  // mean_f / K per record
};

// fitted exponent of the long-time f average, the exponent of the Krylov
// bound, and the ratio mean_f/K size by size
inline BoundComparison compare_to_bound(const std::vector<SweepRecord>& records) {
  if (records.size() < 3)
    throw std::invalid_argument("compare_to_bound: need at least 3 sweep records");
  for (const auto& r : records)
    if (r.model != records[0].model)
      throw std::invalid_argument("compare_to_bound: records mix models");

  std::vector<std::pair<double, double>> fpts, kpts;
  BoundComparison cmp;
  cmp.model = records[0].model;
  for (const auto& r : records) {
    fpts.emplace_back(static_cast<double>(r.d), r.mean_f);
    kpts.emplace_back(static_cast<double>(r.d), static_cast<double>(r.K));
    cmp.L.push_back(r.L);
    cmp.f_over_K.push_back(r.mean_f / static_cast<double>(r.K));
  }
  cmp.f_fit = fit_power_law(fpts);
  cmp.k_fit = fit_power_law(kpts);
  return cmp;
}

}  // namespace fragcgp
