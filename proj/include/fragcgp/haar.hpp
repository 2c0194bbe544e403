#pragma once

#include <Eigen/QR>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fragcgp/algebra.hpp"
#include "fragcgp/cgp.hpp"
#include "fragcgp/numeric.hpp"
#include "fragcgp/rng.hpp"

namespace fragcgp {

// Haar-distributed unitary: complex Ginibre matrix, QR factorization, then
// the Q factor is multiplied by the phases of R's diagonal. Without the phase
// correction the distribution is biased by the factorization's sign
// convention and is not Haar.
inline MatC haar_unitary(long n, Rng& rng) {
  MatC G(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) G(i, j) = rng.cnormal();
  Eigen::HouseholderQR<MatC> qr(G);
  MatC U = qr.householderQ();
  const MatC& qrmat = qr.matrixQR();
  for (Eigen::Index j = 0; j < n; ++j) {
    const cxd r = qrmat(j, j);
    const double a = std::abs(r);
    U.col(j) *= (a > 0.0 ? r / a : cxd(1.0, 0.0));
  }
  return U;
}

// ⊕_J 1_{n_J} ⊗ U_J with each U_J Haar on U(d_J); per-sector streams derive
// from (seed, sector index) so samples are reproducible and independent
inline BlockUnitary sample_haar_block(const AlgebraDecomposition& dec, std::uint64_t seed) {
  BlockUnitary bu;
  bu.blocks.reserve(dec.sectors.size());
  for (std::size_t J = 0; J < dec.sectors.size(); ++J) {
    Rng rng(derive_seed(seed, "haar-sector", J));
    bu.blocks.push_back(haar_unitary(dec.sectors[J].dim, rng));
  }
  return bu;
}

struct McEstimate {
  double mean = 0.0;
  double stderr_mean = 0.0;
  double analytic_ref = 0.0;
  int n_samples = 0;
  std::uint64_t seed = 0;
};

// Monte Carlo estimate of the Haar-averaged CGP over block unitaries in the
// algebra, with the closed-form average carried as reference
inline McEstimate mc_haar_cgp(const AlgebraDecomposition& dec, int n_samples,
                              std::uint64_t seed,
                              std::vector<double>* samples = nullptr) {
  if (n_samples < 2) throw std::invalid_argument("mc_haar_cgp: need n_samples >= 2");
  CompensatedSum sum, sum2;
  if (samples) samples->reserve(samples->size() + n_samples);
  for (int i = 0; i < n_samples; ++i) {
    const BlockUnitary bu = sample_haar_block(dec, derive_seed(seed, "mc-sample", i));
    const double c = cgp_block(bu, dec).cgp;
    sum.add(c);
    sum2.add(c * c);
    if (samples) samples->push_back(c);
  }
  const double n = static_cast<double>(n_samples);
  McEstimate est;
  est.n_samples = n_samples;
  est.seed = seed;
  est.mean = sum.value() / n;
  const double var = std::max(0.0, (sum2.value() - n * est.mean * est.mean) / (n - 1.0));
  est.stderr_mean = std::sqrt(var / n);
  est.analytic_ref = haar_avg_analytic(dec);
  return est;
}

// Wilson score interval for a binomial proportion
inline std::pair<double, double> wilson_interval(long successes, long n, double z) {
  const double p = static_cast<double>(successes) / static_cast<double>(n);
  const double z2n = z * z / static_cast<double>(n);
  const double center = (p + 0.5 * z2n) / (1.0 + z2n);
  const double half =
      z * std::sqrt(p * (1.0 - p) / static_cast<double>(n) + 0.25 * z2n / static_cast<double>(n)) /
      (1.0 + z2n);
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct ConcentrationRow {
  int sector_label = 0;
  long d_J = 0;
  double eps = 0.0;
  int n_samples = 0;
  long exceed = 0;       // samples with |X - mean| >= eps
  double tail = 0.0;     // empirical tail probability
  double levy_bound = 0.0;  // exp(-d_J eps^2 / 256), Lipschitz constant 8
  double wilson_low = 0.0;
  double wilson_high = 0.0;
};

// Empirical concentration of the per-sector statistic
//   X(U_J) = (1/d_J) sum_{psi,psi'} |(U_J)_{psi,psi'}|^4
// around its Haar mean 2/(d_J+1), compared against the Levy tail bound
inline std::vector<ConcentrationRow> concentration_stats(const AlgebraDecomposition& dec,
                                                         const std::vector<double>& epsilons,
                                                         int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("concentration_stats: need n_samples >= 1");
  for (const double e : epsilons)
    if (!(e > 0.0)) throw std::invalid_argument("concentration_stats: epsilon must be positive");

  std::vector<ConcentrationRow> rows;
  for (std::size_t J = 0; J < dec.sectors.size(); ++J) {
    const auto& sec = dec.sectors[J];
    const double mean = 2.0 / (static_cast<double>(sec.dim) + 1.0);
    std::vector<long> exceed(epsilons.size(), 0);
    for (int i = 0; i < n_samples; ++i) {
      Rng rng(derive_seed(seed, "concentration", J * 1000003ULL + static_cast<std::uint64_t>(i)));
      const MatC U = haar_unitary(sec.dim, rng);
      const double X = sum_quartic(U) / static_cast<double>(sec.dim);
      for (std::size_t k = 0; k < epsilons.size(); ++k)
        if (std::abs(X - mean) >= epsilons[k]) ++exceed[k];
    }
    for (std::size_t k = 0; k < epsilons.size(); ++k) {
      ConcentrationRow row;
      row.sector_label = sec.label;
      row.d_J = sec.dim;
      row.eps = epsilons[k];
      row.n_samples = n_samples;
      row.exceed = exceed[k];
      row.tail = static_cast<double>(exceed[k]) / static_cast<double>(n_samples);
      row.levy_bound = std::exp(-static_cast<double>(sec.dim) * epsilons[k] * epsilons[k] / 256.0);
      const auto [lo, hi] = wilson_interval(exceed[k], n_samples, 3.0);
      row.wilson_low = lo;
      row.wilson_high = hi;
      rows.push_back(row);
    }
  }
  return rows;
}

// trivial single-sector decomposition (n = 1, d_J = d, W = identity); used to
// study concentration block by block
inline AlgebraDecomposition single_block_decomposition(long d) {
  AlgebraDecomposition dec;
  dec.d = d;
  dec.W = MatC::Identity(d, d);
  dec.sectors.push_back({0, 1, d, 0});
  dec.K = 1;
  dec.dim_A = d * d;
  dec.dim_Aprime = 1;
  dec.d_Z = 1;
  dec.basis_id = "single-block:d=" + std::to_string(d);
  return dec;
}

}  // namespace fragcgp
