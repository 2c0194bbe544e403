#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fragcgp/algebra.hpp"
#include "fragcgp/cgp.hpp"
#include "fragcgp/models.hpp"
#include "fragcgp/numeric.hpp"
#include "fragcgp/rng.hpp"

namespace fragcgp {

struct SpectralData {
  VecD eigenvalues;
  MatC eigenvectors;
};

inline SpectralData diagonalize(const MatC& H) {
  const double scale = std::max(1.0, max_abs(H));
  if (hermiticity_error(H) > 1e-12 * scale)
    throw std::invalid_argument("diagonalize: matrix is not Hermitian to 1e-12");
  Eigen::SelfAdjointEigenSolver<MatC> es(H);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("diagonalize: eigensolver failed to converge");
  SpectralData sd{es.eigenvalues(), es.eigenvectors()};
  const double resid =
      max_abs(MatC(H * sd.eigenvectors - sd.eigenvectors * sd.eigenvalues.asDiagonal()));
  if (resid > 1e-10 * scale)
    throw std::runtime_error("diagonalize: residual " + fmt12(resid) + " above contract");
  return sd;
}

// U_t = V exp(-i lambda t) V†
inline MatC evolve(const SpectralData& sd, double t) {
  VecC phases(sd.eigenvalues.size());
  for (Eigen::Index i = 0; i < sd.eigenvalues.size(); ++i) {
    const double a = -sd.eigenvalues(i) * t;
    phases(i) = cxd(std::cos(a), std::sin(a));
  }
  return sd.eigenvectors * phases.asDiagonal() * sd.eigenvectors.adjoint();
}

// spectral data of H sector by sector in the adapted basis; since H lies in
// the algebra, W†HW = ⊕_J 1_{n_J} ⊗ M_J and only the d_J x d_J blocks M_J
// need diagonalizing. The block structure itself is verified entrywise.
struct SectorSpectra {
  std::vector<SpectralData> blocks;
  double structure_residual = 0.0;
};

inline SectorSpectra sector_spectra(const MatC& H, const AlgebraDecomposition& dec,
                                    double tol = 1e-9) {
  const MatC Ht = dec.W.adjoint() * H * dec.W;
  const double scale = std::max(1.0, max_abs(H));
  SectorSpectra ss;
  double viol = 0.0;
  for (const auto& sec : dec.sectors) {
    const long off = sec.basis_offset;
    const MatC M = Ht.block(off, off, sec.dim, sec.dim);
    for (long c1 = 0; c1 < sec.n; ++c1)
      for (long c2 = 0; c2 < sec.n; ++c2) {
        const MatC blk = Ht.block(off + c1 * sec.dim, off + c2 * sec.dim, sec.dim, sec.dim);
        viol = std::max(viol, c1 == c2 ? max_abs(MatC(blk - M)) : max_abs(blk));
      }
    const long w = sec.n * sec.dim;
    if (off > 0) viol = std::max(viol, max_abs(MatC(Ht.block(off, 0, w, off))));
    if (off + w < dec.d)
      viol = std::max(viol, max_abs(MatC(Ht.block(off, off + w, w, dec.d - off - w))));
    ss.blocks.push_back(diagonalize(MatC(0.5 * (M + M.adjoint()))));
  }
  ss.structure_residual = viol;
  if (viol > tol * scale)
    throw std::runtime_error("sector_spectra: H is not in the algebra of this decomposition (residual " +
                             fmt12(viol) + ")");
  return ss;
}

inline BlockUnitary evolve_blocks(const SectorSpectra& ss, double t) {
  BlockUnitary bu;
  bu.blocks.reserve(ss.blocks.size());
  for (const auto& sd : ss.blocks) bu.blocks.push_back(evolve(sd, t));
  return bu;
}

struct TimeSample {
  double t = 0.0;
  double f = 0.0;
  double cgp = 0.0;
};

struct TimeAverage {
  double mean_f = 0.0;
  double stderr_f = 0.0;
  double mean_cgp = 0.0;
  double stderr_cgp = 0.0;
  int n_times = 0;
  double t_min = 0.0;
  double t_max = 0.0;
  std::uint64_t seed = 0;
};

// long-time average of f and CGP over evolution times drawn uniformly from
// [t_min, t_max]; random times rather than a grid avoid aliasing against
// commensurate frequencies
inline TimeAverage long_time_avg_cgp(const HamiltonianFamily& fam,
                                     const AlgebraDecomposition& dec, int n_times,
                                     double t_min, double t_max, std::uint64_t seed,
                                     std::vector<TimeSample>* samples = nullptr) {
  if (n_times < 2) throw std::invalid_argument("long_time_avg_cgp: need n_times >= 2");
  if (!(t_min < t_max)) throw std::invalid_argument("long_time_avg_cgp: degenerate time window");

  const SectorSpectra ss = sector_spectra(fam.hamiltonian(), dec);
  Rng rng(derive_seed(seed, "evolution-times"));

  CompensatedSum sum_f, sum_f2;
  if (samples) samples->reserve(samples->size() + n_times);
  for (int k = 0; k < n_times; ++k) {
    const double t = rng.uniform(t_min, t_max);
    const CgpResult r = cgp_block(evolve_blocks(ss, t), dec);
    sum_f.add(r.f_value);
    sum_f2.add(r.f_value * r.f_value);
    if (samples) samples->push_back({t, r.f_value, r.cgp});
  }
  const double n = static_cast<double>(n_times);
  const double d = static_cast<double>(dec.d);
  TimeAverage ta;
  ta.n_times = n_times;
  ta.t_min = t_min;
  ta.t_max = t_max;
  ta.seed = seed;
  ta.mean_f = sum_f.value() / n;
  const double var = std::max(0.0, (sum_f2.value() - n * ta.mean_f * ta.mean_f) / (n - 1.0));
  ta.stderr_f = std::sqrt(var / n);
  ta.mean_cgp = 1.0 - ta.mean_f / d;
  ta.stderr_cgp = ta.stderr_f / d;
  return ta;
}

}  // namespace fragcgp
