#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fragcgp/algebra.hpp"
#include "fragcgp/numeric.hpp"

namespace fragcgp {

// coherence generating power of a unitary in a basis:
//   C_B(U) = 1 - (1/d) sum_{ij} |<i|U|j>|^4
// f = d (1 - C) is carried alongside; for a unitary inside the algebra and
// the adapted basis, f >= K and C <= 1 - K/d.
struct CgpResult {
  double cgp = 0.0;
  double f_value = 0.0;
  double bound = 0.0;  // 1 - K/d for the adapted basis, 1 - 1/d otherwise
  std::string basis_id = "computational";
  double time = std::numeric_limits<double>::quiet_NaN();
  long sample_index = -1;
  std::uint64_t seed = 0;
};

// sum of |entries|^4 with compensated accumulation in a fixed column order
inline double sum_quartic(const MatC& m) {
  CompensatedSum acc;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double p = std::norm(m(i, j));
      acc.add(p * p);
    }
  return acc.value();
}

inline void require_unitary(const MatC& u, const char* what) {
  const double dev = unitarity_error(u);
  if (dev > 1e-10)
    throw std::invalid_argument(std::string(what) + " is not unitary: |U'U - 1|_max = " + fmt12(dev));
}

inline CgpResult cgp_full(const MatC& U) {
  require_unitary(U, "cgp_full input");
  const double d = static_cast<double>(U.rows());
  CgpResult r;
  r.f_value = sum_quartic(U);
  r.cgp = 1.0 - r.f_value / d;
  r.bound = 1.0 - 1.0 / d;
  return r;
}

inline CgpResult cgp_full(const MatC& U, const MatC& basis) {
  require_unitary(U, "cgp_full input");
  CgpResult r = cgp_full(MatC(basis.adjoint() * U * basis));
  r.basis_id = "custom";
  return r;
}

inline double max_cgp_bound(const AlgebraDecomposition& dec) {
  return 1.0 - static_cast<double>(dec.K) / static_cast<double>(dec.d);
}

inline CgpResult cgp_full(const MatC& U, const AlgebraDecomposition& dec) {
  require_unitary(U, "cgp_full input");
  CgpResult r = cgp_full(MatC(dec.W.adjoint() * U * dec.W));
  r.bound = max_cgp_bound(dec);
  r.basis_id = dec.basis_id;
  return r;
}

// CGP of ⊕_J 1_{n_J} ⊗ U_J evaluated per block:
//   f = sum_J n_J sum_{psi,psi'} |(U_J)_{psi,psi'}|^4
// equal to cgp_full of the embedded unitary in the adapted basis at cost
// sum_J d_J^2 instead of d^2
inline CgpResult cgp_block(const BlockUnitary& bu, const AlgebraDecomposition& dec) {
  if (static_cast<long>(bu.blocks.size()) != dec.d_Z)
    throw std::invalid_argument("cgp_block: block count does not match decomposition");
  CompensatedSum f;
  for (std::size_t J = 0; J < dec.sectors.size(); ++J) {
    const auto& sec = dec.sectors[J];
    const MatC& U = bu.blocks[J];
    if (U.rows() != sec.dim || U.cols() != sec.dim)
      throw std::invalid_argument("cgp_block: block " + std::to_string(J) + " has wrong shape");
    require_unitary(U, "cgp_block block");
    f.add(static_cast<double>(sec.n) * sum_quartic(U));
  }
  CgpResult r;
  r.f_value = f.value();
  r.cgp = 1.0 - r.f_value / static_cast<double>(dec.d);
  r.bound = max_cgp_bound(dec);
  r.basis_id = dec.basis_id;
  return r;
}

// block unitary saturating the CGP bound: each block is the discrete Fourier
// matrix, mutually unbiased with respect to the adapted basis
inline BlockUnitary saturating_unitary(const AlgebraDecomposition& dec) {
  BlockUnitary bu;
  bu.blocks.reserve(dec.sectors.size());
  for (const auto& sec : dec.sectors) {
    const long n = sec.dim;
    MatC F(n, n);
    const double s = 1.0 / std::sqrt(static_cast<double>(n));
    for (long a = 0; a < n; ++a)
      for (long b = 0; b < n; ++b) {
        const double phase = -2.0 * M_PI * static_cast<double>(a) * static_cast<double>(b) /
                             static_cast<double>(n);
        F(a, b) = s * cxd(std::cos(phase), std::sin(phase));
      }
    bu.blocks.push_back(std::move(F));
  }
  return bu;
}

// Haar average of the CGP over the unitaries in the algebra:
//   1 - (1/d) sum_J n_J 2 d_J / (d_J + 1)
inline double haar_avg_analytic(const AlgebraDecomposition& dec) {
  CompensatedSum s;
  for (const auto& sec : dec.sectors)
    s.add(static_cast<double>(sec.n) * 2.0 * static_cast<double>(sec.dim) /
          (static_cast<double>(sec.dim) + 1.0));
  return 1.0 - s.value() / static_cast<double>(dec.d);
}

// (1 - 2K/(d+1), 1 - K/d); the analytic Haar average lies within, inclusive
inline std::pair<double, double> haar_avg_bounds(const AlgebraDecomposition& dec) {
  const double K = static_cast<double>(dec.K);
  const double d = static_cast<double>(dec.d);
  return {1.0 - 2.0 * K / (d + 1.0), 1.0 - K / d};
}

}  // namespace fragcgp
