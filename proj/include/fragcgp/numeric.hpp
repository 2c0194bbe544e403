#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace fragcgp {

using cxd = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using VecD = Eigen::VectorXd;
using SpMatC = Eigen::SparseMatrix<cxd>;

// Neumaier-compensated accumulator. All big reductions in the library go
// through this in a fixed order, which keeps results reproducible to ~1e-16
// independent of how the terms are generated.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }

  double value() const { return sum + comp; }
};

inline double max_abs(const MatC& m) {
  double r = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) r = std::max(r, std::abs(m(i, j)));
  return r;
}

inline double max_abs(const SpMatC& m) {
  double r = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMatC::InnerIterator it(m, k); it; ++it) r = std::max(r, std::abs(it.value()));
  return r;
}

inline double hermiticity_error(const SpMatC& m) {
  SpMatC diff = SpMatC(m - SpMatC(m.adjoint()));
  return max_abs(diff);
}

inline double hermiticity_error(const MatC& m) { return max_abs(MatC(m - m.adjoint())); }

inline double unitarity_error(const MatC& u) {
  MatC g = u.adjoint() * u;
  g.diagonal().array() -= 1.0;
  return max_abs(g);
}

inline MatC kron_dense(const MatC& a, const MatC& b) {
  MatC out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline SpMatC kron_sparse(const SpMatC& a, const SpMatC& b) {
  SpMatC out(a.rows() * b.rows(), a.cols() * b.cols());
  std::vector<Eigen::Triplet<cxd>> trips;
  trips.reserve(static_cast<std::size_t>(a.nonZeros()) * b.nonZeros());
  for (int ka = 0; ka < a.outerSize(); ++ka)
    for (SpMatC::InnerIterator ia(a, ka); ia; ++ia)
      for (int kb = 0; kb < b.outerSize(); ++kb)
        for (SpMatC::InnerIterator ib(b, kb); ib; ++ib)
          trips.emplace_back(ia.row() * b.rows() + ib.row(),
                             ia.col() * b.cols() + ib.col(), ia.value() * ib.value());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

inline SpMatC sparse_identity(long n) {
  SpMatC id(n, n);
  id.setIdentity();
  return id;
}

// local operator acting on site `site` (0-based) of a chain of L sites with
// local dimension q; identity elsewhere
inline SpMatC op_on_site(const SpMatC& local, int site, int L, int q) {
  long left = 1;
  for (int s = 0; s < site; ++s) left *= q;
  long right = 1;
  for (int s = site + 1; s < L; ++s) right *= q;
  return kron_sparse(kron_sparse(sparse_identity(left), local), sparse_identity(right));
}

// two-site operator acting on sites (site, site+1)
inline SpMatC op_on_bond(const SpMatC& two_site, int site, int L, int q) {
  long left = 1;
  for (int s = 0; s < site; ++s) left *= q;
  long right = 1;
  for (int s = site + 2; s < L; ++s) right *= q;
  return kron_sparse(kron_sparse(sparse_identity(left), two_site), sparse_identity(right));
}

inline long ipow(long base, int exp) {
  long r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// 12 significant digits, C locale, no trailing garbage; the one formatting
// routine behind every number the library serializes
inline std::string fmt12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

}  // namespace fragcgp
