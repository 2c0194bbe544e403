#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fragcgp/models.hpp"
#include "fragcgp/numeric.hpp"
#include "fragcgp/rng.hpp"

namespace fragcgp {

// ---------------------------------------------------------------------------
// decomposition data

struct Sector {
  int label = 0;
  long n = 1;            // multiplicity n_J (copies of the irreducible block)
  long dim = 1;          // d_J
  long basis_offset = 0; // first column of this sector in W
};

// Hilbert-space decomposition H = ⊕_J C^{n_J} ⊗ C^{d_J} adapted to the
// algebra generated by a family of Hermitian operators. Columns of W hold the
// adapted orthonormal basis, sector by sector; within a sector the copy index
// is outer and the state index runs fastest, so every algebra element becomes
// block diagonal with blocks 1_{n_J} ⊗ M_J and every commutant element
// becomes R_J ⊗ 1_{d_J}.
struct AlgebraDecomposition {
  long d = 0;
  std::vector<Sector> sectors;
  MatC W;
  long K = 0;            // sum of multiplicities = number of Krylov subspaces
  long dim_A = 0;        // sum d_J^2
  long dim_Aprime = 0;   // sum n_J^2
  long d_Z = 0;          // number of sectors
  double cluster_tol = 1e-8;
  double block_residual = 0.0;  // worst deviation of W'hW from block form
  std::string basis_id;

  const Sector& sector(int idx) const { return sectors.at(idx); }
};

inline long count_K(const AlgebraDecomposition& dec) {
  long k = 0;
  for (const auto& s : dec.sectors) k += s.n;
  return k;
}

// unitary of the form ⊕_J 1_{n_J} ⊗ U_J, stored as one block per sector
struct BlockUnitary {
  std::vector<MatC> blocks;
};

// dense d x d unitary W (⊕_J 1_{n_J} ⊗ U_J) W†
inline MatC embed(const BlockUnitary& bu, const AlgebraDecomposition& dec) {
  if (static_cast<long>(bu.blocks.size()) != dec.d_Z)
    throw std::invalid_argument("block count does not match decomposition");
  MatC D = MatC::Zero(dec.d, dec.d);
  for (std::size_t J = 0; J < dec.sectors.size(); ++J) {
    const auto& sec = dec.sectors[J];
    const MatC& U = bu.blocks[J];
    if (U.rows() != sec.dim || U.cols() != sec.dim)
      throw std::invalid_argument("block " + std::to_string(J) + " has wrong shape");
    for (long copy = 0; copy < sec.n; ++copy) {
      const long off = sec.basis_offset + copy * sec.dim;
      D.block(off, off, sec.dim, sec.dim) = U;
    }
  }
  return dec.W * D * dec.W.adjoint();
}

// true iff W†UW is block diagonal with sector blocks 1_{n_J} ⊗ (unitary),
// together with the largest violation found
inline std::pair<bool, double> verify_block_structure(const AlgebraDecomposition& dec,
                                                      const MatC& U, double tol = 1e-8) {
  MatC Ut = dec.W.adjoint() * U * dec.W;
  double viol = 0.0;
  for (const auto& sec : dec.sectors) {
    const long off = sec.basis_offset;
    const MatC ref = Ut.block(off, off, sec.dim, sec.dim);
    viol = std::max(viol, unitarity_error(ref));
    for (long c1 = 0; c1 < sec.n; ++c1)
      for (long c2 = 0; c2 < sec.n; ++c2) {
        const MatC blk = Ut.block(off + c1 * sec.dim, off + c2 * sec.dim, sec.dim, sec.dim);
        viol = std::max(viol, c1 == c2 ? max_abs(MatC(blk - ref)) : max_abs(blk));
      }
    // anything outside this sector's rows must vanish
    const long w = sec.n * sec.dim;
    if (off > 0)
      viol = std::max(viol, max_abs(MatC(Ut.block(off, 0, w, off))));
    if (off + w < dec.d)
      viol = std::max(viol, max_abs(MatC(Ut.block(off, off + w, w, dec.d - off - w))));
  }
  return {viol <= tol, viol};
}

// thrown when eigenvalue clustering or copy alignment cannot be resolved at
// the configured tolerances; carries the ambiguous spectral gaps
class decomposition_error : public std::runtime_error {
 public:
  decomposition_error(const std::string& msg, std::vector<double> gaps)
      : std::runtime_error(msg), ambiguous_gaps(std::move(gaps)) {}
  std::vector<double> ambiguous_gaps;
};

struct DecomposeOptions {
  std::uint64_t seed = 0;
  double cluster_tol = 1e-8;   // eigenvalue gap threshold, relative to spectral range
  double block_tol = 1e-9;     // entrywise tolerance for the 1_n ⊗ M block form
  int max_attempts = 4;
};

// ---------------------------------------------------------------------------
// internals

namespace detail {

struct Group {
  long start = 0;  // first index in the sorted eigenbasis
  long size = 1;
};

// random Hermitian combination of the generators; quadratic words
// (symmetrized pair products) are mixed in to make the element generic in the
// generated algebra, not merely in the linear span
inline MatC generic_algebra_element(const std::vector<SpMatC>& gens, Rng& rng,
                                    int word_degree) {
  const long d = gens[0].rows();
  MatC H = MatC::Zero(d, d);
  for (const auto& g : gens) H += rng.normal() * MatC(g);
  if (word_degree >= 2) {
    for (std::size_t a = 0; a < gens.size(); ++a)
      for (std::size_t b = a; b < gens.size(); ++b) {
        const SpMatC p = SpMatC(gens[a] * gens[b]);
        const double c = 0.5 * rng.normal();
        H += c * MatC(p);
        H += c * MatC(p).adjoint();
      }
  }
  H = 0.5 * (H + MatC(H.adjoint()));
  return H;
}

inline std::vector<Group> cluster_eigenvalues(const VecD& evals, double cluster_tol,
                                              std::vector<double>* ambiguous = nullptr) {
  const long d = evals.size();
  const double range = evals(d - 1) - evals(0);
  std::vector<Group> groups;
  if (range < 1e-12 * std::max(1.0, std::abs(evals(0)))) {
    groups.push_back({0, d});
    return groups;
  }
  const double gap_tol = cluster_tol * range;
  groups.push_back({0, 1});
  for (long i = 1; i < d; ++i) {
    const double gap = evals(i) - evals(i - 1);
    if (ambiguous && gap > gap_tol && gap < 30.0 * gap_tol) ambiguous->push_back(gap);
    if (gap > gap_tol)
      groups.push_back({i, 1});
    else
      groups.back().size += 1;
  }
  return groups;
}

struct UnionFindSmall {
  std::vector<int> parent;
  explicit UnionFindSmall(int n) : parent(n) {
    for (int i = 0; i < n; ++i) parent[i] = i;
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// spectrally clustered generic element with the generators transformed into
// its eigenbasis
struct ClusteredElement {
  VecD evals;
  MatC V;
  std::vector<Group> groups;
  std::vector<MatC> transformed;  // V† h V per operator handed in
  std::vector<double> scales;     // max-entry scale per operator
};

inline ClusteredElement cluster_against(const MatC& H, const std::vector<MatC>& ops,
                                        double cluster_tol,
                                        std::vector<double>* ambiguous = nullptr) {
  Eigen::SelfAdjointEigenSolver<MatC> es(H);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed to converge");
  ClusteredElement ce;
  ce.evals = es.eigenvalues();
  ce.V = es.eigenvectors();
  ce.groups = cluster_eigenvalues(ce.evals, cluster_tol, ambiguous);
  ce.transformed.reserve(ops.size());
  ce.scales.reserve(ops.size());
  for (const auto& op : ops) {
    ce.transformed.push_back(ce.V.adjoint() * op * ce.V);
    ce.scales.push_back(std::max(1.0, max_abs(op)));
  }
  return ce;
}

inline std::vector<MatC> densify(const std::vector<SpMatC>& gens) {
  std::vector<MatC> out;
  out.reserve(gens.size());
  for (const auto& g : gens) out.emplace_back(g);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// numeric decomposition
//
// A generic Hermitian element of the generated algebra has, by the structure
// theorem, exactly n_J-fold degenerate eigenvalues grouped sector by sector.
// Clustering its spectrum therefore exposes the state levels; the generators'
// matrix elements connect levels of the same sector only, so connected
// components of the level graph are the sectors. Copy bases of the different
// levels are aligned through the polar factors of generator blocks along a
// spanning tree, after which every generator block must be a scalar multiple
// of the identity -- that residual is checked entrywise and certifies the
// output.

inline AlgebraDecomposition decompose(const std::vector<SpMatC>& gens,
                                      DecomposeOptions opts = {}) {
  if (gens.empty()) throw std::invalid_argument("decompose: no generators");
  const long d = gens[0].rows();
  for (const auto& g : gens) {
    if (g.rows() != d || g.cols() != d)
      throw std::invalid_argument("decompose: generators must share one dimension");
    if (hermiticity_error(g) > 1e-12 * std::max(1.0, max_abs(g)))
      throw std::invalid_argument("decompose: generator is not Hermitian to 1e-12");
  }

  const std::vector<MatC> dense = detail::densify(gens);
  std::vector<double> last_gaps;
  std::string last_reason = "unresolved";

  for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
    Rng rng(derive_seed(opts.seed, "decompose-attempt", attempt));
    const int degree = attempt == 0 ? 1 : 2;
    const MatC H = detail::generic_algebra_element(gens, rng, degree);

    std::vector<double> ambiguous;
    detail::ClusteredElement ce = detail::cluster_against(H, dense, opts.cluster_tol, &ambiguous);
    if (!ambiguous.empty()) {
      last_gaps = ambiguous;
      last_reason = "ambiguous spectral gaps in the generic element";
      continue;
    }
    const int G = static_cast<int>(ce.groups.size());

    // level graph: edge where any generator has a non-negligible block
    std::vector<Eigen::MatrixXd> norms(gens.size(), Eigen::MatrixXd::Zero(G, G));
    detail::UnionFindSmall uf(G);
    const double edge_tol = 1e-8;
    for (std::size_t j = 0; j < gens.size(); ++j) {
      for (int g = 0; g < G; ++g)
        for (int h = 0; h < G; ++h) {
          const auto& gr = ce.groups[g];
          const auto& hr = ce.groups[h];
          norms[j](g, h) =
              max_abs(MatC(ce.transformed[j].block(gr.start, hr.start, gr.size, hr.size)));
          if (g != h && norms[j](g, h) > edge_tol * ce.scales[j]) uf.unite(g, h);
        }
    }

    std::map<int, std::vector<int>> comps;
    for (int g = 0; g < G; ++g) comps[uf.find(g)].push_back(g);

    // multiplicities must agree within a component
    bool consistent = true;
    for (const auto& [root, members] : comps) {
      for (int g : members)
        if (ce.groups[g].size != ce.groups[members[0]].size) consistent = false;
    }
    if (!consistent) {
      last_reason = "level multiplicities differ within a connected component";
      last_gaps.clear();
      continue;
    }

    // align copy bases along a maximum-weight spanning tree per component
    std::vector<MatC> Q(G);
    for (int g = 0; g < G; ++g) Q[g] = MatC::Identity(ce.groups[g].size, ce.groups[g].size);
    bool aligned_ok = true;
    for (const auto& [root, members] : comps) {
      const long m = ce.groups[members[0]].size;
      if (m == 0) continue;
      std::vector<int> done = {members[0]};
      std::vector<int> todo(members.begin() + 1, members.end());
      while (!todo.empty() && aligned_ok) {
        double best = -1.0;
        std::size_t best_j = 0;
        int best_g = -1, best_h = -1;
        for (int g : done)
          for (int h : todo)
            for (std::size_t j = 0; j < gens.size(); ++j) {
              const double w = norms[j](g, h) / ce.scales[j];
              if (w > best) {
                best = w;
                best_j = j;
                best_g = g;
                best_h = h;
              }
            }
        if (best <= edge_tol) {
          aligned_ok = false;  // tree does not reach every level
          break;
        }
        const auto& gr = ce.groups[best_g];
        const auto& hr = ce.groups[best_h];
        const MatC M = Q[best_g].adjoint() *
                       ce.transformed[best_j].block(gr.start, hr.start, m, m);
        Eigen::JacobiSVD<MatC> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const double smax = svd.singularValues()(0);
        const double smin = svd.singularValues()(m - 1);
        if (smax <= 0.0 || (smax - smin) / smax > 1e-6) {
          aligned_ok = false;  // block is not scalar x unitary: bad clustering
          break;
        }
        Q[best_h] = svd.matrixV() * svd.matrixU().adjoint();
        done.push_back(best_h);
        todo.erase(std::find(todo.begin(), todo.end(), best_h));
      }
      if (!aligned_ok) break;
    }
    if (!aligned_ok) {
      last_reason = "copy alignment failed (non-scalar generator block)";
      last_gaps.clear();
      continue;
    }

    // residual of the full structured form, entrywise
    double residual = 0.0;
    for (std::size_t j = 0; j < gens.size(); ++j) {
      for (int g = 0; g < G; ++g)
        for (int h = 0; h < G; ++h) {
          if (uf.find(g) != uf.find(h)) {
            residual = std::max(residual, norms[j](g, h));
            continue;
          }
          const auto& gr = ce.groups[g];
          const auto& hr = ce.groups[h];
          const long m = gr.size;
          MatC R = Q[g].adjoint() *
                   ce.transformed[j].block(gr.start, hr.start, m, m) * Q[h];
          const cxd c = R.trace() / static_cast<double>(m);
          R.diagonal().array() -= c;
          residual = std::max(residual, max_abs(R));
        }
    }
    if (residual > opts.block_tol * 10.0) {
      last_reason = "block residual " + fmt12(residual) + " above tolerance";
      last_gaps.clear();
      continue;
    }

    // assemble sectors ordered by lowest contained eigenvalue
    AlgebraDecomposition dec;
    dec.d = d;
    dec.cluster_tol = opts.cluster_tol;
    dec.block_residual = residual;
    dec.basis_id = "numeric:seed=" + std::to_string(opts.seed);
    dec.W = MatC(d, d);
    long offset = 0;
    int label = 0;
    for (const auto& [root, members] : comps) {
      Sector sec;
      sec.label = label++;
      sec.n = ce.groups[members[0]].size;
      sec.dim = static_cast<long>(members.size());
      sec.basis_offset = offset;
      for (long copy = 0; copy < sec.n; ++copy)
        for (long psi = 0; psi < sec.dim; ++psi) {
          const auto& gr = ce.groups[members[psi]];
          dec.W.col(offset + copy * sec.dim + psi) =
              ce.V.middleCols(gr.start, gr.size) * Q[members[psi]].col(copy);
        }
      offset += sec.n * sec.dim;
      dec.sectors.push_back(sec);
    }
    dec.d_Z = static_cast<long>(dec.sectors.size());
    dec.K = 0;
    dec.dim_A = 0;
    dec.dim_Aprime = 0;
    for (const auto& s : dec.sectors) {
      dec.K += s.n;
      dec.dim_A += s.dim * s.dim;
      dec.dim_Aprime += s.n * s.n;
    }
    return dec;
  }

  throw decomposition_error("decompose: " + last_reason + " after " +
                                std::to_string(opts.max_attempts) + " attempts",
                            last_gaps);
}

inline AlgebraDecomposition decompose(const HamiltonianFamily& fam, DecomposeOptions opts = {}) {
  return decompose(fam.generator_matrices(), opts);
}

// ---------------------------------------------------------------------------
// adapted product basis for the models whose Krylov subspaces are spanned by
// product states (XXZ: magnetization sectors; t-Jz: spin-pattern sectors).
// W is then a permutation matrix and matches the basis used in the reference
// data; sector labels follow the analytic tables.

inline AlgebraDecomposition product_basis_decomposition(const HamiltonianFamily& fam) {
  if (fam.model == ModelId::tl)
    throw std::invalid_argument("TL Krylov subspaces are not product-state spanned; use decompose()");

  // sector key per product state
  std::map<std::pair<int, long>, std::vector<long>> by_key;  // (k, pattern) -> states
  for (long i = 0; i < fam.d; ++i) {
    long x = i;
    std::vector<int> digits(fam.L);
    for (int s = fam.L - 1; s >= 0; --s) {
      digits[s] = static_cast<int>(x % fam.local_dim);
      x /= fam.local_dim;
    }
    int k = 0;
    long pattern = 0;
    if (fam.model == ModelId::xxz) {
      for (int s = 0; s < fam.L; ++s) k += digits[s];  // number of down spins
    } else {
      for (int s = 0; s < fam.L; ++s)
        if (digits[s] != 0) {
          pattern = pattern * 2 + (digits[s] == 2 ? 1 : 0);
          ++k;
        }
    }
    by_key[{k, pattern}].push_back(i);
  }

  AlgebraDecomposition dec;
  dec.d = fam.d;
  dec.W = MatC::Zero(fam.d, fam.d);
  dec.basis_id = "product:" + to_string(fam.model) + ":L=" + std::to_string(fam.L);
  long offset = 0;
  int label = 0;
  for (const auto& [key, states] : by_key) {
    Sector sec;
    sec.label = label++;
    sec.n = 1;
    sec.dim = static_cast<long>(states.size());
    sec.basis_offset = offset;
    for (std::size_t idx = 0; idx < states.size(); ++idx)
      dec.W(states[idx], offset + static_cast<long>(idx)) = 1.0;
    offset += sec.dim;
    dec.sectors.push_back(sec);
    dec.K += 1;
    dec.dim_A += sec.dim * sec.dim;
    dec.dim_Aprime += 1;
  }
  dec.d_Z = static_cast<long>(dec.sectors.size());
  return dec;
}

// adapted basis used for dynamics: the product basis where it exists, the
// numeric one otherwise
inline AlgebraDecomposition adapted_decomposition(const HamiltonianFamily& fam,
                                                  std::uint64_t seed = 0) {
  if (fam.model == ModelId::tl) {
    DecomposeOptions opts;
    opts.seed = seed;
    return decompose(fam, opts);
  }
  return product_basis_decomposition(fam);
}

// ---------------------------------------------------------------------------
// independent dimension counts
//
// dim A' is the dimension of the joint nullspace of X -> [h_j, X]. It is
// computed here without forming the d^2 x d^2 superoperator: relative to the
// eigenspaces of one generic algebra element the unknown X is block diagonal,
// and the commutators with two further generic elements become small linear
// systems per connected component whose nullity is read off from singular
// values (rank cut at 1e-10 of the largest singular value). dim A follows the
// same route with generic elements of the commutant (double commutant), each
// certified by its commutation residual against the generators.

namespace detail {

// nullity of { X block-diagonal over ce.groups : [E, X] = 0 for all E } with
// E running over ce.transformed
inline long block_ansatz_nullity(const ClusteredElement& ce, double drop_tol,
                                 double rank_tol, long work_cap = 4000000) {
  const int G = static_cast<int>(ce.groups.size());
  const std::size_t nops = ce.transformed.size();

  // effective constraint norm per pair: off-diagonal blocks as they are,
  // diagonal blocks after removing their scalar part
  std::vector<Eigen::MatrixXd> eff(nops, Eigen::MatrixXd::Zero(G, G));
  UnionFindSmall uf(G);
  for (std::size_t j = 0; j < nops; ++j)
    for (int g = 0; g < G; ++g)
      for (int h = 0; h < G; ++h) {
        const auto& gr = ce.groups[g];
        const auto& hr = ce.groups[h];
        MatC blk = ce.transformed[j].block(gr.start, hr.start, gr.size, hr.size);
        if (g == h) blk.diagonal().array() -= blk.trace() / static_cast<double>(gr.size);
        eff[j](g, h) = max_abs(blk);
        if (eff[j](g, h) > drop_tol * ce.scales[j]) uf.unite(g, h);
      }

  std::map<int, std::vector<int>> comps;
  for (int g = 0; g < G; ++g) comps[uf.find(g)].push_back(g);

  long nullity = 0;
  for (const auto& [root, members] : comps) {
    long unknowns = 0;
    std::map<int, long> offset;
    for (int g : members) {
      offset[g] = unknowns;
      unknowns += ce.groups[g].size * ce.groups[g].size;
    }
    long rows = 0;
    std::vector<std::tuple<std::size_t, int, int>> kept;
    for (std::size_t j = 0; j < nops; ++j)
      for (int g : members)
        for (int h : members)
          if (eff[j](g, h) > drop_tol * ce.scales[j]) {
            kept.emplace_back(j, g, h);
            rows += ce.groups[g].size * ce.groups[h].size;
          }
    if (kept.empty()) {
      nullity += unknowns;
      continue;
    }
    if (rows * unknowns > work_cap)
      throw std::runtime_error(
          "commutant rank system too large (" + std::to_string(rows) + " x " +
          std::to_string(unknowns) + "); dimension exceeds the configured cap");

    MatC C = MatC::Zero(rows, unknowns);
    long r0 = 0;
    for (const auto& [j, g, h] : kept) {
      const auto& gr = ce.groups[g];
      const auto& hr = ce.groups[h];
      const long mg = gr.size, mh = hr.size;
      const MatC B = ce.transformed[j].block(gr.start, hr.start, mg, mh);
      // rows (a,b): sum_c B(a,c) X_h(c,b) - X_g(a,c) B(c,b) = 0
      for (long a = 0; a < mg; ++a)
        for (long b = 0; b < mh; ++b) {
          const long row = r0 + a * mh + b;
          for (long c = 0; c < mh; ++c) C(row, offset[h] + c * mh + b) += B(a, c);
          for (long c = 0; c < mg; ++c) C(row, offset[g] + a * mg + c) -= B(c, b);
        }
      r0 += mg * mh;
    }
    Eigen::BDCSVD<MatC> svd(C);
    const auto& sv = svd.singularValues();
    const double cut = rank_tol * (sv.size() ? sv(0) : 0.0);
    long rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > cut) ++rank;
    nullity += unknowns - rank;
  }
  return nullity;
}

}  // namespace detail

struct DimOptions {
  std::uint64_t seed = 1;
  long size_cap = 128;       // largest Hilbert dimension accepted
  double cluster_tol = 1e-8;
  double rank_tol = 1e-10;   // singular values below rank_tol * s_max count as zero
  double drop_tol = 1e-10;
};

// dimension of the commutant A' of the algebra generated by `gens`
inline long commutant_dim(const std::vector<SpMatC>& gens, DimOptions opts = {}) {
  if (gens.empty()) throw std::invalid_argument("commutant_dim: no generators");
  const long d = gens[0].rows();
  if (d > opts.size_cap)
    throw std::runtime_error("commutant_dim: d = " + std::to_string(d) +
                             " exceeds the size cap " + std::to_string(opts.size_cap));
  Rng rng(derive_seed(opts.seed, "commutant-dim"));
  const MatC H1 = detail::generic_algebra_element(gens, rng, 2);
  std::vector<MatC> extras;
  extras.push_back(detail::generic_algebra_element(gens, rng, 2));
  extras.push_back(detail::generic_algebra_element(gens, rng, 2));
  detail::ClusteredElement ce = detail::cluster_against(H1, extras, opts.cluster_tol);
  return detail::block_ansatz_nullity(ce, opts.drop_tol, opts.rank_tol);
}

namespace detail {

// random Hermitian commutant element R_J ⊗ 1_{d_J} in the adapted basis,
// pushed back to the original basis
inline MatC random_commutant_element(const AlgebraDecomposition& dec, Rng& rng) {
  MatC D = MatC::Zero(dec.d, dec.d);
  for (const auto& sec : dec.sectors) {
    MatC R(sec.n, sec.n);
    for (long a = 0; a < sec.n; ++a) {
      R(a, a) = rng.normal();
      for (long b = a + 1; b < sec.n; ++b) {
        R(a, b) = rng.cnormal();
        R(b, a) = std::conj(R(a, b));
      }
    }
    for (long a = 0; a < sec.n; ++a)
      for (long b = 0; b < sec.n; ++b)
        for (long psi = 0; psi < sec.dim; ++psi)
          D(sec.basis_offset + a * sec.dim + psi, sec.basis_offset + b * sec.dim + psi) = R(a, b);
  }
  return dec.W * D * dec.W.adjoint();
}

inline double commutation_residual(const std::vector<SpMatC>& gens, const MatC& Y) {
  double r = 0.0;
  for (const auto& g : gens) {
    const MatC comm = g * Y - Y * g;
    r = std::max(r, max_abs(comm) / (std::max(1.0, max_abs(g)) * std::max(1.0, max_abs(Y))));
  }
  return r;
}

}  // namespace detail

// dimension of A = (A')' via the double commutant: generic elements of A' are
// built, certified by their commutation residual with every generator, and
// the commutant of the pair is counted with the same rank machinery
inline long algebra_closure_dim(const std::vector<SpMatC>& gens, DimOptions opts = {}) {
  if (gens.empty()) throw std::invalid_argument("algebra_closure_dim: no generators");
  const long d = gens[0].rows();
  if (d > opts.size_cap)
    throw std::runtime_error("algebra_closure_dim: d = " + std::to_string(d) +
                             " exceeds the size cap " + std::to_string(opts.size_cap));
  DecomposeOptions dopts;
  dopts.seed = derive_seed(opts.seed, "closure-decompose");
  dopts.cluster_tol = opts.cluster_tol;
  const AlgebraDecomposition dec = decompose(gens, dopts);

  Rng rng(derive_seed(opts.seed, "closure-dim"));
  const MatC Y1 = detail::random_commutant_element(dec, rng);
  std::vector<MatC> extras;
  extras.push_back(detail::random_commutant_element(dec, rng));
  extras.push_back(detail::random_commutant_element(dec, rng));
  for (const MatC* y : std::initializer_list<const MatC*>{&Y1, &extras[0], &extras[1]}) {
    const double res = detail::commutation_residual(gens, *y);
    if (res > 1e-9)
      throw std::runtime_error("algebra_closure_dim: commutant element residual " + fmt12(res));
  }
  detail::ClusteredElement ce = detail::cluster_against(Y1, extras, opts.cluster_tol);
  return detail::block_ansatz_nullity(ce, opts.drop_tol, opts.rank_tol);
}

// orthonormal (Hilbert-Schmidt) basis of A', one matrix per (sector, a, b):
// W (E_ab ⊗ 1_{d_J}) W† / sqrt(d_J). Every element is certified against the
// generators before being returned.
inline std::vector<MatC> commutant_basis(const std::vector<SpMatC>& gens, DimOptions opts = {}) {
  if (gens.empty()) throw std::invalid_argument("commutant_basis: no generators");
  const long d = gens[0].rows();
  if (d > opts.size_cap)
    throw std::runtime_error("commutant_basis: d = " + std::to_string(d) +
                             " exceeds the size cap " + std::to_string(opts.size_cap) +
                             " (the basis holds dim A' matrices of size d x d)");
  DecomposeOptions dopts;
  dopts.seed = derive_seed(opts.seed, "basis-decompose");
  dopts.cluster_tol = opts.cluster_tol;
  const AlgebraDecomposition dec = decompose(gens, dopts);

  std::vector<MatC> basis;
  basis.reserve(dec.dim_Aprime);
  for (const auto& sec : dec.sectors) {
    const double norm = 1.0 / std::sqrt(static_cast<double>(sec.dim));
    for (long a = 0; a < sec.n; ++a)
      for (long b = 0; b < sec.n; ++b) {
        MatC Y = MatC::Zero(d, d);
        for (long psi = 0; psi < sec.dim; ++psi)
          Y += dec.W.col(sec.basis_offset + a * sec.dim + psi) *
               dec.W.col(sec.basis_offset + b * sec.dim + psi).adjoint();
        basis.push_back(norm * Y);
      }
  }
  for (const auto& y : basis) {
    const double res = detail::commutation_residual(gens, y);
    if (res > 1e-9)
      throw std::runtime_error("commutant_basis: element residual " + fmt12(res));
  }
  return basis;
}

}  // namespace fragcgp
