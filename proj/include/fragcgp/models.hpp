#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "fragcgp/numeric.hpp"
#include "fragcgp/rng.hpp"

namespace fragcgp {

enum class ModelId { xxz, tl, tjz };

inline std::string to_string(ModelId m) {
  switch (m) {
    case ModelId::xxz: return "xxz";
    case ModelId::tl: return "tl";
    case ModelId::tjz: return "tjz";
  }
  return "?";
}

inline ModelId model_from_string(const std::string& s) {
  if (s == "xxz") return ModelId::xxz;
  if (s == "tl") return ModelId::tl;
  if (s == "tjz" || s == "t-jz" || s == "tJz") return ModelId::tjz;
  throw std::invalid_argument("unknown model '" + s + "' (expected xxz|tl|tjz)");
}

inline int local_dimension(ModelId m) { return m == ModelId::xxz ? 2 : 3; }

inline void check_size(ModelId m, int L) {
  if (L < 1) throw std::invalid_argument("L must be >= 1");
  if (m == ModelId::tl && (L < 2 || L % 2 != 0))
    throw std::invalid_argument("TL model requires even L >= 2 (sector formulas hold for even chains)");
}

// ---------------------------------------------------------------------------
// couplings

struct CouplingSet {
  ModelId model = ModelId::xxz;
  int L = 0;
  std::uint64_t seed = 0;
  // label -> value in [0,1), e.g. "Jperp[2]" = bond coupling between sites 2,3
  std::map<std::string, double> values;

  double at(const std::string& label) const {
    auto it = values.find(label);
    if (it == values.end()) throw std::invalid_argument("missing coupling " + label);
    return it->second;
  }
};

namespace detail {

// One stream per (model, coupling type); entry j of a stream is the coupling
// at site/bond j. Growing L only appends entries, so the couplings at size L
// are a prefix of those at size L+1.
inline void draw_stream(CouplingSet& cs, const std::string& type, int count) {
  Rng rng(derive_seed(cs.seed, to_string(cs.model) + ":" + type));
  for (int j = 1; j <= count; ++j) {
    const double v = rng.uniform();
    cs.values[type + "[" + std::to_string(j) + "]"] = v;
  }
}

}  // namespace detail

inline CouplingSet sample_couplings(ModelId model, int L, std::uint64_t seed) {
  check_size(model, L);
  CouplingSet cs;
  cs.model = model;
  cs.L = L;
  cs.seed = seed;
  switch (model) {
    case ModelId::xxz:
      detail::draw_stream(cs, "Jperp", L - 1);
      detail::draw_stream(cs, "Jz", L - 1);
      detail::draw_stream(cs, "h", L);
      break;
    case ModelId::tl:
      detail::draw_stream(cs, "J", L - 1);
      break;
    case ModelId::tjz:
      detail::draw_stream(cs, "t", L - 1);
      detail::draw_stream(cs, "Jz", L - 1);
      detail::draw_stream(cs, "h", L);
      detail::draw_stream(cs, "g", L);
      break;
  }
  return cs;
}

// ---------------------------------------------------------------------------
// Hamiltonian families H = sum_j J_j h_j

struct HamiltonianFamily {
  ModelId model = ModelId::xxz;
  int L = 0;
  int local_dim = 2;
  long d = 0;
  std::vector<std::pair<std::string, SpMatC>> generators;  // (coupling label, h)
  CouplingSet couplings;
  std::string boundary = "open";

  std::vector<SpMatC> generator_matrices() const {
    std::vector<SpMatC> g;
    g.reserve(generators.size());
    for (const auto& [label, h] : generators) g.push_back(h);
    return g;
  }

  SpMatC hamiltonian_sparse() const {
    SpMatC h(d, d);
    for (const auto& [label, gen] : generators) h += couplings.at(label) * gen;
    return h;
  }

  MatC hamiltonian() const { return MatC(hamiltonian_sparse()); }
};

namespace detail {

inline SpMatC sparse_from_triplets(long n, const std::vector<Eigen::Triplet<cxd>>& t) {
  SpMatC m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

inline SpMatC pauli(char which) {
  std::vector<Eigen::Triplet<cxd>> t;
  switch (which) {
    case 'x': t = {{0, 1, 1.0}, {1, 0, 1.0}}; break;
    case 'y': t = {{0, 1, cxd(0, -1)}, {1, 0, cxd(0, 1)}}; break;
    case 'z': t = {{0, 0, 1.0}, {1, 1, -1.0}}; break;
    default: throw std::logic_error("bad pauli");
  }
  return sparse_from_triplets(2, t);
}

inline void validate(const CouplingSet& cs, ModelId expected) {
  if (cs.model != expected)
    throw std::invalid_argument("coupling set is for model " + to_string(cs.model) +
                                ", expected " + to_string(expected));
  check_size(expected, cs.L);
  // sampled couplings live in [0,1); hand-built sets may use the endpoint
  for (const auto& [k, v] : cs.values)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("coupling " + k + " outside [0,1]");
}

}  // namespace detail

// spin-1/2 XXZ chain with on-site fields, open boundary:
// generators {sx_j sx_{j+1} + sy_j sy_{j+1}, sz_j sz_{j+1}, sz_j}
inline HamiltonianFamily build_xxz(const CouplingSet& cs) {
  detail::validate(cs, ModelId::xxz);
  const int L = cs.L;
  HamiltonianFamily fam;
  fam.model = ModelId::xxz;
  fam.L = L;
  fam.local_dim = 2;
  fam.d = ipow(2, L);
  fam.couplings = cs;

  const SpMatC sx = detail::pauli('x');
  const SpMatC sy = detail::pauli('y');
  const SpMatC sz = detail::pauli('z');
  const SpMatC xxyy = SpMatC(kron_sparse(sx, sx) + kron_sparse(sy, sy));
  const SpMatC zz = kron_sparse(sz, sz);

  for (int j = 1; j < L; ++j)
    fam.generators.emplace_back("Jperp[" + std::to_string(j) + "]", op_on_bond(xxyy, j - 1, L, 2));
  for (int j = 1; j < L; ++j)
    fam.generators.emplace_back("Jz[" + std::to_string(j) + "]", op_on_bond(zz, j - 1, L, 2));
  for (int j = 1; j <= L; ++j)
    fam.generators.emplace_back("h[" + std::to_string(j) + "]", op_on_site(sz, j - 1, L, 2));
  return fam;
}

// spin-1 Temperley-Lieb chain: generators e_{j,j+1} = 3 |psi><psi| with
// |psi> = (|00> + |11> + |22>)/sqrt(3); e^2 = 3 e and e_j e_{j+1} e_j = e_j
inline HamiltonianFamily build_tl(const CouplingSet& cs) {
  detail::validate(cs, ModelId::tl);
  const int L = cs.L;
  HamiltonianFamily fam;
  fam.model = ModelId::tl;
  fam.L = L;
  fam.local_dim = 3;
  fam.d = ipow(3, L);
  fam.couplings = cs;

  std::vector<Eigen::Triplet<cxd>> t;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) t.emplace_back(a * 3 + a, b * 3 + b, 1.0);
  const SpMatC e = detail::sparse_from_triplets(9, t);

  for (int j = 1; j < L; ++j)
    fam.generators.emplace_back("J[" + std::to_string(j) + "]", op_on_bond(e, j - 1, L, 3));
  return fam;
}

// t-Jz chain in the no-double-occupancy occupation basis {0, up, down} per
// site. Hopping moves a particle to an adjacent empty site and preserves the
// left-to-right spin pattern; amplitudes are real -t (open chain, no
// Jordan-Wigner string crosses an occupied site in a nearest-neighbor move).
inline HamiltonianFamily build_tjz(const CouplingSet& cs) {
  detail::validate(cs, ModelId::tjz);
  const int L = cs.L;
  HamiltonianFamily fam;
  fam.model = ModelId::tjz;
  fam.L = L;
  fam.local_dim = 3;
  fam.d = ipow(3, L);
  fam.couplings = cs;

  // local states: 0 = hole, 1 = up, 2 = down; Sz = diag(0, 1, -1)
  const SpMatC sz = detail::sparse_from_triplets(3, {{1, 1, 1.0}, {2, 2, -1.0}});
  const SpMatC sz2 = detail::sparse_from_triplets(3, {{1, 1, 1.0}, {2, 2, 1.0}});
  // hop = -sum_sigma (|0,sigma><sigma,0| + h.c.) on the bond, generator sign
  // chosen so that H = sum J h with J = t in [0,1) gives amplitude -t
  std::vector<Eigen::Triplet<cxd>> t;
  for (int sig = 1; sig <= 2; ++sig) {
    const int from = sig * 3 + 0;  // |sigma, 0>
    const int to = 0 * 3 + sig;    // |0, sigma>
    t.emplace_back(to, from, -1.0);
    t.emplace_back(from, to, -1.0);
  }
  const SpMatC hop = detail::sparse_from_triplets(9, t);
  const SpMatC zz = kron_sparse(sz, sz);

  for (int j = 1; j < L; ++j)
    fam.generators.emplace_back("t[" + std::to_string(j) + "]", op_on_bond(hop, j - 1, L, 3));
  for (int j = 1; j < L; ++j)
    fam.generators.emplace_back("Jz[" + std::to_string(j) + "]", op_on_bond(zz, j - 1, L, 3));
  for (int j = 1; j <= L; ++j)
    fam.generators.emplace_back("h[" + std::to_string(j) + "]", op_on_site(sz, j - 1, L, 3));
  for (int j = 1; j <= L; ++j)
    fam.generators.emplace_back("g[" + std::to_string(j) + "]", op_on_site(sz2, j - 1, L, 3));
  return fam;
}

inline HamiltonianFamily build_family(ModelId model, int L, std::uint64_t seed) {
  const CouplingSet cs = sample_couplings(model, L, seed);
  switch (model) {
    case ModelId::xxz: return build_xxz(cs);
    case ModelId::tl: return build_tl(cs);
    case ModelId::tjz: return build_tjz(cs);
  }
  throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// analytically known sector data

// q-deformed integer [n]_q = (q^n - q^-n)/(q - q^-1); limit n at q = 1
inline double q_deformed_integer(double n, double q) {
  if (q <= 0.0) throw std::invalid_argument("q must be positive");
  if (q == 1.0) return n;
  return (std::pow(q, n) - std::pow(q, -n)) / (q - 1.0 / q);
}

// q + 1/q = 3 (number of local degrees of freedom of the spin-1 chain)
inline constexpr double kTlQ = 2.6180339887498948482;  // (3 + sqrt 5)/2

struct AnalyticSector {
  int label = 0;
  long n = 1;       // multiplicity as represented in the decomposition
  long dim = 1;     // d_J
  double n_q = 1.0; // q-deformed value (equals n for XXZ / t-Jz)
};

struct AnalyticSectorTable {
  ModelId model = ModelId::xxz;
  int L = 0;
  std::vector<AnalyticSector> sectors;
  long K = 0;

  long dimension() const {
    long s = 0;
    for (const auto& sec : sectors) s += sec.n * sec.dim;
    return s;
  }
};

inline long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  k = std::min(k, n - k);
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline long round_to_integer(double x, double tol, const std::string& what) {
  const double r = std::round(x);
  if (std::abs(x - r) > tol)
    throw std::runtime_error(what + " = " + fmt12(x) + " is not integral within " + fmt12(tol));
  return static_cast<long>(r);
}

// closed form K for the TL chain: q^{-L} (q^{L+2} - 1)^2 / (q^2 - 1)^2
inline double tl_K_closed_form(int L) {
  const double q = kTlQ;
  const double num = std::pow(q, L + 2) - 1.0;
  return std::pow(q, -L) * num * num / ((q * q - 1.0) * (q * q - 1.0));
}

inline AnalyticSectorTable analytic_sectors(ModelId model, int L) {
  check_size(model, L);
  AnalyticSectorTable tab;
  tab.model = model;
  tab.L = L;
  switch (model) {
    case ModelId::xxz: {
      // J = number of down spins, d_J = C(L, J), n_J = 1
      for (int J = 0; J <= L; ++J)
        tab.sectors.push_back({J, 1, binomial(L, J), 1.0});
      tab.K = L + 1;
      break;
    }
    case ModelId::tl: {
      // J = 0..L/2, n_J = [2J+1]_q, d_J = C(L, L/2+J) - C(L, L/2+J+1).
      // The q-deformed multiplicities are exact integers here (q + 1/q = 3),
      // which is what the numeric decomposition reproduces.
      for (int J = 0; J <= L / 2; ++J) {
        AnalyticSector sec;
        sec.label = J;
        sec.n_q = q_deformed_integer(2 * J + 1, kTlQ);
        sec.n = round_to_integer(sec.n_q, 1e-6, "TL multiplicity [2J+1]_q");
        sec.dim = binomial(L, L / 2 + J) - binomial(L, L / 2 + J + 1);
        tab.sectors.push_back(sec);
      }
      tab.K = round_to_integer(tl_K_closed_form(L), 1e-6, "TL Krylov count");
      break;
    }
    case ModelId::tjz: {
      // one sector per spin pattern w in {up,down}^k, k = 0..L; d = C(L, k)
      int label = 0;
      for (int k = 0; k <= L; ++k) {
        const long patterns = ipow(2, k);
        for (long p = 0; p < patterns; ++p)
          tab.sectors.push_back({label++, 1, binomial(L, k), 1.0});
      }
      tab.K = ipow(2, L + 1) - 1;
      break;
    }
  }
  long sum = tab.dimension();
  const long d = ipow(local_dimension(model), L);
  if (sum != d)
    throw std::logic_error("sector table dimension mismatch: " + std::to_string(sum) +
                           " != " + std::to_string(d));
  long ksum = 0;
  for (const auto& s : tab.sectors) ksum += s.n;
  if (ksum != tab.K)
    throw std::logic_error("sector table K mismatch");
  return tab;
}

// ---------------------------------------------------------------------------
// product-basis Krylov graph

struct KrylovGraph {
  std::vector<std::vector<long>> components;  // product-state indices, each sorted
  // false for TL: its Krylov subspaces are not spanned by product states, the
  // graph components are returned anyway but are not the Krylov decomposition
  bool product_state_krylov = true;
};

namespace detail {

struct UnionFind {
  std::vector<long> parent;
  explicit UnionFind(long n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  long find(long x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(long a, long b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace detail

inline KrylovGraph krylov_graph_decompose(const HamiltonianFamily& fam) {
  detail::UnionFind uf(fam.d);
  for (const auto& [label, gen] : fam.generators)
    for (int k = 0; k < gen.outerSize(); ++k)
      for (SpMatC::InnerIterator it(gen, k); it; ++it)
        if (it.row() != it.col() && std::abs(it.value()) > 1e-14) uf.unite(it.row(), it.col());

  std::map<long, std::vector<long>> byroot;
  for (long i = 0; i < fam.d; ++i) byroot[uf.find(i)].push_back(i);

  KrylovGraph g;
  for (auto& [root, members] : byroot) g.components.push_back(std::move(members));
  g.product_state_krylov = (fam.model != ModelId::tl);
  return g;
}

}  // namespace fragcgp
