#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "fragcgp/algebra.hpp"
#include "fragcgp/dynamics.hpp"
#include "fragcgp/haar.hpp"
#include "oracles.hpp"

using namespace fragcgp;

namespace {

std::vector<SpMatC> single_site_gens(const std::vector<MatC>& dense) {
  std::vector<SpMatC> out;
  for (const auto& m : dense) out.push_back(m.sparseView());
  return out;
}

std::multiset<std::pair<long, long>> sector_multiset(const AlgebraDecomposition& dec) {
  std::multiset<std::pair<long, long>> s;
  for (const auto& sec : dec.sectors) s.insert({sec.n, sec.dim});
  return s;
}

std::multiset<std::pair<long, long>> sector_multiset(const AnalyticSectorTable& tab) {
  std::multiset<std::pair<long, long>> s;
  for (const auto& sec : tab.sectors) s.insert({sec.n, sec.dim});
  return s;
}

// entrywise check of W' h W against the 1_{n_J} (x) M_J block form
double generator_block_residual(const AlgebraDecomposition& dec, const SpMatC& gen) {
  const MatC t = dec.W.adjoint() * MatC(gen) * dec.W;
  double viol = 0.0;
  for (const auto& sec : dec.sectors) {
    const long off = sec.basis_offset;
    const MatC ref = t.block(off, off, sec.dim, sec.dim);
    for (long c1 = 0; c1 < sec.n; ++c1)
      for (long c2 = 0; c2 < sec.n; ++c2) {
        const MatC blk = t.block(off + c1 * sec.dim, off + c2 * sec.dim, sec.dim, sec.dim);
        viol = std::max(viol, c1 == c2 ? max_abs(MatC(blk - ref)) : max_abs(blk));
      }
    const long w = sec.n * sec.dim;
    if (off > 0) viol = std::max(viol, max_abs(MatC(t.block(off, 0, w, off))));
    if (off + w < dec.d)
      viol = std::max(viol, max_abs(MatC(t.block(off, off + w, w, dec.d - off - w))));
  }
  return viol;
}

void check_invariants(const AlgebraDecomposition& dec, const std::vector<SpMatC>& gens) {
  REQUIRE(unitarity_error(dec.W) < 1e-10);
  long nd = 0, na = 0, nap = 0, k = 0;
  for (const auto& sec : dec.sectors) {
    REQUIRE(sec.n >= 1);
    REQUIRE(sec.dim >= 1);
    nd += sec.n * sec.dim;
    na += sec.dim * sec.dim;
    nap += sec.n * sec.n;
    k += sec.n;
  }
  REQUIRE(nd == dec.d);
  REQUIRE(na == dec.dim_A);
  REQUIRE(nap == dec.dim_Aprime);
  REQUIRE(k == dec.K);
  REQUIRE(dec.d_Z == static_cast<long>(dec.sectors.size()));
  REQUIRE(count_K(dec) == dec.K);
  for (const auto& g : gens) REQUIRE(generator_block_residual(dec, g) < 1e-9);
}

}  // namespace

TEST_CASE("single diagonal generator: abelian algebra", "[algebra]") {
  const auto gens = single_site_gens({oracles::pauli_dense('z')});
  const AlgebraDecomposition dec = decompose(gens);
  REQUIRE(dec.K == 2);
  REQUIRE(dec.d_Z == 2);
  REQUIRE(sector_multiset(dec) == std::multiset<std::pair<long, long>>{{1, 1}, {1, 1}});
  check_invariants(dec, gens);
  REQUIRE(commutant_dim(gens) == 2);
  REQUIRE(algebra_closure_dim(gens) == 2);
  REQUIRE(commutant_basis(gens).size() == 2);
}

TEST_CASE("irreducible generator pair: full matrix algebra", "[algebra]") {
  const auto gens = single_site_gens({oracles::pauli_dense('x'), oracles::pauli_dense('z')});
  const AlgebraDecomposition dec = decompose(gens);
  REQUIRE(dec.K == 1);
  REQUIRE(dec.d_Z == 1);
  REQUIRE(dec.sectors[0].n == 1);
  REQUIRE(dec.sectors[0].dim == 2);
  check_invariants(dec, gens);
  REQUIRE(commutant_dim(gens) == 1);
  REQUIRE(algebra_closure_dim(gens) == 4);
  REQUIRE(commutant_basis(gens).size() == 1);
}

TEST_CASE("XXZ decompositions match the magnetization sectors", "[algebra]") {
  for (int L = 2; L <= 5; ++L) {
    const HamiltonianFamily fam = build_family(ModelId::xxz, L, 0);
    const auto gens = fam.generator_matrices();
    const AlgebraDecomposition dec = decompose(gens);
    REQUIRE(dec.K == L + 1);
    REQUIRE(sector_multiset(dec) == sector_multiset(analytic_sectors(ModelId::xxz, L)));
    check_invariants(dec, gens);
  }
}

TEST_CASE("XXZ L=3 commutant dimension", "[algebra]") {
  const auto gens = build_family(ModelId::xxz, 3, 1).generator_matrices();
  REQUIRE(commutant_dim(gens) == 4);  // one singlet per magnetization sector
  REQUIRE(commutant_basis(gens).size() == 4);
  REQUIRE(algebra_closure_dim(gens) == 1 + 9 + 9 + 1);
}

TEST_CASE("XXZ L=2 algebra dimension", "[algebra]") {
  const auto gens = build_family(ModelId::xxz, 2, 1).generator_matrices();
  REQUIRE(algebra_closure_dim(gens) == 6);  // 1 + 4 + 1
}

TEST_CASE("t-Jz decompositions match the pattern sectors", "[algebra]") {
  for (int L = 1; L <= 4; ++L) {
    const HamiltonianFamily fam = build_family(ModelId::tjz, L, 0);
    const auto gens = fam.generator_matrices();
    const AlgebraDecomposition dec = decompose(gens);
    REQUIRE(dec.K == ipow(2, L + 1) - 1);
    REQUIRE(sector_multiset(dec) == sector_multiset(analytic_sectors(ModelId::tjz, L)));
    if (L <= 3) check_invariants(dec, gens);
  }
}

TEST_CASE("TL decompositions match the q-deformed multiplicities", "[algebra]") {
  for (const int L : {2, 4}) {
    const HamiltonianFamily fam = build_family(ModelId::tl, L, 0);
    const auto gens = fam.generator_matrices();
    const AlgebraDecomposition dec = decompose(gens);
    REQUIRE(dec.K == analytic_sectors(ModelId::tl, L).K);
    REQUIRE(sector_multiset(dec) == sector_multiset(analytic_sectors(ModelId::tl, L)));
    check_invariants(dec, gens);
  }
}

TEST_CASE("TL L=2 closure dimension is 2", "[algebra]") {
  const auto gens = build_family(ModelId::tl, 2, 0).generator_matrices();
  REQUIRE(algebra_closure_dim(gens) == 2);  // span{1, e}
  REQUIRE(commutant_dim(gens) == 65);       // 1 + 8^2
}

TEST_CASE("commutant basis agrees with the superoperator nullspace", "[algebra]") {
  std::vector<std::vector<SpMatC>> cases;
  cases.push_back(single_site_gens({oracles::pauli_dense('z')}));
  cases.push_back(single_site_gens({oracles::pauli_dense('x'), oracles::pauli_dense('z')}));
  cases.push_back(build_family(ModelId::xxz, 2, 3).generator_matrices());
  cases.push_back(build_family(ModelId::tl, 2, 3).generator_matrices());
  cases.push_back(build_family(ModelId::tjz, 2, 3).generator_matrices());

  for (const auto& gens : cases) {
    const std::vector<MatC> mine = commutant_basis(gens);
    const std::vector<MatC> ref = oracles::commutant_basis_superop(gens);
    REQUIRE(mine.size() == ref.size());
    REQUIRE(commutant_dim(gens) == static_cast<long>(mine.size()));

    // orthonormality in the Hilbert-Schmidt inner product
    for (std::size_t a = 0; a < mine.size(); ++a)
      for (std::size_t b = 0; b < mine.size(); ++b) {
        const cxd g = (mine[a].adjoint() * mine[b]).trace();
        REQUIRE(std::abs(g - (a == b ? 1.0 : 0.0)) < 1e-9);
      }
    // each oracle element projects fully onto the constructed span
    for (const auto& y : ref) {
      MatC proj = MatC::Zero(y.rows(), y.cols());
      for (const auto& b : mine) proj += (b.adjoint() * y).trace() * b;
      REQUIRE(max_abs(MatC(proj - y)) < 1e-8);
    }
  }
}

TEST_CASE("double commutant contains the generators", "[algebra]") {
  for (auto gens : {build_family(ModelId::xxz, 2, 5).generator_matrices(),
                    single_site_gens({oracles::pauli_dense('z')})}) {
    // Hermitian split of the commutant basis, then its commutant again
    std::vector<SpMatC> comm_gens;
    for (const auto& y : commutant_basis(gens)) {
      const MatC h = 0.5 * (y + MatC(y.adjoint()));
      const MatC a = cxd(0, -0.5) * (y - MatC(y.adjoint()));
      if (max_abs(h) > 1e-12) comm_gens.push_back(h.sparseView());
      if (max_abs(a) > 1e-12) comm_gens.push_back(a.sparseView());
    }
    const std::vector<MatC> dbl = oracles::commutant_basis_superop(comm_gens);
    for (const auto& g : gens) {
      const MatC gd(g);
      MatC proj = MatC::Zero(gd.rows(), gd.cols());
      for (const auto& b : dbl) proj += (b.adjoint() * gd).trace() * b;
      REQUIRE(max_abs(MatC(proj - gd)) < 1e-9);
    }
  }
}

TEST_CASE("numeric Krylov spans match the product-state components", "[algebra]") {
  for (const auto& [model, L] : std::vector<std::pair<ModelId, int>>{{ModelId::xxz, 3},
                                                                     {ModelId::tjz, 2}}) {
    const HamiltonianFamily fam = build_family(model, L, 0);
    const AlgebraDecomposition dec = decompose(fam);
    const KrylovGraph graph = krylov_graph_decompose(fam);
    REQUIRE(dec.sectors.size() == graph.components.size());
    std::vector<bool> used(graph.components.size(), false);
    for (const auto& sec : dec.sectors) {
      MatC P = MatC::Zero(fam.d, fam.d);
      for (long c = sec.basis_offset; c < sec.basis_offset + sec.n * sec.dim; ++c)
        P += dec.W.col(c) * dec.W.col(c).adjoint();
      bool matched = false;
      for (std::size_t c = 0; c < graph.components.size(); ++c) {
        if (used[c] || graph.components[c].size() != static_cast<std::size_t>(sec.n * sec.dim))
          continue;
        MatC Q = MatC::Zero(fam.d, fam.d);
        for (const long s : graph.components[c]) Q(s, s) = 1.0;
        if (max_abs(MatC(P - Q)) < 1e-8) {
          used[c] = true;
          matched = true;
          break;
        }
      }
      REQUIRE(matched);
    }
  }
}

TEST_CASE("product-basis decomposition matches the analytic tables", "[algebra]") {
  for (const auto& [model, L] : std::vector<std::pair<ModelId, int>>{{ModelId::xxz, 4},
                                                                     {ModelId::tjz, 3}}) {
    const HamiltonianFamily fam = build_family(model, L, 0);
    const AlgebraDecomposition dec = product_basis_decomposition(fam);
    check_invariants(dec, fam.generator_matrices());
    REQUIRE(sector_multiset(dec) == sector_multiset(analytic_sectors(model, L)));
    REQUIRE(dec.K == analytic_sectors(model, L).K);
  }
  REQUIRE_THROWS_AS(product_basis_decomposition(build_family(ModelId::tl, 2, 0)),
                    std::invalid_argument);
}

TEST_CASE("decompose is deterministic per seed", "[algebra]") {
  const auto gens = build_family(ModelId::tl, 4, 0).generator_matrices();
  DecomposeOptions opts;
  opts.seed = 12;
  const AlgebraDecomposition a = decompose(gens, opts);
  const AlgebraDecomposition b = decompose(gens, opts);
  REQUIRE(max_abs(MatC(a.W - b.W)) == 0.0);
  REQUIRE(sector_multiset(a) == sector_multiset(b));
  opts.seed = 13;
  const AlgebraDecomposition c = decompose(gens, opts);
  REQUIRE(sector_multiset(a) == sector_multiset(c));
}

TEST_CASE("verify_block_structure discriminates", "[algebra]") {
  const HamiltonianFamily fam = build_family(ModelId::xxz, 3, 7);
  const AlgebraDecomposition dec = decompose(fam);
  const SpectralData sd = diagonalize(fam.hamiltonian());
  const auto [ok_evo, viol_evo] = verify_block_structure(dec, evolve(sd, 1.37));
  REQUIRE(ok_evo);
  REQUIRE(viol_evo < 1e-8);

  Rng rng(99);
  const MatC full_haar = haar_unitary(fam.d, rng);
  const auto [ok_haar, viol_haar] = verify_block_structure(dec, full_haar);
  REQUIRE_FALSE(ok_haar);
  REQUIRE(viol_haar > 1e-2);

  const BlockUnitary bu = sample_haar_block(dec, 5);
  const auto [ok_block, viol_block] = verify_block_structure(dec, embed(bu, dec));
  REQUIRE(ok_block);
}

TEST_CASE("input validation and size caps", "[algebra]") {
  REQUIRE_THROWS_AS(decompose(std::vector<SpMatC>{}), std::invalid_argument);

  MatC nonherm = MatC::Zero(2, 2);
  nonherm(0, 1) = 1.0;
  REQUIRE_THROWS_AS(decompose(single_site_gens({nonherm})), std::invalid_argument);

  const auto big = build_family(ModelId::tjz, 5, 0).generator_matrices();  // d = 243
  REQUIRE_THROWS_WITH(commutant_dim(big), Catch::Matchers::ContainsSubstring("cap"));
  REQUIRE_THROWS_WITH(commutant_basis(big), Catch::Matchers::ContainsSubstring("cap"));
  REQUIRE_THROWS_WITH(algebra_closure_dim(big), Catch::Matchers::ContainsSubstring("cap"));
}
