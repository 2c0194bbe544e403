#include <catch2/catch_amalgamated.hpp>

#include "fragcgp/io.hpp"
#include "oracles.hpp"

using namespace fragcgp;

TEST_CASE("12-significant-digit round trip", "[io]") {
  Rng rng(2);
  for (int k = 0; k < 200; ++k) {
    const double x = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-6.0, 6.0));
    const std::string s = fmt12(x);
    const double back = std::strtod(s.c_str(), nullptr);
    REQUIRE(fmt12(back) == s);  // stable at the declared precision
    REQUIRE(std::abs(back - x) <= 1e-11 * std::abs(x));
  }
  REQUIRE(fmt12(0.0) == "0");
  REQUIRE(fmt12(1.0 / 3.0) == "0.333333333333");
}

TEST_CASE("key-value documents round trip", "[io]") {
  KvDoc doc;
  doc.set("model", "xxz");
  doc.set("L", 4L);
  doc.set("value", 0.125);
  const std::string text = doc.render();
  const KvDoc back = KvDoc::parse(text);
  REQUIRE(back.get("model") == "xxz");
  REQUIRE(back.get("L") == "4");
  REQUIRE(back.get("value") == "0.125");
  REQUIRE(back.render() == text);
  REQUIRE_THROWS_AS(KvDoc::parse("no equals sign here"), std::invalid_argument);
  REQUIRE_THROWS_AS(back.get("missing"), std::invalid_argument);
  // comments and blank lines are ignored
  const KvDoc c = KvDoc::parse("# comment\n\nkey = value\n");
  REQUIRE(c.get("key") == "value");
}

TEST_CASE("model spec text", "[io]") {
  const HamiltonianFamily fam = build_family(ModelId::tjz, 3, 9);
  const KvDoc doc = KvDoc::parse(model_spec_text(fam));
  REQUIRE(doc.get("model") == "tjz");
  REQUIRE(doc.get("L") == "3");
  REQUIRE(doc.get("seed") == "9");
  REQUIRE(doc.get("boundary") == "open");
}

TEST_CASE("decomposition report", "[io]") {
  const AlgebraDecomposition dec = decompose(build_family(ModelId::xxz, 3, 0));
  const KvDoc doc = KvDoc::parse(decomposition_report(dec));
  REQUIRE(doc.get("d") == "8");
  REQUIRE(doc.get("K") == "4");
  REQUIRE(doc.get("d_Z") == "4");
  REQUIRE(doc.get("dim_A") == "20");
  REQUIRE(doc.get("dim_Aprime") == "4");
  REQUIRE(doc.get("sectors") == "4");
  REQUIRE(doc.get("sector.0.n") == "1");
}

TEST_CASE("sweep CSV round trip is byte exact", "[io]") {
  SweepOptions opts;
  opts.n_times = 25;
  const auto recs = sweep(ModelId::xxz, {2, 3}, opts);
  const std::string csv = write_sweep_csv(recs);
  const auto back = parse_sweep_csv(csv);
  REQUIRE(back.size() == recs.size());
  REQUIRE(write_sweep_csv(back) == csv);

  REQUIRE_THROWS_AS(parse_sweep_csv("bogus,header\n1,2\n"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_sweep_csv(std::string(kSweepCsvHeader) + "\n1,2,3\n"),
                    std::invalid_argument);
}

TEST_CASE("time-sample CSV", "[io]") {
  const HamiltonianFamily fam = build_family(ModelId::xxz, 2, 0);
  const AlgebraDecomposition dec = adapted_decomposition(fam);
  std::vector<TimeSample> samples;
  long_time_avg_cgp(fam, dec, 10, 100.0, 1100.0, 1, &samples);
  const std::string csv = write_time_samples_csv(fam, dec.K, 1, samples);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  REQUIRE(line == kTimeCsvHeader);
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  REQUIRE(rows == 10);
}

TEST_CASE("MC CSV", "[io]") {
  std::vector<double> samples = {0.1, 0.2, 0.25};
  const std::string csv = write_mc_csv("xxz:L=2", samples);
  REQUIRE(csv.rfind(kMcCsvHeader, 0) == 0);
  REQUIRE(csv.find("xxz:L=2,2,0.25") != std::string::npos);
}

TEST_CASE("coordinate export round trip", "[io]") {
  const HamiltonianFamily fam = build_family(ModelId::tl, 2, 0);
  const SpMatC gen = fam.generators[0].second;
  const MatC back = parse_coordinate(export_coordinate(gen));
  REQUIRE(max_abs(MatC(back - MatC(gen))) < 1e-12);

  const AlgebraDecomposition dec = decompose(fam);
  const MatC w_back = parse_coordinate(export_coordinate(dec.W, 0.0));
  REQUIRE(max_abs(MatC(w_back - dec.W)) < 1e-11);

  REQUIRE_THROWS_AS(parse_coordinate("not a header"), std::invalid_argument);
}

TEST_CASE("plot data export", "[io]") {
  SweepOptions opts;
  opts.n_times = 25;
  const auto recs = sweep(ModelId::tjz, {1, 2, 3}, opts);
  const auto [fdat, kdat] = export_plotdata(write_sweep_csv(recs));
  std::istringstream fin(fdat), kin(kdat);
  std::string line;
  int rows = 0;
  double prev_k = -1.0;
  while (std::getline(kin, line)) {
    std::istringstream ls(line);
    double x = 0, y = 0;
    ls >> x >> y;
    REQUIRE(x == Catch::Approx(std::log10(static_cast<double>(recs[rows].d))).margin(1e-12));
    REQUIRE(y == Catch::Approx(std::log10(static_cast<double>(recs[rows].K))).margin(1e-12));
    REQUIRE(y > prev_k);  // K grows with system size
    prev_k = y;
    ++rows;
  }
  REQUIRE(rows == 3);
  rows = 0;
  while (std::getline(fin, line)) ++rows;
  REQUIRE(rows == 3);

  REQUIRE_THROWS_AS(export_plotdata(std::string(kSweepCsvHeader) + "\n"), std::invalid_argument);
}
