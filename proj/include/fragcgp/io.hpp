#pragma once

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fragcgp/algebra.hpp"
#include "fragcgp/dynamics.hpp"
#include "fragcgp/haar.hpp"
#include "fragcgp/models.hpp"
#include "fragcgp/numeric.hpp"
#include "fragcgp/scaling.hpp"

namespace fragcgp {

// ---------------------------------------------------------------------------
// flat key = value documents (reports and config files)

struct KvDoc {
  std::vector<std::pair<std::string, std::string>> items;

  void set(const std::string& k, const std::string& v) { items.emplace_back(k, v); }
  void set(const std::string& k, double v) { set(k, fmt12(v)); }
  void set(const std::string& k, long v) { set(k, std::to_string(v)); }

  const std::string* find(const std::string& k) const {
    for (const auto& [key, val] : items)
      if (key == k) return &val;
    return nullptr;
  }

  std::string get(const std::string& k) const {
    const std::string* v = find(k);
    if (!v) throw std::invalid_argument("missing key '" + k + "'");
    return *v;
  }

  std::string render() const {
    std::string out;
    for (const auto& [k, v] : items) out += k + " = " + v + "\n";
    return out;
  }

  static KvDoc parse(const std::string& text) {
    KvDoc doc;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      const auto strip = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      line = strip(line);
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("malformed key=value line: '" + line + "'");
      doc.set(strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
    }
    return doc;
  }
};

inline std::string model_spec_text(const HamiltonianFamily& fam) {
  KvDoc doc;
  doc.set("model", to_string(fam.model));
  doc.set("L", static_cast<long>(fam.L));
  doc.set("seed", std::to_string(fam.couplings.seed));
  doc.set("boundary", fam.boundary);
  return doc.render();
}

inline std::string decomposition_report(const AlgebraDecomposition& dec) {
  KvDoc doc;
  doc.set("d", dec.d);
  doc.set("d_Z", dec.d_Z);
  doc.set("K", dec.K);
  doc.set("dim_A", dec.dim_A);
  doc.set("dim_Aprime", dec.dim_Aprime);
  doc.set("sectors", static_cast<long>(dec.sectors.size()));
  for (std::size_t i = 0; i < dec.sectors.size(); ++i) {
    const std::string p = "sector." + std::to_string(i) + ".";
    doc.set(p + "J", static_cast<long>(dec.sectors[i].label));
    doc.set(p + "n", dec.sectors[i].n);
    doc.set(p + "d", dec.sectors[i].dim);
  }
  return doc.render();
}

inline std::string fit_report(const ScalingFit& fit) {
  KvDoc doc;
  doc.set("A", fit.amplitude);
  doc.set("B", fit.exponent);
  doc.set("B_stderr", fit.exponent_stderr);
  doc.set("rmse_raw", fit.rmse_raw);
  doc.set("rmse_log", fit.rmse_log);
  doc.set("n_points", static_cast<long>(fit.n_points));
  doc.set("raw_converged", fit.raw_converged ? "true" : "false");
  return doc.render();
}

inline std::string mc_report(const McEstimate& est) {
  KvDoc doc;
  doc.set("mean", est.mean);
  doc.set("stderr", est.stderr_mean);
  doc.set("analytic", est.analytic_ref);
  doc.set("n", static_cast<long>(est.n_samples));
  return doc.render();
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline double to_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw std::invalid_argument("malformed number '" + s + "'");
  return v;
}

}  // namespace detail

inline const char* kSweepCsvHeader = "model,L,d,K,seed,n_times,mean_f,stderr_f,mean_cgp";

inline std::string write_sweep_csv(const std::vector<SweepRecord>& records) {
  std::string out = std::string(kSweepCsvHeader) + "\n";
  for (const auto& r : records) {
    out += to_string(r.model) + "," + std::to_string(r.L) + "," + std::to_string(r.d) + "," +
           std::to_string(r.K) + "," + std::to_string(r.seed) + "," + std::to_string(r.n_times) +
           "," + fmt12(r.mean_f) + "," + fmt12(r.stderr_f) + "," + fmt12(r.mean_cgp) + "\n";
  }
  return out;
}

inline std::vector<SweepRecord> parse_sweep_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || detail::split_csv_line(line) != detail::split_csv_line(kSweepCsvHeader))
    throw std::invalid_argument("sweep CSV: missing or wrong header");
  std::vector<SweepRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 9) throw std::invalid_argument("sweep CSV: wrong column count");
    SweepRecord r;
    r.model = model_from_string(f[0]);
    r.L = static_cast<int>(detail::to_double(f[1]));
    r.d = static_cast<long>(detail::to_double(f[2]));
    r.K = static_cast<long>(detail::to_double(f[3]));
    r.seed = std::strtoull(f[4].c_str(), nullptr, 10);
    r.n_times = static_cast<int>(detail::to_double(f[5]));
    r.mean_f = detail::to_double(f[6]);
    r.stderr_f = detail::to_double(f[7]);
    r.mean_cgp = detail::to_double(f[8]);
    records.push_back(r);
  }
  return records;
}

inline const char* kTimeCsvHeader = "model,L,d,K,seed,t,f,cgp";

inline std::string write_time_samples_csv(const HamiltonianFamily& fam, long K,
                                          std::uint64_t seed,
                                          const std::vector<TimeSample>& samples) {
  std::string out = std::string(kTimeCsvHeader) + "\n";
  for (const auto& s : samples) {
    out += to_string(fam.model) + "," + std::to_string(fam.L) + "," + std::to_string(fam.d) +
           "," + std::to_string(K) + "," + std::to_string(seed) + "," + fmt12(s.t) + "," +
           fmt12(s.f) + "," + fmt12(s.cgp) + "\n";
  }
  return out;
}

inline const char* kMcCsvHeader = "decomposition,sample,cgp";

inline std::string write_mc_csv(const std::string& decomposition_id,
                                const std::vector<double>& samples) {
  std::string out = std::string(kMcCsvHeader) + "\n";
  for (std::size_t i = 0; i < samples.size(); ++i)
    out += decomposition_id + "," + std::to_string(i) + "," + fmt12(samples[i]) + "\n";
  return out;
}

inline std::string concentration_csv(const std::vector<ConcentrationRow>& rows) {
  std::string out = "sector,d_J,eps,n,exceed,tail,levy_bound,wilson_low,wilson_high\n";
  for (const auto& r : rows) {
    out += std::to_string(r.sector_label) + "," + std::to_string(r.d_J) + "," + fmt12(r.eps) +
           "," + std::to_string(r.n_samples) + "," + std::to_string(r.exceed) + "," +
           fmt12(r.tail) + "," + fmt12(r.levy_bound) + "," + fmt12(r.wilson_low) + "," +
           fmt12(r.wilson_high) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// coordinate export: "# rows cols nnz" then one "row col re im" line per entry

inline std::string export_coordinate(const SpMatC& m) {
  std::ostringstream out;
  out << "# " << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMatC::InnerIterator it(m, k); it; ++it)
      out << it.row() << " " << it.col() << " " << fmt12(it.value().real()) << " "
          << fmt12(it.value().imag()) << "\n";
  return out.str();
}

inline std::string export_coordinate(const MatC& m, double drop_tol = 0.0) {
  std::ostringstream body;
  long nnz = 0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (std::abs(m(i, j)) > drop_tol) {
        body << i << " " << j << " " << fmt12(m(i, j).real()) << " " << fmt12(m(i, j).imag())
             << "\n";
        ++nnz;
      }
  std::ostringstream out;
  out << "# " << m.rows() << " " << m.cols() << " " << nnz << "\n";
  out << body.str();
  return out.str();
}

inline MatC parse_coordinate(const std::string& text) {
  std::istringstream in(text);
  std::string hash;
  long rows = 0, cols = 0, nnz = 0;
  in >> hash >> rows >> cols >> nnz;
  if (hash != "#" || rows <= 0 || cols <= 0)
    throw std::invalid_argument("coordinate format: bad header");
  MatC m = MatC::Zero(rows, cols);
  for (long k = 0; k < nnz; ++k) {
    long i = 0, j = 0;
    double re = 0, im = 0;
    if (!(in >> i >> j >> re >> im))
      throw std::invalid_argument("coordinate format: truncated body");
    m(i, j) = cxd(re, im);
  }
  return m;
}

// ---------------------------------------------------------------------------
// plot data: two-column (log10 d, log10 f) and (log10 d, log10 K) files

inline std::pair<std::string, std::string> export_plotdata(const std::string& sweep_csv) {
  const std::vector<SweepRecord> records = parse_sweep_csv(sweep_csv);
  if (records.empty()) throw std::invalid_argument("export_plotdata: sweep CSV has no data rows");
  std::string fdat, kdat;
  for (const auto& r : records) {
    const double ld = std::log10(static_cast<double>(r.d));
    fdat += fmt12(ld) + " " + fmt12(std::log10(r.mean_f)) + "\n";
    kdat += fmt12(ld) + " " + fmt12(std::log10(static_cast<double>(r.K))) + "\n";
  }
  return {fdat, kdat};
}

// ---------------------------------------------------------------------------
// small file helpers

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace fragcgp
