// Command-line front end: decomposition reports, long-time CGP averages,
// Haar Monte Carlo, system-size sweeps, power-law fits and plot-data export.
//
// Exit codes: 0 success, 1 numerical failure, 2 usage / configuration error.

#include <CLI11.hpp>
#include <Eigen/Core>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "fragcgp/algebra.hpp"
#include "fragcgp/cgp.hpp"
#include "fragcgp/dynamics.hpp"
#include "fragcgp/haar.hpp"
#include "fragcgp/io.hpp"
#include "fragcgp/models.hpp"
#include "fragcgp/scaling.hpp"

namespace {

using namespace fragcgp;

struct Options {
  std::string model = "xxz";
  int L = 2;
  std::vector<int> L_list;
  std::uint64_t seed = 0;
  int n_times = 200;
  int n_samples = 2000;
  double window_min = 100.0;
  double window_max = 1100.0;
  std::string out;
  std::string in;
  std::string format = "csv";
  std::string export_w;
  std::string export_generators;
};

void emit(const Options& opt, const std::string& content) {
  if (opt.out.empty())
    std::cout << content;
  else
    write_file(opt.out, content);
}

int cmd_decompose(const Options& opt) {
  const ModelId model = model_from_string(opt.model);
  const HamiltonianFamily fam = build_family(model, opt.L, opt.seed);
  DecomposeOptions dopts;
  dopts.seed = derive_seed(opt.seed, "cli-decompose");
  const AlgebraDecomposition dec = decompose(fam, dopts);

  std::cout << "model=" << opt.model << " L=" << opt.L << " d=" << dec.d << " K=" << dec.K
            << " bound=" << fmt12(max_cgp_bound(dec)) << "\n";
  emit(opt, model_spec_text(fam) + decomposition_report(dec));
  if (!opt.export_w.empty()) write_file(opt.export_w, export_coordinate(dec.W, 0.0));
  if (!opt.export_generators.empty())
    for (const auto& [label, gen] : fam.generators)
      write_file(opt.export_generators + "." + label + ".coo", export_coordinate(gen));
  return 0;
}

int cmd_evolve_cgp(const Options& opt) {
  const ModelId model = model_from_string(opt.model);
  const HamiltonianFamily fam = build_family(model, opt.L, opt.seed);
  const AlgebraDecomposition dec = adapted_decomposition(fam, derive_seed(opt.seed, "cli-basis"));
  std::vector<TimeSample> samples;
  const TimeAverage ta = long_time_avg_cgp(fam, dec, opt.n_times, opt.window_min, opt.window_max,
                                           derive_seed(opt.seed, "cli-times"), &samples);
  std::cout << "model=" << opt.model << " L=" << opt.L << " d=" << dec.d << " K=" << dec.K
            << " mean_f=" << fmt12(ta.mean_f) << " stderr_f=" << fmt12(ta.stderr_f)
            << " mean_cgp=" << fmt12(ta.mean_cgp) << "\n";
  emit(opt, write_time_samples_csv(fam, dec.K, opt.seed, samples));
  return 0;
}

int cmd_haar(const Options& opt) {
  const ModelId model = model_from_string(opt.model);
  const HamiltonianFamily fam = build_family(model, opt.L, opt.seed);
  const AlgebraDecomposition dec = adapted_decomposition(fam, derive_seed(opt.seed, "cli-basis"));
  std::vector<double> samples;
  const McEstimate est =
      mc_haar_cgp(dec, opt.n_samples, derive_seed(opt.seed, "cli-haar"), &samples);
  std::cout << "model=" << opt.model << " L=" << opt.L << " d=" << dec.d << " K=" << dec.K
            << " mc_mean=" << fmt12(est.mean) << " stderr=" << fmt12(est.stderr_mean)
            << " analytic=" << fmt12(est.analytic_ref) << "\n";
  if (opt.format == "structured-text")
    emit(opt, mc_report(est));
  else
    emit(opt, write_mc_csv(to_string(model) + ":L=" + std::to_string(opt.L), samples));
  return 0;
}

int cmd_sweep(const Options& opt) {
  const ModelId model = model_from_string(opt.model);
  if (opt.L_list.empty())
    throw CLI::ValidationError("--L-list", "sweep needs --L-list");
  SweepOptions sopts;
  sopts.n_times = opt.n_times;
  sopts.t_min = opt.window_min;
  sopts.t_max = opt.window_max;
  sopts.seed = opt.seed;
  const auto records = sweep(model, opt.L_list, sopts);
  const auto& last = records.back();
  std::cout << "model=" << opt.model << " sizes=" << records.size() << " L_max=" << last.L
            << " K_max=" << last.K << " mean_f_max=" << fmt12(last.mean_f) << "\n";
  emit(opt, write_sweep_csv(records));
  return 0;
}

int cmd_fit(const Options& opt) {
  if (opt.in.empty()) throw CLI::ValidationError("--in", "fit needs an input sweep CSV");
  const auto records = parse_sweep_csv(read_file(opt.in));
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : records) pts.emplace_back(static_cast<double>(r.d), r.mean_f);
  const ScalingFit fit = fit_power_law(pts);
  std::cout << "n=" << fit.n_points << " A=" << fmt12(fit.amplitude)
            << " B=" << fmt12(fit.exponent) << " B_stderr=" << fmt12(fit.exponent_stderr)
            << "\n";
  emit(opt, fit_report(fit));
  return 0;
}

int cmd_export_plotdata(const Options& opt) {
  if (opt.in.empty())
    throw CLI::ValidationError("--in", "export-plotdata needs an input sweep CSV");
  if (opt.out.empty())
    throw CLI::ValidationError("--out", "export-plotdata needs an output prefix");
  const auto [fdat, kdat] = export_plotdata(read_file(opt.in));
  write_file(opt.out + "_f.dat", fdat);
  write_file(opt.out + "_K.dat", kdat);
  std::cout << "wrote " << opt.out << "_f.dat and " << opt.out << "_K.dat\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("FRAGCGP_THREADS"))
    Eigen::setNbThreads(std::max(1, std::atoi(threads)));

  CLI::App app{"Krylov-sector decomposition and coherence generating power for spin chains"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "flat key = value configuration file; flags override");

  Options opt;
  app.add_option("--model", opt.model, "model: xxz | tl | tjz")->capture_default_str();
  app.add_option("--L", opt.L, "chain length")->capture_default_str();
  app.add_option("--L-list", opt.L_list, "chain lengths for sweeps, e.g. 2,3,4")
      ->delimiter(',');
  app.add_option("--seed", opt.seed, "coupling / sampling seed")->capture_default_str();
  app.add_option("--n-times", opt.n_times, "number of evolution times")->capture_default_str();
  app.add_option("--n-samples", opt.n_samples, "number of Haar samples")->capture_default_str();
  app.add_option("--window-min", opt.window_min, "time window start")->capture_default_str();
  app.add_option("--window-max", opt.window_max, "time window end")->capture_default_str();
  app.add_option("--out", opt.out, "output file (stdout when omitted)");
  app.add_option("--in", opt.in, "input file");
  app.add_option("--format", opt.format, "output format: csv | structured-text")
      ->check(CLI::IsMember({"csv", "structured-text"}))
      ->capture_default_str();
  app.add_option("--export-w", opt.export_w, "write the adapted basis in coordinate format");
  app.add_option("--export-generators", opt.export_generators,
                 "prefix for generator matrices in coordinate format");

  auto* sub_decompose =
      app.add_subcommand("decompose", "numeric sector decomposition and Krylov count");
  auto* sub_evolve = app.add_subcommand("evolve-cgp", "long-time CGP average under H");
  auto* sub_haar = app.add_subcommand("haar", "Monte Carlo Haar average of the CGP");
  auto* sub_sweep = app.add_subcommand("sweep", "system-size sweep of the long-time average");
  auto* sub_fit = app.add_subcommand("fit", "power-law fit of a sweep CSV");
  auto* sub_plot = app.add_subcommand("export-plotdata", "log-log plot columns from a sweep CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sub_decompose->parsed()) return cmd_decompose(opt);
    if (sub_evolve->parsed()) return cmd_evolve_cgp(opt);
    if (sub_haar->parsed()) return cmd_haar(opt);
    if (sub_sweep->parsed()) return cmd_sweep(opt);
    if (sub_fit->parsed()) return cmd_fit(opt);
    if (sub_plot->parsed()) return cmd_export_plotdata(opt);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
