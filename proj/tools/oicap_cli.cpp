// Command-line front end: SNR sweeps over the capacity bounds of the
// nonnegative-input AWGN channel, CSV + JSON emission, gap and asymptote
// reports, optional Blahut-Arimoto verification column.
//
// Exit codes: 0 success, 2 usage error, 3 numerical-convergence failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <string>

#include "oicap/bounds.hpp"
#include "oicap/channel.hpp"
#include "oicap/numerics.hpp"
#include "oicap/sweep.hpp"

namespace {

struct SweepOptions {
  std::string mode = "peak-avg";
  double alpha = 0.5;
  double snr_min = -20.0;
  double snr_max = 40.0;
  double step = 0.25;
  std::string db_convention = "power10";
  bool oracle = false;
  bool refine = false;
  std::string out_path;
  std::string summary_path;
  int grid_points = 0;
  double support_max = 0.0;
  double ba_tolerance = 1e-5;
  long max_iterations = 200000;
  int threads = 0;
};

oicap::SweepSpec to_spec(const SweepOptions& o) {
  oicap::SweepSpec spec;
  spec.mode = (o.mode == "avg-only") ? oicap::SweepMode::avg_only
                                     : oicap::SweepMode::peak_avg;
  spec.alpha = o.alpha;
  spec.snr_db_min = o.snr_min;
  spec.snr_db_max = o.snr_max;
  spec.snr_db_step = o.step;
  spec.db_convention = (o.db_convention == "amplitude20")
                           ? oicap::DbConvention::amplitude20
                           : oicap::DbConvention::power10;
  spec.include_oracle = o.oracle;
  spec.refine_params = o.refine;
  spec.oracle.grid_points = o.grid_points;
  spec.oracle.support_max = o.support_max;
  spec.oracle.ba_tolerance = o.ba_tolerance;
  spec.oracle.max_iterations = o.max_iterations;
  spec.threads = o.threads;
  return spec;
}

int run_sweep_command(const SweepOptions& options) {
  const oicap::SweepSpec spec = to_spec(options);
  spec.validate();
  const oicap::SweepTable table = oicap::run_sweep(spec);

  if (options.out_path.empty()) {
    oicap::write_csv(table, std::cout);
  } else {
    std::ofstream out(options.out_path);
    if (!out) {
      std::cerr << "error: cannot open " << options.out_path << " for writing\n";
      return 2;
    }
    oicap::write_csv(table, out);
  }
  if (!options.summary_path.empty()) {
    std::ofstream out(options.summary_path);
    if (!out) {
      std::cerr << "error: cannot open " << options.summary_path << " for writing\n";
      return 2;
    }
    oicap::write_summary_json(spec, table, out);
  }

  const oicap::MaxGapReport gap = oicap::max_gap_report(table);
  std::ostream& info = options.out_path.empty() ? std::cerr : std::cout;
  info << "max gap: " << oicap::format_double(gap.gap_nats) << " nats at "
       << oicap::format_double(gap.at_db) << " dB\n";
  const oicap::AsymptoteReport asym = oicap::asymptote_report(spec, table);
  info << "high-SNR offset: analytic " << oicap::format_double(asym.high_snr_offset)
       << ", fitted " << oicap::format_double(asym.fitted_high_snr_offset) << '\n';
  if (asym.low_snr_coefficient) {
    info << "low-SNR coefficient: analytic "
         << oicap::format_double(*asym.low_snr_coefficient) << ", fitted "
         << oicap::format_double(*asym.fitted_low_snr_coefficient) << '\n';
  }
  if (asym.low_snr_envelope) {
    info << "low-SNR envelope factors: upper "
         << oicap::format_double(asym.low_snr_envelope->first) << ", lower "
         << oicap::format_double(asym.low_snr_envelope->second) << '\n';
  }
  return 0;
}

int run_asymptotes_command(const SweepOptions& options) {
  using namespace oicap;
  CaseLabel label;
  if (options.mode == "avg-only") {
    label = classify(ChannelParams::average_only(1.0, 1.0));
  } else {
    if (!(options.alpha > 0.0 && options.alpha <= 1.0)) {
      std::cerr << "error: alpha must lie in (0, 1]\n";
      return 2;
    }
    label = classify(ChannelParams::peak_and_average(1.0, options.alpha, 1.0));
  }
  const AsymptoteValue v = asymptote(label);
  std::cout << "high_snr_offset " << format_double(v.high_snr_offset) << '\n';
  if (v.low_snr_coefficient) {
    std::cout << "low_snr_coefficient " << format_double(*v.low_snr_coefficient) << '\n';
  }
  if (v.low_snr_envelope) {
    std::cout << "low_snr_envelope_upper " << format_double(v.low_snr_envelope->first)
              << "\nlow_snr_envelope_lower "
              << format_double(v.low_snr_envelope->second) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Capacity bounds for the nonnegative-input AWGN (optical intensity) channel"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Key-value config file; flags take precedence");

  SweepOptions options;
  CLI::App* sweep = app.add_subcommand("sweep", "Sweep the bounds over an SNR grid and emit CSV");
  sweep->add_option("--mode", options.mode, "peak-avg or avg-only")
      ->check(CLI::IsMember({"peak-avg", "avg-only"}))
      ->capture_default_str();
  sweep->add_option("--alpha", options.alpha, "average-to-peak ratio E/A (peak-avg mode)")
      ->capture_default_str();
  sweep->add_option("--snr-min", options.snr_min, "lowest A/sigma (or E/sigma) in dB")
      ->capture_default_str();
  sweep->add_option("--snr-max", options.snr_max, "highest A/sigma (or E/sigma) in dB")
      ->capture_default_str();
  sweep->add_option("--step", options.step, "dB grid step")->capture_default_str();
  sweep->add_option("--db-convention", options.db_convention,
                    "power10 (ratio = 10^(dB/10)) or amplitude20 (10^(dB/20))")
      ->check(CLI::IsMember({"power10", "amplitude20"}))
      ->capture_default_str();
  sweep->add_flag("--oracle", options.oracle, "also run the Blahut-Arimoto capacity estimate");
  sweep->add_flag("--refine", options.refine,
                  "locally minimize the upper-bound free parameters around the heuristics");
  sweep->add_option("--out", options.out_path, "CSV output path (default: stdout)");
  sweep->add_option("--summary-json", options.summary_path, "summary JSON output path");
  sweep->add_option("--grid-points", options.grid_points, "oracle input grid size (0 = default)");
  sweep->add_option("--support-max", options.support_max,
                    "oracle support truncation in sigma units (avg-only; 0 = default)");
  sweep->add_option("--ba-tol", options.ba_tolerance, "oracle capacity-bracket tolerance in nats")
      ->capture_default_str();
  sweep->add_option("--max-iters", options.max_iterations, "oracle iteration budget")
      ->capture_default_str();
  sweep->add_option("--threads", options.threads, "worker threads (0 = hardware)")
      ->capture_default_str();

  CLI::App* asym = app.add_subcommand("asymptotes", "Print the high/low-SNR asymptotics");
  asym->add_option("--mode", options.mode, "peak-avg or avg-only")
      ->check(CLI::IsMember({"peak-avg", "avg-only"}))
      ->capture_default_str();
  asym->add_option("--alpha", options.alpha, "average-to-peak ratio E/A")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (sweep->parsed()) return run_sweep_command(options);
    return run_asymptotes_command(options);
  } catch (const oicap::convergence_error& e) {
    std::cerr << "numerical convergence failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
