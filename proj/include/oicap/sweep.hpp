#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oicap/bounds.hpp"
#include "oicap/channel.hpp"
#include "oicap/oracle.hpp"

// SNR sweeps over the closed-form bounds (optionally with the numerical
// oracle), gap reports, asymptote summaries and the CSV / JSON emitters.
namespace oicap {

enum class SweepMode { peak_avg, avg_only };

struct SweepSpec {
  SweepMode mode = SweepMode::peak_avg;
  double alpha = 0.5;  // E/A; peak_avg only
  double snr_db_min = -20.0;
  double snr_db_max = 40.0;
  double snr_db_step = 0.25;
  DbConvention db_convention = DbConvention::power10;
  bool include_oracle = false;
  bool refine_params = false;
  OracleConfig oracle;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

struct SweepRow {
  double snr_db = 0.0;
  double lower = 0.0;
  std::optional<double> upper_low;  // absent where the bound's parameter range is empty
  double upper_high = 0.0;
  double best_lower = 0.0;
  double best_upper = 0.0;
  std::optional<double> oracle;
  double gap = 0.0;  // best_upper - best_lower
  std::map<std::string, double> free_params;
};

struct SweepTable {
  std::vector<SweepRow> rows;
};

SweepTable run_sweep(const SweepSpec& spec);

struct MaxGapReport {
  double gap_nats = 0.0;
  double at_db = 0.0;
};

/// Largest gap row, with the location refined by parabolic interpolation
/// through the top three grid points. Throws std::invalid_argument on an
/// empty table.
MaxGapReport max_gap_report(const SweepTable& table);

struct AsymptoteReport {
  double high_snr_offset = 0.0;            // analytic chi (or chi_E)
  double fitted_high_snr_offset = 0.0;     // best_lower - log(A/sigma) at the top row
  std::optional<double> low_snr_coefficient;
  std::optional<double> fitted_low_snr_coefficient;  // best_upper / (A/sigma)^2 at the bottom row
  std::optional<std::pair<double, double>> low_snr_envelope;
};

AsymptoteReport asymptote_report(const SweepSpec& spec, const SweepTable& table);

/// CSV schema: header `snr_db,lower,upper_low,upper_high,best_lower,
/// best_upper,oracle,gap`, 12 significant digits, empty field where a
/// column does not apply.
void write_csv(const SweepTable& table, std::ostream& out);
SweepTable parse_csv(std::istream& in);

std::string format_double(double v);  // the 12-significant-digit CSV format

/// Machine-readable sweep summary (max gap, asymptotes, per-row parameter
/// choices) as a JSON document.
void write_summary_json(const SweepSpec& spec, const SweepTable& table,
                        std::ostream& out);

}  // namespace oicap
