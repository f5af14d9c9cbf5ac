#include "oicap/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <future>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace oicap {

void SweepSpec::validate() const {
  if (!(snr_db_min < snr_db_max)) {
    throw std::domain_error("SweepSpec: snr_db_min must be below snr_db_max");
  }
  if (!(snr_db_step > 0.0)) {
    throw std::domain_error("SweepSpec: step must be positive");
  }
  if (mode == SweepMode::peak_avg && !(alpha > 0.0 && alpha <= 1.0)) {
    throw std::domain_error("SweepSpec: alpha must lie in (0, 1]");
  }
  oracle.validate();
}

namespace {

ChannelParams params_at(const SweepSpec& spec, double snr_db) {
  const double ratio = db_to_amplitude_ratio(snr_db, spec.db_convention);
  if (spec.mode == SweepMode::avg_only) {
    return ChannelParams::average_only(ratio, 1.0);
  }
  return ChannelParams::peak_and_average(ratio, spec.alpha * ratio, 1.0);
}

SweepRow evaluate_row(const SweepSpec& spec, double snr_db) {
  SweepRow row;
  row.snr_db = snr_db;
  const ChannelParams params = params_at(spec, snr_db);
  const CaseLabel label = classify(params);

  switch (label.kind) {
    case ConstraintCase::peak_dominated_average: {
      const double ms = mu_star(*label.effective_alpha);
      row.lower = lower_case1(params, ms).nats;
      row.upper_low = upper_case1_low(params).nats;
      const Case1FreeParams h = heuristic_case1(params);
      row.upper_high = upper_case1_high(params, h.delta, h.mu).nats;
      row.free_params = {{"mu_star", ms}, {"delta", h.delta}, {"mu", h.mu}};
      break;
    }
    case ConstraintCase::peak_only: {
      row.lower = lower_case2(params).nats;
      row.upper_low = upper_case2_low(params).nats;
      const double d = heuristic_case2_delta(params);
      row.upper_high = upper_case2_high(params, d).nats;
      row.free_params = {{"delta", d}};
      break;
    }
    case ConstraintCase::average_only: {
      row.lower = lower_case3(params).nats;
      if (const auto h = heuristic_case3_low(params)) {
        row.upper_low = upper_case3_low(params, h->delta, h->beta).nats;
        row.free_params["delta_low"] = h->delta;
        row.free_params["beta_low"] = h->beta;
      }
      const Case3FreeParams h = heuristic_case3_high(params);
      row.upper_high = upper_case3_high(params, h.delta, h.beta).nats;
      row.free_params["delta_high"] = h.delta;
      row.free_params["beta_high"] = h.beta;
      break;
    }
  }

  row.best_lower = row.lower;
  row.best_upper = row.upper_low ? std::min(*row.upper_low, row.upper_high)
                                 : row.upper_high;
  if (spec.refine_params) {
    BestBoundsOptions opts;
    opts.refine = true;
    const BoundPair refined = best_bounds(params, opts);
    row.best_lower = refined.lower.nats;
    row.best_upper = std::min(row.best_upper, refined.upper.nats);
    for (const auto& [name, value] : refined.upper.free_params) {
      row.free_params["refined_" + name] = value;
    }
  }
  if (spec.include_oracle) {
    row.oracle = capacity_oracle(params, spec.oracle).nats;
  }
  row.gap = row.best_upper - row.best_lower;
  return row;
}

}  // namespace

SweepTable run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<double> grid;
  const double span = spec.snr_db_max - spec.snr_db_min;
  const long count = static_cast<long>(std::floor(span / spec.snr_db_step + 1e-9)) + 1;
  for (long i = 0; i < count; ++i) {
    grid.push_back(spec.snr_db_min + static_cast<double>(i) * spec.snr_db_step);
  }
  SweepTable table;
  table.rows.resize(grid.size());

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const size_t workers = std::min<size_t>(spec.threads > 0 ? spec.threads : hw, grid.size());
  std::atomic<size_t> next{0};
  auto work = [&]() {
    for (size_t i = next.fetch_add(1); i < grid.size(); i = next.fetch_add(1)) {
      table.rows[i] = evaluate_row(spec, grid[i]);
    }
  };
  std::vector<std::future<void>> futures;
  for (size_t w = 1; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, work));
  }
  work();
  for (auto& f : futures) f.get();
  return table;
}

MaxGapReport max_gap_report(const SweepTable& table) {
  if (table.rows.empty()) {
    throw std::invalid_argument("max_gap_report: empty table");
  }
  size_t best = 0;
  for (size_t i = 1; i < table.rows.size(); ++i) {
    if (table.rows[i].gap > table.rows[best].gap) best = i;
  }
  MaxGapReport report{table.rows[best].gap, table.rows[best].snr_db};
  if (best > 0 && best + 1 < table.rows.size()) {
    // Parabola through the top three points for sub-step location accuracy.
    const double y0 = table.rows[best - 1].gap;
    const double y1 = table.rows[best].gap;
    const double y2 = table.rows[best + 1].gap;
    const double x1 = table.rows[best].snr_db;
    const double step = table.rows[best + 1].snr_db - table.rows[best].snr_db;
    const double denom = y0 - 2.0 * y1 + y2;
    if (denom != 0.0) {
      const double offset = 0.5 * (y0 - y2) / denom;
      report.at_db = x1 + offset * step;
      report.gap_nats = y1 - 0.25 * (y0 - y2) * offset;
    }
  }
  return report;
}

AsymptoteReport asymptote_report(const SweepSpec& spec, const SweepTable& table) {
  if (table.rows.empty()) {
    throw std::invalid_argument("asymptote_report: empty table");
  }
  const ChannelParams top = params_at(spec, table.rows.back().snr_db);
  const AsymptoteValue analytic = asymptote(classify(top));
  AsymptoteReport report;
  report.high_snr_offset = analytic.high_snr_offset;
  report.low_snr_coefficient = analytic.low_snr_coefficient;
  report.low_snr_envelope = analytic.low_snr_envelope;

  const double top_ratio = db_to_amplitude_ratio(table.rows.back().snr_db, spec.db_convention);
  report.fitted_high_snr_offset = table.rows.back().best_lower - std::log(top_ratio);

  if (analytic.low_snr_coefficient) {
    const double bottom_ratio =
        db_to_amplitude_ratio(table.rows.front().snr_db, spec.db_convention);
    report.fitted_low_snr_coefficient =
        table.rows.front().best_upper / (bottom_ratio * bottom_ratio);
  }
  return report;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_csv(const SweepTable& table, std::ostream& out) {
  out << "snr_db,lower,upper_low,upper_high,best_lower,best_upper,oracle,gap\n";
  for (const SweepRow& r : table.rows) {
    out << format_double(r.snr_db) << ',' << format_double(r.lower) << ','
        << (r.upper_low ? format_double(*r.upper_low) : std::string()) << ','
        << format_double(r.upper_high) << ',' << format_double(r.best_lower) << ','
        << format_double(r.best_upper) << ','
        << (r.oracle ? format_double(*r.oracle) : std::string()) << ','
        << format_double(r.gap) << '\n';
  }
}

SweepTable parse_csv(std::istream& in) {
  SweepTable table;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("parse_csv: missing header");
  }
  if (line != "snr_db,lower,upper_low,upper_high,best_lower,best_upper,oracle,gap") {
    throw std::invalid_argument("parse_csv: unexpected header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    while (fields.size() < 8) fields.emplace_back();
    if (fields.size() != 8) {
      throw std::invalid_argument("parse_csv: wrong column count");
    }
    SweepRow r;
    r.snr_db = std::stod(fields[0]);
    r.lower = std::stod(fields[1]);
    if (!fields[2].empty()) r.upper_low = std::stod(fields[2]);
    r.upper_high = std::stod(fields[3]);
    r.best_lower = std::stod(fields[4]);
    r.best_upper = std::stod(fields[5]);
    if (!fields[6].empty()) r.oracle = std::stod(fields[6]);
    r.gap = std::stod(fields[7]);
    table.rows.push_back(std::move(r));
  }
  return table;
}

void write_summary_json(const SweepSpec& spec, const SweepTable& table,
                        std::ostream& out) {
  nlohmann::ordered_json j;
  j["mode"] = (spec.mode == SweepMode::peak_avg) ? "peak-avg" : "avg-only";
  if (spec.mode == SweepMode::peak_avg) j["alpha"] = spec.alpha;
  j["db_convention"] =
      (spec.db_convention == DbConvention::power10) ? "power10" : "amplitude20";
  j["rows"] = table.rows.size();
  const MaxGapReport gap = max_gap_report(table);
  j["max_gap"] = {{"gap_nats", gap.gap_nats}, {"at_db", gap.at_db}};
  const AsymptoteReport asym = asymptote_report(spec, table);
  j["asymptotes"]["high_snr_offset"] = asym.high_snr_offset;
  j["asymptotes"]["fitted_high_snr_offset"] = asym.fitted_high_snr_offset;
  if (asym.low_snr_coefficient) {
    j["asymptotes"]["low_snr_coefficient"] = *asym.low_snr_coefficient;
    j["asymptotes"]["fitted_low_snr_coefficient"] = *asym.fitted_low_snr_coefficient;
  }
  if (asym.low_snr_envelope) {
    j["asymptotes"]["low_snr_envelope_upper"] = asym.low_snr_envelope->first;
    j["asymptotes"]["low_snr_envelope_lower"] = asym.low_snr_envelope->second;
  }
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const SweepRow& r : table.rows) {
    nlohmann::ordered_json jr;
    jr["snr_db"] = r.snr_db;
    jr["free_params"] = r.free_params;
    rows.push_back(std::move(jr));
  }
  j["row_parameters"] = std::move(rows);
  out << j.dump(2) << '\n';
}

}  // namespace oicap
