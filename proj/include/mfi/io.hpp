#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfi/analysis.hpp"
#include "mfi/core.hpp"
#include "mfi/design.hpp"
#include "mfi/estimator.hpp"
#include "mfi/montecarlo.hpp"

namespace mfi {

using nlohmann::json;

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

// ---- plans ----

json plan_to_json(const FrequencyPlan& plan, const json& design_meta = json::object());
FrequencyPlan plan_from_json(const json& j);
FrequencyPlan read_plan_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
json read_json_file(const std::string& path);

struct DesignRequest {
  std::string method;  // rips, towers, constrained-optimal, prime-min-error, prime-max-error, random
  std::optional<double> f1_hz;
  std::optional<double> fN_hz;
  std::optional<double> bandwidth_hz;
  std::optional<int> count;
  std::optional<double> resolution_hz;
  int prime_index = 1;
  std::optional<double> umr_requirement_m;
  std::optional<std::uint64_t> seed;
  double c = kSpeedOfLight;
};

DesignRequest design_request_from_json(const json& j, double c);

struct DesignOutcome {
  FrequencyPlan plan;
  json meta;  // method and its parameter tuple
};

DesignOutcome run_design(const DesignRequest& req);

// ---- reports and curves ----

struct ReportRow {
  std::string metric;
  std::string value;
};

std::vector<ReportRow> report_rows(const AnalysisReport& r);
void write_report_csv(std::ostream& os, const AnalysisReport& r, const FrequencyPlan& plan);
json report_to_json(const AnalysisReport& r, const FrequencyPlan& plan);

/// label,snr_db,metric,value,stderr,mmse,hmse,crb,trials,seed,
/// pa_bound,bound_applicable,inlier_value
void write_curve_csv(std::ostream& os, const std::vector<CurveRow>& rows);
json curves_to_json(const std::vector<CurveRow>& rows);
void write_histogram_csv(std::ostream& os, const std::vector<HistogramRow>& rows);
json histogram_to_json(const std::vector<HistogramRow>& rows);

// ---- campaigns ----

/// Relative plan_file paths resolve against base_dir.
CampaignSpec campaign_from_json(const json& j, const std::string& base_dir,
                                std::optional<CMode> c_mode_override = std::nullopt);

// ---- phase records ----

struct PhaseExperiment {
  std::string id;
  std::vector<double> phases;  // plan order
  std::optional<double> q0_m;
};

struct PhaseRecordFile {
  std::optional<FrequencyPlan> plan;  // from the '#' header when complete
  std::vector<PhaseExperiment> experiments;
};

/// Header lines `# key=value` (f1_hz, resolution_hz, spacings, c_mode or
/// c_m_per_s), then rows `experiment_id,freq_hz,phase_rad[,q0_m]`.
/// `plan` overrides the header plan when given.
PhaseRecordFile parse_phase_record(std::istream& is,
                                   const std::optional<FrequencyPlan>& plan = std::nullopt);
PhaseRecordFile read_phase_record(const std::string& path,
                                  const std::optional<FrequencyPlan>& plan = std::nullopt);
void write_phase_record(std::ostream& os, const FrequencyPlan& plan,
                        const std::vector<PhaseExperiment>& experiments);

struct ReplayRow {
  std::string id;
  Estimate estimate;
  std::optional<double> q0_m;
  std::optional<double> error_m;
  std::optional<bool> unwrap_ok;
};

struct ReplayResult {
  std::vector<ReplayRow> rows;
  std::optional<double> mse;  // over experiments with ground truth
  std::size_t with_truth = 0;
  std::size_t unwrap_failures = 0;
  std::vector<HistogramRow> histogram;
};

ReplayResult replay(const PhaseRecordFile& rec, const FrequencyPlan& plan,
                    const EstimatorConfig& cfg, double histogram_bin_m = 1.0);
void write_replay_csv(std::ostream& os, const ReplayResult& r);
json replay_to_json(const ReplayResult& r);

}  // namespace mfi
