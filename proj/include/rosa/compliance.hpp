#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rosa/decay.hpp"
#include "rosa/sti.hpp"
#include "rosa/types.hpp"

namespace rosa {

// Usage-dependent requirements a room is graded against.
struct TargetProfile {
  std::string usage = "hybrid_meeting";
  double t_target_s = 0.5;
  double t_tolerance = 0.20;  // fraction of t_target
  // Extra tolerance multiplier per nominal band center below 250 Hz;
  // the exact standard tolerance curve is not reproduced, so this table is
  // explicit configuration.
  std::map<double, double> low_freq_widening = {{63.0, 2.0}, {125.0, 1.5}};
  double c50_min_db = 0.0;
  double c50_optimal_db = 2.0;
  double sti_min = 0.60;
  double sti_goal = 0.75;
  double noise_max_dba = 35.0;

  double widening_for(double band_center_hz) const;
  double t_lower_s(double band_center_hz) const;
  double t_upper_s(double band_center_hz) const;
};

// Builds the defaults for a supported usage. `custom` requires explicit
// values supplied by the caller.
TargetProfile target_profile(const std::string& usage,
                             const RoomGeometry& geometry,
                             const std::optional<TargetProfile>& custom = {});

enum class T30Verdict { kLow, kPass, kHigh };
enum class C50Verdict { kBelowMin, kAcceptable, kOptimal };
enum class StiVerdict { kFail, kPass, kGoal };

const char* to_string(T30Verdict v);
const char* to_string(C50Verdict v);
const char* to_string(StiVerdict v);

struct T30Check {
  double band_center_hz = 0.0;
  std::optional<double> t30_s;
  double target_lower_s = 0.0;
  double target_upper_s = 0.0;
  std::optional<T30Verdict> verdict;  // absent when T30 was not measurable
};

struct C50Check {
  double band_center_hz = 0.0;
  std::optional<double> c50_db;
  std::optional<C50Verdict> verdict;
};

struct StiCheck {
  std::string receiver;
  double sti = 0.0;  // min(male, female), the stricter of the two
  std::string rating;
  StiVerdict verdict = StiVerdict::kFail;
};

struct NoiseCheck {
  double level_dba = 0.0;  // -inf for an empty spectrum
  double limit_dba = 0.0;
  bool pass = false;
  bool degenerate = false;  // empty/silent spectrum: pass with a warning
};

std::vector<T30Check> check_t30(const std::vector<BandParams>& bands,
                                const TargetProfile& profile);
std::vector<C50Check> check_c50(const std::vector<BandParams>& bands,
                                const TargetProfile& profile);
std::vector<StiCheck> check_sti(
    const std::vector<std::pair<std::string, StiResult>>& per_position,
    const TargetProfile& profile);
NoiseCheck check_noise(const BandSpectrum& noise, const TargetProfile& profile);

// ---- session comparison ----

struct PositionResult {
  std::string receiver;
  double distance_m = 0.0;
  std::vector<BandParams> bands;
  std::optional<StiResult> sti_with_noise;
  std::optional<StiResult> sti_no_noise;
};

struct ScenarioResult {
  std::string source;
  std::vector<PositionResult> positions;
  std::vector<BandParams> spatial_avg;
  std::optional<BandSpectrum> noise;      // analysis band set
  std::optional<BandSpectrum> noise_sti;  // the 7 STI bands
};

struct MeasurementSession {
  std::string session_id;
  std::string condition;  // untreated | treated | other
  RoomGeometry geometry;
  std::vector<ScenarioResult> scenarios;
};

struct BandDelta {
  double band_center_hz = 0.0;
  std::optional<double> before;
  std::optional<double> after;
  std::optional<double> delta;
  std::optional<double> delta_pct;  // for times
};

struct StiDelta {
  std::optional<double> before;
  std::optional<double> after;
  std::optional<double> delta;
  std::string transition;  // e.g. "fair -> good"
};

struct PositionDelta {
  std::string receiver;
  std::vector<BandDelta> t30;
  std::vector<BandDelta> c50;
  StiDelta sti_with_noise;
  StiDelta sti_no_noise;
};

struct ScenarioDelta {
  std::string source;
  std::vector<PositionDelta> positions;
  std::vector<BandDelta> t30_avg;
  std::vector<BandDelta> c50_avg;
  std::vector<std::string> unmatched_before;  // receivers without a partner
  std::vector<std::string> unmatched_after;
};

struct CompareReport {
  std::string before_id;
  std::string after_id;
  std::vector<ScenarioDelta> scenarios;
  std::vector<std::string> unmatched_scenarios_before;
  std::vector<std::string> unmatched_scenarios_after;
  // Count per STI rating transition across matched positions,
  // e.g. {"fair -> good": 3}.
  std::map<std::string, int> sti_transitions;
};

// Matches scenarios by source label and positions by receiver label.
// Unmatched entries are reported, not fatal; throws NoMatchingPositions
// only when nothing matches at all.
CompareReport compare_sessions(const MeasurementSession& before,
                               const MeasurementSession& after);

// ---- treatment sizing ----

struct SurfaceAreas {
  double ceiling_m2 = 0.0;
  double wall_m2 = 0.0;
  double rear_wall_m2 = 0.0;
};

struct AbsorptionAdvice {
  double band_center_hz = 0.0;
  std::optional<double> current_t30_s;
  double target_t30_s = 0.0;
  double added_absorption_m2 = 0.0;  // Sabine units, floored at 0
  bool over_damped = false;          // already below target
  std::optional<double> ceiling_coverage_fraction;
};

struct AdvisorReport {
  std::vector<AbsorptionAdvice> bands;
  double absorber_coefficient = 0.9;
  std::vector<std::string> guidance;
};

// A_add = 0.161 V (1/T_target - 1/T_current) per band, plus coverage
// guidance when surface areas are supplied.
AdvisorReport sabine_advisor(const RoomGeometry& geometry,
                             const std::vector<BandParams>& current,
                             const TargetProfile& profile,
                             const std::optional<SurfaceAreas>& surfaces = {},
                             double absorber_coefficient = 0.9);

}  // namespace rosa
