#include "rosa/compliance.hpp"

#include <algorithm>
#include <cmath>

#include "rosa/noise.hpp"

namespace rosa {

namespace {

constexpr double kSabineConstant = 0.161;
constexpr double kSmallRoomVolumeM3 = 300.0;

const PositionResult* find_position(const ScenarioResult& scenario,
                                    const std::string& receiver) {
  for (const PositionResult& p : scenario.positions) {
    if (p.receiver == receiver) return &p;
  }
  return nullptr;
}

const ScenarioResult* find_scenario(const MeasurementSession& session,
                                    const std::string& source) {
  for (const ScenarioResult& s : session.scenarios) {
    if (s.source == source) return &s;
  }
  return nullptr;
}

std::vector<BandDelta> band_deltas(const std::vector<BandParams>& before,
                                   const std::vector<BandParams>& after,
                                   bool use_t30) {
  std::vector<BandDelta> out;
  for (const BandParams& b : before) {
    const BandParams* a = nullptr;
    for (const BandParams& cand : after) {
      if (cand.band_center_hz == b.band_center_hz) {
        a = &cand;
        break;
      }
    }
    if (a == nullptr) continue;
    BandDelta d;
    d.band_center_hz = b.band_center_hz;
    d.before = use_t30 ? b.t30_s : b.c50_db;
    d.after = use_t30 ? a->t30_s : a->c50_db;
    if (d.before && d.after && std::isfinite(*d.before) &&
        std::isfinite(*d.after)) {
      d.delta = *d.after - *d.before;
      if (use_t30 && *d.before > 0.0)
        d.delta_pct = 100.0 * (*d.after - *d.before) / *d.before;
    }
    out.push_back(d);
  }
  return out;
}

StiDelta sti_delta(const std::optional<StiResult>& before,
                   const std::optional<StiResult>& after) {
  StiDelta d;
  if (before) d.before = std::min(before->sti_male, before->sti_female);
  if (after) d.after = std::min(after->sti_male, after->sti_female);
  if (d.before && d.after) {
    d.delta = *d.after - *d.before;
    d.transition = rate_sti(*d.before) + std::string(" -> ") +
                   rate_sti(*d.after);
  }
  return d;
}

}  // namespace

double TargetProfile::widening_for(double band_center_hz) const {
  for (const auto& [center, factor] : low_freq_widening) {
    if (std::abs(center - band_center_hz) <= 0.01 * center) return factor;
  }
  return 1.0;
}

double TargetProfile::t_lower_s(double band_center_hz) const {
  return t_target_s * (1.0 - t_tolerance * widening_for(band_center_hz));
}

double TargetProfile::t_upper_s(double band_center_hz) const {
  return t_target_s * (1.0 + t_tolerance * widening_for(band_center_hz));
}

TargetProfile target_profile(const std::string& usage,
                             const RoomGeometry& geometry,
                             const std::optional<TargetProfile>& custom) {
  if (!(geometry.volume_m3 > 0.0))
    throw InvalidInput("target profile needs a positive room volume");

  if (usage == "custom") {
    if (!custom)
      throw UnknownUsage(
          "usage 'custom' requires explicit target values (t_target, "
          "tolerances, C50/STI/noise limits)");
    TargetProfile p = *custom;
    p.usage = "custom";
    if (!(p.t_target_s > 0.0) || p.t_tolerance < 0.0 || p.t_tolerance >= 1.0 ||
        p.c50_min_db > p.c50_optimal_db || p.sti_min < 0.0 ||
        p.sti_min > p.sti_goal || p.sti_goal > 1.0)
      throw InvalidInput("custom target profile violates its invariants");
    return p;
  }
  if (usage != "hybrid_meeting" && usage != "lecture")
    throw UnknownUsage("unsupported usage '" + usage +
                       "'; expected hybrid_meeting, lecture or custom");

  // Communication / speech-presentation class targets: T = 0.5 s +-20%
  // for rooms of this size, C50 > 0 dB (optimal >= 2 dB), STI >= 0.60
  // (goal 0.75), noise <= 35 dB(A).
  TargetProfile p;
  p.usage = usage;
  return p;
}

const char* to_string(T30Verdict v) {
  switch (v) {
    case T30Verdict::kLow: return "low";
    case T30Verdict::kPass: return "pass";
    case T30Verdict::kHigh: return "high";
  }
  return "?";
}

const char* to_string(C50Verdict v) {
  switch (v) {
    case C50Verdict::kBelowMin: return "below_min";
    case C50Verdict::kAcceptable: return "acceptable";
    case C50Verdict::kOptimal: return "optimal";
  }
  return "?";
}

const char* to_string(StiVerdict v) {
  switch (v) {
    case StiVerdict::kFail: return "fail";
    case StiVerdict::kPass: return "pass";
    case StiVerdict::kGoal: return "goal";
  }
  return "?";
}

std::vector<T30Check> check_t30(const std::vector<BandParams>& bands,
                                const TargetProfile& profile) {
  std::vector<T30Check> out;
  out.reserve(bands.size());
  for (const BandParams& b : bands) {
    T30Check c;
    c.band_center_hz = b.band_center_hz;
    c.target_lower_s = profile.t_lower_s(b.band_center_hz);
    c.target_upper_s = profile.t_upper_s(b.band_center_hz);
    c.t30_s = b.t30_s;
    if (b.t30_s) {
      if (*b.t30_s < c.target_lower_s) c.verdict = T30Verdict::kLow;
      else if (*b.t30_s > c.target_upper_s) c.verdict = T30Verdict::kHigh;
      else c.verdict = T30Verdict::kPass;
    }
    out.push_back(c);
  }
  return out;
}

std::vector<C50Check> check_c50(const std::vector<BandParams>& bands,
                                const TargetProfile& profile) {
  std::vector<C50Check> out;
  out.reserve(bands.size());
  for (const BandParams& b : bands) {
    C50Check c;
    c.band_center_hz = b.band_center_hz;
    c.c50_db = b.c50_db;
    if (b.c50_db) {
      if (*b.c50_db < profile.c50_min_db) c.verdict = C50Verdict::kBelowMin;
      else if (*b.c50_db < profile.c50_optimal_db)
        c.verdict = C50Verdict::kAcceptable;
      else c.verdict = C50Verdict::kOptimal;
    }
    out.push_back(c);
  }
  return out;
}

std::vector<StiCheck> check_sti(
    const std::vector<std::pair<std::string, StiResult>>& per_position,
    const TargetProfile& profile) {
  std::vector<StiCheck> out;
  out.reserve(per_position.size());
  for (const auto& [receiver, result] : per_position) {
    StiCheck c;
    c.receiver = receiver;
    // Grade on the stricter of the two gender weightings.
    c.sti = std::min(result.sti_male, result.sti_female);
    c.rating = rate_sti(c.sti);
    if (c.sti < profile.sti_min) c.verdict = StiVerdict::kFail;
    else if (c.sti < profile.sti_goal) c.verdict = StiVerdict::kPass;
    else c.verdict = StiVerdict::kGoal;
    out.push_back(c);
  }
  return out;
}

NoiseCheck check_noise(const BandSpectrum& noise,
                       const TargetProfile& profile) {
  NoiseCheck c;
  c.limit_dba = profile.noise_max_dba;
  c.level_dba = a_weighted_level(noise);
  c.degenerate = c.level_dba == kNegInfDb;
  c.pass = c.level_dba <= profile.noise_max_dba;
  return c;
}

CompareReport compare_sessions(const MeasurementSession& before,
                               const MeasurementSession& after) {
  CompareReport report;
  report.before_id = before.session_id;
  report.after_id = after.session_id;

  std::size_t matched_positions = 0;
  for (const ScenarioResult& sb : before.scenarios) {
    const ScenarioResult* sa = find_scenario(after, sb.source);
    if (sa == nullptr) {
      report.unmatched_scenarios_before.push_back(sb.source);
      continue;
    }
    ScenarioDelta delta;
    delta.source = sb.source;
    for (const PositionResult& pb : sb.positions) {
      const PositionResult* pa = find_position(*sa, pb.receiver);
      if (pa == nullptr) {
        delta.unmatched_before.push_back(pb.receiver);
        continue;
      }
      ++matched_positions;
      PositionDelta pd;
      pd.receiver = pb.receiver;
      pd.t30 = band_deltas(pb.bands, pa->bands, /*use_t30=*/true);
      pd.c50 = band_deltas(pb.bands, pa->bands, /*use_t30=*/false);
      pd.sti_with_noise = sti_delta(pb.sti_with_noise, pa->sti_with_noise);
      pd.sti_no_noise = sti_delta(pb.sti_no_noise, pa->sti_no_noise);
      const std::string& transition = pd.sti_with_noise.transition.empty()
                                          ? pd.sti_no_noise.transition
                                          : pd.sti_with_noise.transition;
      if (!transition.empty()) ++report.sti_transitions[transition];
      delta.positions.push_back(std::move(pd));
    }
    for (const PositionResult& pa : sa->positions) {
      if (find_position(sb, pa.receiver) == nullptr)
        delta.unmatched_after.push_back(pa.receiver);
    }
    delta.t30_avg = band_deltas(sb.spatial_avg, sa->spatial_avg, true);
    delta.c50_avg = band_deltas(sb.spatial_avg, sa->spatial_avg, false);
    report.scenarios.push_back(std::move(delta));
  }
  for (const ScenarioResult& sa : after.scenarios) {
    if (find_scenario(before, sa.source) == nullptr)
      report.unmatched_scenarios_after.push_back(sa.source);
  }

  if (matched_positions == 0)
    throw NoMatchingPositions(
        "the two sessions share no scenario/receiver labels");
  return report;
}

AdvisorReport sabine_advisor(const RoomGeometry& geometry,
                             const std::vector<BandParams>& current,
                             const TargetProfile& profile,
                             const std::optional<SurfaceAreas>& surfaces,
                             double absorber_coefficient) {
  if (!(geometry.volume_m3 > 0.0))
    throw InvalidInput("advisor needs a positive room volume");
  if (!(absorber_coefficient > 0.0) || absorber_coefficient > 1.0)
    throw InvalidInput("absorber coefficient must be in (0, 1]");

  AdvisorReport report;
  report.absorber_coefficient = absorber_coefficient;
  for (const BandParams& b : current) {
    AbsorptionAdvice advice;
    advice.band_center_hz = b.band_center_hz;
    advice.target_t30_s = profile.t_target_s;
    advice.current_t30_s = b.t30_s;
    if (b.t30_s) {
      if (!(*b.t30_s > 0.0))
        throw InvalidInput("current T30 must be positive");
      const double a_add =
          kSabineConstant * geometry.volume_m3 *
          (1.0 / profile.t_target_s - 1.0 / *b.t30_s);
      if (a_add <= 0.0) {
        advice.added_absorption_m2 = 0.0;
        advice.over_damped = *b.t30_s < profile.t_target_s;
      } else {
        advice.added_absorption_m2 = a_add;
        if (surfaces && surfaces->ceiling_m2 > 0.0) {
          advice.ceiling_coverage_fraction =
              a_add / absorber_coefficient / surfaces->ceiling_m2;
        }
      }
    }
    report.bands.push_back(advice);
  }

  // Placement guidance: porous absorbers close to room edges damp low
  // modes best, since acoustic pressure maxima occur there.
  report.guidance.push_back(
      "Place porous absorbers and bass traps close to room edges and "
      "corners, where modal pressure maxima occur.");
  if (geometry.volume_m3 <= kSmallRoomVolumeM3) {
    report.guidance.push_back(
        "For rooms up to ~300 m3, treating 20-30% of the ceiling and up to "
        "15% of the rear walls is the usual working range.");
  } else {
    report.guidance.push_back(
        "For larger regular rooms (~500 m3), cover 50-70% of the ceiling "
        "and 20-40% of the walls, including the rear wall.");
  }
  bool any_over_damped = std::any_of(
      report.bands.begin(), report.bands.end(),
      [](const AbsorptionAdvice& a) { return a.over_damped; });
  if (any_over_damped) {
    report.guidance.push_back(
        "Some bands are already below the target time (over-damped); adding "
        "absorption there would hurt, not help.");
  }
  return report;
}

}  // namespace rosa
