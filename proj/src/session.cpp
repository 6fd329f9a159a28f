#include "rosa/session.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "rosa/decay.hpp"
#include "rosa/filterbank.hpp"
#include "rosa/noise.hpp"
#include "rosa/sweep.hpp"
#include "rosa/wave.hpp"

namespace rosa {

namespace {

using nlohmann::json;

BandDefinition analysis_bands(const std::string& name) {
  if (name == "octave") return BandDefinition::octaves();
  if (name == "third") return BandDefinition::third_octaves();
  throw InvalidInput("unknown band fraction '" + name + "'");
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&t));
  return buf;
}

json number_or_null(const std::optional<double>& v) {
  if (v && std::isfinite(*v)) return *v;
  return nullptr;
}

json band_params_json(const BandParams& p) {
  json j;
  j["center_hz"] = p.band_center_hz;
  j["t30_s"] = number_or_null(p.t30_s);
  j["t20_s"] = number_or_null(p.t20_s);
  j["edt_s"] = number_or_null(p.edt_s);
  j["c50_db"] = number_or_null(p.c50_db);
  if (p.c50_db && *p.c50_db == kPosInfDb) j["c50_sentinel"] = "> 60 dB";
  if (p.c50_db) j["d50"] = definition_d50(*p.c50_db);
  j["fit_r2"] = p.fit_r2;
  if (p.low_fit_quality) j["low_fit_quality"] = true;
  if (p.contributing_positions != 1)
    j["contributing_positions"] = p.contributing_positions;
  if (p.c50_excluded_positions != 0)
    j["c50_excluded_positions"] = p.c50_excluded_positions;
  return j;
}

json sti_result_json(const StiResult& r) {
  json j;
  j["sti_male"] = r.sti_male;
  j["sti_female"] = r.sti_female;
  j["rating_male"] = r.rating_male;
  j["rating_female"] = r.rating_female;
  j["noise_included"] = r.noise_included;
  j["distance_m"] = r.distance_m;
  j["simplified_iec"] = r.simplified_iec;
  j["mti"] = r.mti;
  json mtf = json::array();
  for (const auto& row : r.mtf) mtf.push_back(row);
  j["mtf"] = mtf;
  return j;
}

json spectrum_json(const BandSpectrum& s) {
  json j;
  j["label"] = s.label;
  j["integration_time_s"] = s.integration_time_s;
  j["band_centers_hz"] = s.band_centers_hz;
  json levels = json::array();
  for (double v : s.levels_db)
    levels.push_back(std::isfinite(v) ? json(v) : json(nullptr));
  j["levels_db"] = levels;
  return j;
}

// Fixed-width numeric formatting keeps CSV output byte-stable.
std::string csv_num(const std::optional<double>& v, const char* fmt = "%.6g") {
  if (!v) return "";
  if (*v == kPosInfDb) return ">60";
  if (!std::isfinite(*v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, fmt, *v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw Error("cannot write " + file.string());
  return out;
}

struct PositionAnalysis {
  PositionResult result;
  std::optional<std::string> error;
};

PositionAnalysis analyze_position(const SessionManifest& manifest,
                                  const ManifestReceiver& receiver,
                                  const BandDefinition& bands,
                                  const std::optional<BandSpectrum>& noise_sti,
                                  const StiConfig& sti_config, StiMode sti) {
  PositionAnalysis out;
  out.result.receiver = receiver.label;
  out.result.distance_m = receiver.distance_m;
  try {
    const AudioBuffer buffer =
        load_audio(manifest.resolve(receiver.ir_file));
    ImpulseResponse ir;
    ir.buffer = buffer;
    ir.onset_index = detect_onset(buffer);
    ir.receiver_position = receiver.label;
    ir.distance_m = receiver.distance_m;

    const std::vector<AudioBuffer> band_irs =
        octave_filterbank(ir.buffer, bands);
    for (std::size_t b = 0; b < band_irs.size(); ++b) {
      BandParams params;
      params.band_center_hz = bands.bands[b].nominal_hz;
      const double bandwidth =
          bands.upper_edge_hz(b) - bands.lower_edge_hz(b);
      try {
        const DecayCurve curve = schroeder_curve(band_irs[b], ir.onset_index);
        try {
          const RtEstimate t30 =
              reverberation_time(curve, RtMarker::kT30, bandwidth);
          params.t30_s = t30.seconds;
          params.fit_r2 = t30.fit_r2;
        } catch (const InsufficientDecayRange&) {
        }
        try {
          const RtEstimate t20 =
              reverberation_time(curve, RtMarker::kT20, bandwidth);
          params.t20_s = t20.seconds;
          if (!params.t30_s) params.fit_r2 = t20.fit_r2;
        } catch (const InsufficientDecayRange&) {
        }
        try {
          const RtEstimate edt =
              reverberation_time(curve, RtMarker::kEdt, bandwidth);
          params.edt_s = edt.seconds;
          if (!params.t30_s && !params.t20_s) params.fit_r2 = edt.fit_r2;
        } catch (const InsufficientDecayRange&) {
        }
        params.c50_db = clarity(band_irs[b], ir.onset_index);
        params.low_fit_quality =
            (params.t30_s || params.t20_s || params.edt_s) &&
            params.fit_r2 < 0.95;
      } catch (const EmptyInput&) {
        // silent band: no parameters
      }
      out.result.bands.push_back(params);
    }

    if (sti != StiMode::kOff) {
      const ModulationGrid grid = ModulationGrid::standard();
      if (sti == StiMode::kNoNoise || sti == StiMode::kBoth)
        out.result.sti_no_noise =
            compute_sti_indirect(ir, std::nullopt, sti_config, grid);
      if ((sti == StiMode::kWithNoise || sti == StiMode::kBoth) && noise_sti)
        out.result.sti_with_noise =
            compute_sti_indirect(ir, noise_sti, sti_config, grid);
    }
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace

std::filesystem::path SessionManifest::resolve(
    const std::filesystem::path& p) const {
  if (p.is_absolute()) return p;
  return base_dir / p;
}

SessionManifest SessionManifest::load(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw ManifestInvalid("cannot open manifest " + path.string());

  json doc;
  try {
    doc = json::parse(file);
  } catch (const json::parse_error& e) {
    throw ManifestInvalid(path.string() + ": " + e.what());
  }

  SessionManifest m;
  m.base_dir = path.parent_path();
  std::vector<std::string> problems;
  auto complain = [&](const std::string& msg) { problems.push_back(msg); };

  try {
    m.schema_version = doc.value("schema_version", 0);
    if (m.schema_version != 1)
      complain("schema_version must be 1 (got " +
               std::to_string(m.schema_version) + ")");

    m.session_id = doc.value("session_id", "");
    if (m.session_id.empty()) complain("session_id is required");

    m.condition = doc.value("condition", "other");
    if (m.condition != "untreated" && m.condition != "treated" &&
        m.condition != "other")
      complain("condition must be untreated, treated or other");

    if (doc.contains("room")) {
      const json& room = doc["room"];
      m.geometry.volume_m3 = room.value("volume_m3", 0.0);
      m.usage = room.value("usage", "hybrid_meeting");
      if (!(m.geometry.volume_m3 > 0.0))
        complain("room.volume_m3 must be > 0");
      if (room.contains("usage_labels"))
        m.geometry.usage_labels =
            room["usage_labels"].get<std::vector<std::string>>();
    } else {
      complain("room block (volume_m3, usage) is required");
    }

    if (doc.contains("options")) {
      const json& opt = doc["options"];
      m.bands = opt.value("bands", "octave");
      if (m.bands != "octave" && m.bands != "third")
        complain("options.bands must be octave or third");
      m.sti_noise = opt.value("sti_noise", true);
      m.gender = opt.value("gender", "male");
      if (m.gender != "male" && m.gender != "female")
        complain("options.gender must be male or female");
      if (opt.contains("sti_config"))
        m.sti_config = opt["sti_config"].get<std::string>();
    }

    if (doc.contains("targets")) {
      const json& t = doc["targets"];
      TargetProfile p;
      p.t_target_s = t.value("t_target_s", p.t_target_s);
      p.t_tolerance = t.value("t_tolerance", p.t_tolerance);
      p.c50_min_db = t.value("c50_min_db", p.c50_min_db);
      p.c50_optimal_db = t.value("c50_optimal_db", p.c50_optimal_db);
      p.sti_min = t.value("sti_min", p.sti_min);
      p.sti_goal = t.value("sti_goal", p.sti_goal);
      p.noise_max_dba = t.value("noise_max_dba", p.noise_max_dba);
      if (t.contains("low_freq_widening")) {
        p.low_freq_widening.clear();
        for (const auto& [key, value] : t["low_freq_widening"].items())
          p.low_freq_widening[std::stod(key)] = value.get<double>();
      }
      m.custom_targets = p;
    }
    if (m.usage == "custom" && !m.custom_targets)
      complain("usage 'custom' requires a targets block");

    if (doc.contains("surfaces")) {
      SurfaceAreas s;
      s.ceiling_m2 = doc["surfaces"].value("ceiling_m2", 0.0);
      s.wall_m2 = doc["surfaces"].value("wall_m2", 0.0);
      s.rear_wall_m2 = doc["surfaces"].value("rear_wall_m2", 0.0);
      m.surfaces = s;
    }

    if (!doc.contains("scenarios") || !doc["scenarios"].is_array() ||
        doc["scenarios"].empty()) {
      complain("at least one scenario is required");
    } else {
      for (const json& sc : doc["scenarios"]) {
        ManifestScenario scenario;
        scenario.source = sc.value("source", "");
        if (scenario.source.empty())
          complain("every scenario needs a source label");
        if (!sc.contains("receivers") || sc["receivers"].empty()) {
          complain("scenario '" + scenario.source +
                   "' needs at least one receiver");
        } else {
          for (const json& rc : sc["receivers"]) {
            ManifestReceiver receiver;
            receiver.label = rc.value("label", "");
            receiver.ir_file = rc.value("ir_file", "");
            receiver.distance_m = rc.value("distance_m", 0.0);
            if (receiver.label.empty())
              complain("receiver in scenario '" + scenario.source +
                       "' is missing a label");
            if (receiver.ir_file.empty())
              complain("receiver '" + receiver.label + "' in scenario '" +
                       scenario.source + "' is missing ir_file");
            if (!(receiver.distance_m > 0.0))
              complain("receiver '" + receiver.label + "' in scenario '" +
                       scenario.source + "' needs distance_m > 0");
            scenario.receivers.push_back(std::move(receiver));
          }
        }
        if (sc.contains("noise")) {
          ManifestNoise noise;
          noise.file = sc["noise"].value("file", "");
          noise.duration_s = sc["noise"].value("duration_s", 15.0);
          if (!sc["noise"].contains("calibration_offset_db"))
            complain("noise entry in scenario '" + scenario.source +
                     "' needs calibration_offset_db");
          else
            noise.calibration_offset_db = sc["noise"]["calibration_offset_db"];
          if (noise.file.empty())
            complain("noise entry in scenario '" + scenario.source +
                     "' is missing file");
          if (!(noise.duration_s > 0.0))
            complain("noise duration_s must be > 0 in scenario '" +
                     scenario.source + "'");
          scenario.noise = std::move(noise);
        }
        m.scenarios.push_back(std::move(scenario));
      }
    }
  } catch (const json::exception& e) {
    complain(std::string("malformed manifest value: ") + e.what());
  }

  if (!problems.empty()) {
    std::string msg = path.string() + " is invalid:";
    for (const std::string& p : problems) msg += "\n  - " + p;
    throw ManifestInvalid(msg);
  }
  return m;
}

SessionAnalysis analyze_session(const SessionManifest& manifest,
                                const AnalysisOptions& options) {
  SessionAnalysis analysis;
  analysis.session.session_id = manifest.session_id;
  analysis.session.condition = manifest.condition;
  analysis.session.geometry = manifest.geometry;
  analysis.profile = target_profile(manifest.usage, manifest.geometry,
                                    manifest.custom_targets);

  const BandDefinition bands =
      analysis_bands(options.bands_override.value_or(manifest.bands));

  StiConfig sti_config;
  if (manifest.sti_config)
    sti_config = load_sti_config(manifest.resolve(*manifest.sti_config));

  for (const ManifestScenario& scenario : manifest.scenarios) {
    ScenarioResult result;
    result.source = scenario.source;

    if (scenario.noise) {
      try {
        AudioBuffer noise_rec = load_audio(manifest.resolve(scenario.noise->file));
        noise_rec.calibration_offset_db = scenario.noise->calibration_offset_db;
        result.noise =
            band_leq(noise_rec, bands, scenario.noise->duration_s);
        result.noise->label = "ambient";
        result.noise_sti = band_leq(noise_rec, BandDefinition::sti_octaves(),
                                    scenario.noise->duration_s);
        result.noise_sti->label = "ambient";
      } catch (const Error& e) {
        analysis.issues.push_back({scenario.source, "", e.what()});
      }
    }

    for (const ManifestReceiver& receiver : scenario.receivers) {
      PositionAnalysis pa =
          analyze_position(manifest, receiver, bands, result.noise_sti,
                           sti_config, options.sti);
      if (pa.error) {
        analysis.issues.push_back({scenario.source, receiver.label, *pa.error});
        continue;
      }
      result.positions.push_back(std::move(pa.result));
    }

    if (!result.positions.empty()) {
      std::vector<std::vector<BandParams>> per_position;
      per_position.reserve(result.positions.size());
      for (const PositionResult& p : result.positions)
        per_position.push_back(p.bands);
      result.spatial_avg = spatial_average(per_position);
    }
    analysis.session.scenarios.push_back(std::move(result));
  }

  // Schroeder frequency from the measured mid-band (500/1000 Hz) average.
  const std::vector<BandParams> overall = session_average(analysis.session);
  double t_sum = 0.0;
  int t_count = 0;
  for (const BandParams& b : overall) {
    if ((b.band_center_hz == 500.0 || b.band_center_hz == 1000.0) && b.t30_s) {
      t_sum += *b.t30_s;
      ++t_count;
    }
  }
  if (t_count > 0 && manifest.geometry.volume_m3 > 0.0) {
    analysis.schroeder_frequency_hz =
        schroeder_frequency(manifest.geometry, t_sum / t_count);
  }
  return analysis;
}

std::vector<BandParams> session_average(const MeasurementSession& session) {
  std::vector<std::vector<BandParams>> per_position;
  for (const ScenarioResult& scenario : session.scenarios) {
    for (const PositionResult& position : scenario.positions)
      per_position.push_back(position.bands);
  }
  if (per_position.empty()) return {};
  return spatial_average(per_position);
}

namespace {

json scenario_json(const ScenarioResult& scenario,
                   const TargetProfile& profile, bool with_sti) {
  json j;
  j["source"] = scenario.source;

  json positions = json::array();
  for (const PositionResult& p : scenario.positions) {
    json pj;
    pj["receiver"] = p.receiver;
    pj["distance_m"] = p.distance_m;
    json bands = json::array();
    for (const BandParams& b : p.bands) bands.push_back(band_params_json(b));
    pj["bands"] = bands;
    if (with_sti) {
      if (p.sti_with_noise)
        pj["sti_with_noise"] = sti_result_json(*p.sti_with_noise);
      if (p.sti_no_noise)
        pj["sti_no_noise"] = sti_result_json(*p.sti_no_noise);
    }
    positions.push_back(pj);
  }
  j["positions"] = positions;

  json avg = json::array();
  for (const BandParams& b : scenario.spatial_avg)
    avg.push_back(band_params_json(b));
  j["spatial_average"] = avg;

  if (scenario.noise) {
    j["noise"] = spectrum_json(*scenario.noise);
    const NoiseCheck nc = check_noise(*scenario.noise, profile);
    json ncj;
    ncj["level_dba"] = std::isfinite(nc.level_dba) ? json(nc.level_dba)
                                                   : json(nullptr);
    ncj["limit_dba"] = nc.limit_dba;
    ncj["verdict"] = nc.pass ? "pass" : "fail";
    if (nc.degenerate) ncj["warning"] = "empty or silent spectrum";
    j["noise_check"] = ncj;
  }

  json compliance;
  json summary = json::object();
  json t30_checks = json::array();
  json t30_counts = json::object();
  for (const T30Check& c : check_t30(scenario.spatial_avg, profile)) {
    json cj;
    cj["center_hz"] = c.band_center_hz;
    cj["t30_s"] = number_or_null(c.t30_s);
    cj["target_lower_s"] = c.target_lower_s;
    cj["target_upper_s"] = c.target_upper_s;
    cj["verdict"] = c.verdict ? json(to_string(*c.verdict)) : json(nullptr);
    if (c.verdict) {
      const char* label = to_string(*c.verdict);
      t30_counts[label] = t30_counts.value(label, 0) + 1;
    }
    t30_checks.push_back(cj);
  }
  compliance["t30"] = t30_checks;
  summary["t30"] = t30_counts;
  json c50_checks = json::array();
  json c50_counts = json::object();
  for (const C50Check& c : check_c50(scenario.spatial_avg, profile)) {
    json cj;
    cj["center_hz"] = c.band_center_hz;
    cj["c50_db"] = number_or_null(c.c50_db);
    cj["verdict"] = c.verdict ? json(to_string(*c.verdict)) : json(nullptr);
    if (c.verdict) {
      const char* label = to_string(*c.verdict);
      c50_counts[label] = c50_counts.value(label, 0) + 1;
    }
    c50_checks.push_back(cj);
  }
  compliance["c50"] = c50_checks;
  summary["c50"] = c50_counts;
  if (with_sti) {
    std::vector<std::pair<std::string, StiResult>> pairs;
    for (const PositionResult& p : scenario.positions) {
      if (p.sti_with_noise) pairs.emplace_back(p.receiver, *p.sti_with_noise);
      else if (p.sti_no_noise) pairs.emplace_back(p.receiver, *p.sti_no_noise);
    }
    json sti_checks = json::array();
    json sti_counts = json::object();
    for (const StiCheck& c : check_sti(pairs, profile)) {
      json cj;
      cj["receiver"] = c.receiver;
      cj["sti"] = c.sti;
      cj["rating"] = c.rating;
      cj["verdict"] = to_string(c.verdict);
      const char* label = to_string(c.verdict);
      sti_counts[label] = sti_counts.value(label, 0) + 1;
      sti_checks.push_back(cj);
    }
    compliance["sti"] = sti_checks;
    summary["sti"] = sti_counts;
  }
  compliance["summary"] = summary;
  j["compliance"] = compliance;
  return j;
}

json report_base(const SessionManifest& manifest,
                 const SessionAnalysis& analysis, const char* command,
                 bool with_timestamp) {
  json j;
  j["schema_version"] = 1;
  j["command"] = command;
  json session;
  session["id"] = manifest.session_id;
  session["condition"] = manifest.condition;
  session["room"] = {{"volume_m3", manifest.geometry.volume_m3},
                     {"usage", manifest.usage}};
  j["session"] = session;
  j["bands"] = manifest.bands;
  j["schroeder_frequency_hz"] =
      number_or_null(analysis.schroeder_frequency_hz);
  json issues = json::array();
  for (const FileIssue& issue : analysis.issues) {
    issues.push_back({{"scenario", issue.scenario},
                      {"receiver", issue.receiver},
                      {"message", issue.message}});
  }
  j["issues"] = issues;
  if (with_timestamp) j["generated_at"] = timestamp_utc();
  return j;
}

}  // namespace

json analysis_report_json(const SessionManifest& manifest,
                          const SessionAnalysis& analysis,
                          bool with_timestamp) {
  json j = report_base(manifest, analysis, "analyze", with_timestamp);
  json scenarios = json::array();
  for (const ScenarioResult& s : analysis.session.scenarios)
    scenarios.push_back(scenario_json(s, analysis.profile, false));
  j["scenarios"] = scenarios;
  return j;
}

json sti_report_json(const SessionManifest& manifest,
                     const SessionAnalysis& analysis, bool with_timestamp) {
  json j = report_base(manifest, analysis, "sti", with_timestamp);
  j["gender_emphasis"] = manifest.gender;
  json scenarios = json::array();
  for (const ScenarioResult& s : analysis.session.scenarios)
    scenarios.push_back(scenario_json(s, analysis.profile, true));
  j["scenarios"] = scenarios;
  return j;
}

namespace {

json band_delta_json(const BandDelta& d) {
  json j;
  j["center_hz"] = d.band_center_hz;
  j["before"] = number_or_null(d.before);
  j["after"] = number_or_null(d.after);
  j["delta"] = number_or_null(d.delta);
  if (d.delta_pct) j["delta_pct"] = *d.delta_pct;
  return j;
}

json sti_delta_json(const StiDelta& d) {
  json j;
  j["before"] = number_or_null(d.before);
  j["after"] = number_or_null(d.after);
  j["delta"] = number_or_null(d.delta);
  if (!d.transition.empty()) j["transition"] = d.transition;
  return j;
}

}  // namespace

json compare_report_json(const CompareReport& report, bool with_timestamp) {
  json j;
  j["schema_version"] = 1;
  j["command"] = "compare";
  j["before"] = report.before_id;
  j["after"] = report.after_id;
  json scenarios = json::array();
  for (const ScenarioDelta& s : report.scenarios) {
    json sj;
    sj["source"] = s.source;
    json positions = json::array();
    for (const PositionDelta& p : s.positions) {
      json pj;
      pj["receiver"] = p.receiver;
      json t30 = json::array();
      for (const BandDelta& d : p.t30) t30.push_back(band_delta_json(d));
      pj["t30"] = t30;
      json c50 = json::array();
      for (const BandDelta& d : p.c50) c50.push_back(band_delta_json(d));
      pj["c50"] = c50;
      pj["sti_with_noise"] = sti_delta_json(p.sti_with_noise);
      pj["sti_no_noise"] = sti_delta_json(p.sti_no_noise);
      positions.push_back(pj);
    }
    sj["positions"] = positions;
    json t30_avg = json::array();
    for (const BandDelta& d : s.t30_avg) t30_avg.push_back(band_delta_json(d));
    sj["t30_spatial_average"] = t30_avg;
    json c50_avg = json::array();
    for (const BandDelta& d : s.c50_avg) c50_avg.push_back(band_delta_json(d));
    sj["c50_spatial_average"] = c50_avg;
    sj["unmatched_before"] = s.unmatched_before;
    sj["unmatched_after"] = s.unmatched_after;
    scenarios.push_back(sj);
  }
  j["scenarios"] = scenarios;
  j["unmatched_scenarios_before"] = report.unmatched_scenarios_before;
  j["unmatched_scenarios_after"] = report.unmatched_scenarios_after;
  json transitions = json::object();
  for (const auto& [label, count] : report.sti_transitions)
    transitions[label] = count;
  j["sti_transitions"] = transitions;
  if (with_timestamp) j["generated_at"] = timestamp_utc();
  return j;
}

json advisor_report_json(const SessionManifest& manifest,
                         const AdvisorReport& report, bool with_timestamp) {
  json j;
  j["schema_version"] = 1;
  j["command"] = "advise";
  j["session"] = {{"id", manifest.session_id},
                  {"volume_m3", manifest.geometry.volume_m3}};
  j["absorber_coefficient"] = report.absorber_coefficient;
  json bands = json::array();
  for (const AbsorptionAdvice& a : report.bands) {
    json aj;
    aj["center_hz"] = a.band_center_hz;
    aj["current_t30_s"] = number_or_null(a.current_t30_s);
    aj["target_t30_s"] = a.target_t30_s;
    aj["added_absorption_m2"] = a.added_absorption_m2;
    if (a.over_damped) aj["over_damped"] = true;
    if (a.ceiling_coverage_fraction)
      aj["ceiling_coverage_fraction"] = *a.ceiling_coverage_fraction;
    bands.push_back(aj);
  }
  j["bands"] = bands;
  j["guidance"] = report.guidance;
  if (with_timestamp) j["generated_at"] = timestamp_utc();
  return j;
}

void write_analysis_csv(const std::filesystem::path& out_dir,
                        const SessionAnalysis& analysis) {
  auto write_param = [&](const char* name, auto getter) {
    std::ofstream out = open_out(out_dir / (std::string(name) + ".csv"));
    out << "scenario,receiver,band_hz,value,fit_r2\n";
    for (const ScenarioResult& s : analysis.session.scenarios) {
      for (const PositionResult& p : s.positions) {
        for (const BandParams& b : p.bands) {
          out << s.source << ',' << p.receiver << ',' << b.band_center_hz
              << ',' << csv_num(getter(b)) << ',' << csv_num(b.fit_r2)
              << '\n';
        }
      }
      for (const BandParams& b : s.spatial_avg) {
        out << s.source << ",average," << b.band_center_hz << ','
            << csv_num(getter(b)) << ',' << csv_num(b.fit_r2) << '\n';
      }
    }
  };
  write_param("t30", [](const BandParams& b) { return b.t30_s; });
  write_param("edt", [](const BandParams& b) { return b.edt_s; });
  write_param("c50", [](const BandParams& b) { return b.c50_db; });

  std::ofstream out = open_out(out_dir / "noise.csv");
  out << "scenario,band_hz,leq_db\n";
  for (const ScenarioResult& s : analysis.session.scenarios) {
    if (!s.noise) continue;
    for (std::size_t k = 0; k < s.noise->band_centers_hz.size(); ++k) {
      const double level = s.noise->levels_db[k];
      out << s.source << ',' << s.noise->band_centers_hz[k] << ','
          << (std::isfinite(level) ? csv_num(level) : "<0") << '\n';
    }
  }
}

void write_sti_csv(const std::filesystem::path& out_dir,
                   const SessionAnalysis& analysis,
                   const std::string& gender_emphasis) {
  std::ofstream out = open_out(out_dir / "sti.csv");
  out << "scenario,receiver,distance_m,noise_included,sti_male,sti_female,"
         "sti_selected,rating_male,rating_female\n";
  for (const ScenarioResult& s : analysis.session.scenarios) {
    for (const PositionResult& p : s.positions) {
      for (const auto* r : {&p.sti_with_noise, &p.sti_no_noise}) {
        if (!r->has_value()) continue;
        const StiResult& sti = **r;
        const double selected =
            gender_emphasis == "female" ? sti.sti_female : sti.sti_male;
        out << s.source << ',' << p.receiver << ',' << csv_num(p.distance_m)
            << ',' << (sti.noise_included ? "true" : "false") << ','
            << csv_num(sti.sti_male) << ',' << csv_num(sti.sti_female) << ','
            << csv_num(selected) << ',' << sti.rating_male << ','
            << sti.rating_female << '\n';
      }
    }
  }
}

void write_compare_csv(const std::filesystem::path& out_dir,
                       const CompareReport& report) {
  {
    std::ofstream out = open_out(out_dir / "delta_t30.csv");
    out << "scenario,receiver,band_hz,before_s,after_s,delta_s,delta_pct\n";
    for (const ScenarioDelta& s : report.scenarios) {
      for (const PositionDelta& p : s.positions) {
        for (const BandDelta& d : p.t30) {
          out << s.source << ',' << p.receiver << ',' << d.band_center_hz
              << ',' << csv_num(d.before) << ',' << csv_num(d.after) << ','
              << csv_num(d.delta) << ',' << csv_num(d.delta_pct) << '\n';
        }
      }
      for (const BandDelta& d : s.t30_avg) {
        out << s.source << ",average," << d.band_center_hz << ','
            << csv_num(d.before) << ',' << csv_num(d.after) << ','
            << csv_num(d.delta) << ',' << csv_num(d.delta_pct) << '\n';
      }
    }
  }
  {
    std::ofstream out = open_out(out_dir / "delta_c50.csv");
    out << "scenario,receiver,band_hz,before_db,after_db,delta_db\n";
    for (const ScenarioDelta& s : report.scenarios) {
      for (const PositionDelta& p : s.positions) {
        for (const BandDelta& d : p.c50) {
          out << s.source << ',' << p.receiver << ',' << d.band_center_hz
              << ',' << csv_num(d.before) << ',' << csv_num(d.after) << ','
              << csv_num(d.delta) << '\n';
        }
      }
      for (const BandDelta& d : s.c50_avg) {
        out << s.source << ",average," << d.band_center_hz << ','
            << csv_num(d.before) << ',' << csv_num(d.after) << ','
            << csv_num(d.delta) << '\n';
      }
    }
  }
  {
    std::ofstream out = open_out(out_dir / "delta_sti.csv");
    out << "scenario,receiver,mode,before,after,delta,transition\n";
    for (const ScenarioDelta& s : report.scenarios) {
      for (const PositionDelta& p : s.positions) {
        const std::pair<const char*, const StiDelta*> rows[] = {
            {"with_noise", &p.sti_with_noise}, {"no_noise", &p.sti_no_noise}};
        for (const auto& [mode, d] : rows) {
          if (!d->before && !d->after) continue;
          out << s.source << ',' << p.receiver << ',' << mode << ','
              << csv_num(d->before) << ',' << csv_num(d->after) << ','
              << csv_num(d->delta) << ',' << d->transition << '\n';
        }
      }
    }
  }
}

void write_advisor_csv(const std::filesystem::path& out_dir,
                       const AdvisorReport& report) {
  std::ofstream out = open_out(out_dir / "absorption.csv");
  out << "band_hz,current_t30_s,target_t30_s,added_absorption_m2,"
         "ceiling_coverage_pct\n";
  for (const AbsorptionAdvice& a : report.bands) {
    out << a.band_center_hz << ',' << csv_num(a.current_t30_s) << ','
        << csv_num(a.target_t30_s) << ',' << csv_num(a.added_absorption_m2)
        << ',';
    if (a.ceiling_coverage_fraction)
      out << csv_num(100.0 * *a.ceiling_coverage_fraction);
    out << '\n';
  }
}

void export_session_decay_csv(const SessionManifest& manifest,
                              const std::filesystem::path& out_dir,
                              const std::optional<std::string>& bands_name) {
  const BandDefinition bands =
      analysis_bands(bands_name.value_or(manifest.bands));
  for (const ManifestScenario& scenario : manifest.scenarios) {
    for (const ManifestReceiver& receiver : scenario.receivers) {
      try {
        const AudioBuffer buffer =
            load_audio(manifest.resolve(receiver.ir_file));
        const std::size_t onset = detect_onset(buffer);
        const std::vector<AudioBuffer> band_irs =
            octave_filterbank(buffer, bands);
        std::vector<std::pair<double, DecayCurve>> curves;
        for (std::size_t b = 0; b < band_irs.size(); ++b) {
          try {
            curves.emplace_back(bands.bands[b].nominal_hz,
                                schroeder_curve(band_irs[b], onset));
          } catch (const Error&) {
          }
        }
        export_decay_csv(out_dir / ("decay_" + scenario.source + "_" +
                                    receiver.label + ".csv"),
                         curves);
      } catch (const Error&) {
        // the analysis pass already reports unreadable files
      }
    }
  }
}

void export_decay_csv(
    const std::filesystem::path& file,
    const std::vector<std::pair<double, DecayCurve>>& curves) {
  std::ofstream out = open_out(file);
  out << "band_hz,time_s,level_db\n";
  for (const auto& [band, curve] : curves) {
    for (std::size_t i = 0; i < curve.levels_db.size(); ++i) {
      const double level = curve.levels_db[i];
      if (!std::isfinite(level)) continue;
      out << band << ','
          << csv_num(static_cast<double>(i) / curve.sample_rate) << ','
          << csv_num(level) << '\n';
    }
  }
}

}  // namespace rosa
