#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rosa/compliance.hpp"
#include "rosa/sti.hpp"
#include "rosa/types.hpp"

namespace rosa {

struct ManifestReceiver {
  std::string label;
  std::filesystem::path ir_file;
  double distance_m = 0.0;
};

struct ManifestNoise {
  std::filesystem::path file;
  double calibration_offset_db = 0.0;
  double duration_s = 15.0;
};

struct ManifestScenario {
  std::string source;
  std::vector<ManifestReceiver> receivers;
  std::optional<ManifestNoise> noise;
};

// One measurement session as described by a manifest file: room metadata
// plus the source/receiver layout and the recordings to analyze.
struct SessionManifest {
  int schema_version = 1;
  std::string session_id;
  std::string condition = "other";  // untreated | treated | other
  RoomGeometry geometry;
  std::string usage = "hybrid_meeting";
  std::string bands = "octave";  // octave | third
  std::string gender = "male";   // report emphasis; both always computed
  bool sti_noise = true;
  std::optional<TargetProfile> custom_targets;
  std::optional<std::filesystem::path> sti_config;
  std::optional<SurfaceAreas> surfaces;
  std::vector<ManifestScenario> scenarios;
  std::filesystem::path base_dir;  // directory the manifest lives in

  std::filesystem::path resolve(const std::filesystem::path& p) const;

  // Throws ManifestInvalid listing every violation at once.
  static SessionManifest load(const std::filesystem::path& path);
};

enum class StiMode { kOff, kWithNoise, kNoNoise, kBoth };

struct AnalysisOptions {
  StiMode sti = StiMode::kOff;
  std::optional<std::string> bands_override;  // octave | third
};

struct FileIssue {
  std::string scenario;
  std::string receiver;  // empty for scenario-level (noise) issues
  std::string message;
};

struct SessionAnalysis {
  MeasurementSession session;
  TargetProfile profile;
  std::optional<double> schroeder_frequency_hz;  // from measured mid-band T30
  std::vector<FileIssue> issues;

  bool partial() const { return !issues.empty(); }
};

// Runs the full per-position pipeline: load, onset detection, filterbank,
// decay parameters, optional STI, per-scenario noise levels and spatial
// averages. Per-file failures are collected in `issues`; the batch never
// aborts on one bad file.
SessionAnalysis analyze_session(const SessionManifest& manifest,
                                const AnalysisOptions& options = {});

// Session-wide per-band average across all scenarios and positions.
std::vector<BandParams> session_average(const MeasurementSession& session);

// ---- report emission ----

nlohmann::json analysis_report_json(const SessionManifest& manifest,
                                    const SessionAnalysis& analysis,
                                    bool with_timestamp);
nlohmann::json sti_report_json(const SessionManifest& manifest,
                               const SessionAnalysis& analysis,
                               bool with_timestamp);
nlohmann::json compare_report_json(const CompareReport& report,
                                   bool with_timestamp);
nlohmann::json advisor_report_json(const SessionManifest& manifest,
                                   const AdvisorReport& report,
                                   bool with_timestamp);

void write_analysis_csv(const std::filesystem::path& out_dir,
                        const SessionAnalysis& analysis);
void write_sti_csv(const std::filesystem::path& out_dir,
                   const SessionAnalysis& analysis,
                   const std::string& gender_emphasis);
void write_compare_csv(const std::filesystem::path& out_dir,
                       const CompareReport& report);
void write_advisor_csv(const std::filesystem::path& out_dir,
                       const AdvisorReport& report);

// Decay curves per band for one impulse response, as (time_s, level_db)
// CSV rows; used by the --export-decay option.
void export_decay_csv(const std::filesystem::path& file,
                      const std::vector<std::pair<double, DecayCurve>>& curves);

// Writes decay_<scenario>_<receiver>.csv for every readable position.
void export_session_decay_csv(const SessionManifest& manifest,
                              const std::filesystem::path& out_dir,
                              const std::optional<std::string>& bands = {});

}  // namespace rosa
