// rosa - offline room-acoustics analysis for speech intelligibility.
//
// Subcommands:
//   analyze <manifest>             T30/EDT/C50 per band, spatial averages,
//                                  compliance verdicts
//   sti <manifest>                 speech transmission index per position
//   compare <before> <after>       before/after treatment deltas
//   advise <manifest>              required added absorption per band
//
// Exit codes: 0 complete, 1 partial (some files failed), 2 unusable.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "rosa/session.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitUnusable = 2;

struct CommonFlags {
  std::string out_dir = ".";
  std::string bands;  // empty: use the manifest's choice
  bool no_timestamp = false;
  bool export_decay = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--out", flags.out_dir, "Output directory for reports");
  cmd->add_option("--bands", flags.bands, "Band fraction: octave or third")
      ->check(CLI::IsMember({"octave", "third"}));
  cmd->add_flag("--no-timestamp", flags.no_timestamp,
                "Omit the generation timestamp (byte-stable reports)");
}

void write_report(const fs::path& out_dir, const nlohmann::json& report) {
  fs::create_directories(out_dir);
  std::ofstream out(out_dir / "report.json", std::ios::trunc);
  if (!out) throw rosa::Error("cannot write " + (out_dir / "report.json").string());
  out << report.dump(2) << '\n';
}

rosa::AnalysisOptions make_options(const CommonFlags& flags,
                                   rosa::StiMode sti) {
  rosa::AnalysisOptions options;
  options.sti = sti;
  if (!flags.bands.empty()) options.bands_override = flags.bands;
  return options;
}

int finish(const rosa::SessionAnalysis& analysis) {
  for (const rosa::FileIssue& issue : analysis.issues) {
    std::cerr << "warning: " << issue.scenario;
    if (!issue.receiver.empty()) std::cerr << "/" << issue.receiver;
    std::cerr << ": " << issue.message << '\n';
  }
  bool any_position = false;
  for (const auto& scenario : analysis.session.scenarios)
    any_position = any_position || !scenario.positions.empty();
  if (!any_position) {
    std::cerr << "error: no position could be analyzed\n";
    return kExitUnusable;
  }
  return analysis.partial() ? kExitPartial : kExitOk;
}

int run_analyze(const std::string& manifest_path, const CommonFlags& flags) {
  const rosa::SessionManifest manifest =
      rosa::SessionManifest::load(manifest_path);
  const rosa::SessionAnalysis analysis =
      rosa::analyze_session(manifest, make_options(flags, rosa::StiMode::kOff));

  const fs::path out_dir(flags.out_dir);
  fs::create_directories(out_dir);
  write_report(out_dir,
               rosa::analysis_report_json(manifest, analysis,
                                          !flags.no_timestamp));
  rosa::write_analysis_csv(out_dir, analysis);
  if (flags.export_decay) {
    rosa::export_session_decay_csv(
        manifest, out_dir,
        flags.bands.empty() ? std::nullopt
                            : std::optional<std::string>(flags.bands));
  }
  return finish(analysis);
}

int run_sti(const std::string& manifest_path, const CommonFlags& flags,
            bool with_noise, bool no_noise, const std::string& gender) {
  const rosa::SessionManifest manifest =
      rosa::SessionManifest::load(manifest_path);

  bool use_noise = manifest.sti_noise;
  if (with_noise) use_noise = true;
  if (no_noise) use_noise = false;
  if (use_noise) {
    std::string missing;
    for (const auto& scenario : manifest.scenarios) {
      if (!scenario.noise) missing += (missing.empty() ? "" : ", ") + scenario.source;
    }
    if (!missing.empty())
      throw rosa::MissingNoise("--with-noise requested but scenarios have no "
                               "noise entry: " + missing);
  }

  rosa::SessionManifest manifest_out = manifest;
  if (!gender.empty()) manifest_out.gender = gender;

  const rosa::SessionAnalysis analysis = rosa::analyze_session(
      manifest_out,
      make_options(flags,
                   use_noise ? rosa::StiMode::kBoth : rosa::StiMode::kNoNoise));

  const fs::path out_dir(flags.out_dir);
  fs::create_directories(out_dir);
  write_report(out_dir, rosa::sti_report_json(manifest_out, analysis,
                                              !flags.no_timestamp));
  rosa::write_sti_csv(out_dir, analysis, manifest_out.gender);
  return finish(analysis);
}

int run_compare(const std::string& before_path, const std::string& after_path,
                const CommonFlags& flags) {
  const rosa::SessionManifest before_manifest =
      rosa::SessionManifest::load(before_path);
  const rosa::SessionManifest after_manifest =
      rosa::SessionManifest::load(after_path);

  const rosa::AnalysisOptions options =
      make_options(flags, rosa::StiMode::kBoth);
  const rosa::SessionAnalysis before =
      rosa::analyze_session(before_manifest, options);
  const rosa::SessionAnalysis after =
      rosa::analyze_session(after_manifest, options);

  const rosa::CompareReport report =
      rosa::compare_sessions(before.session, after.session);

  const fs::path out_dir(flags.out_dir);
  fs::create_directories(out_dir);
  write_report(out_dir, rosa::compare_report_json(report, !flags.no_timestamp));
  rosa::write_compare_csv(out_dir, report);

  if (before.partial() || after.partial()) return kExitPartial;
  return kExitOk;
}

int run_advise(const std::string& manifest_path, const CommonFlags& flags,
               const std::string& target) {
  const rosa::SessionManifest manifest =
      rosa::SessionManifest::load(manifest_path);
  const rosa::SessionAnalysis analysis =
      rosa::analyze_session(manifest, make_options(flags, rosa::StiMode::kOff));

  rosa::TargetProfile profile = analysis.profile;
  if (!target.empty())
    profile = rosa::target_profile(target, manifest.geometry,
                                   manifest.custom_targets);

  const std::vector<rosa::BandParams> overall =
      rosa::session_average(analysis.session);
  if (overall.empty()) {
    std::cerr << "error: no position could be analyzed\n";
    return kExitUnusable;
  }
  const rosa::AdvisorReport report = rosa::sabine_advisor(
      manifest.geometry, overall, profile, manifest.surfaces);

  const fs::path out_dir(flags.out_dir);
  fs::create_directories(out_dir);
  write_report(out_dir, rosa::advisor_report_json(manifest, report,
                                                  !flags.no_timestamp));
  rosa::write_advisor_csv(out_dir, report);
  for (const std::string& line : report.guidance)
    std::cout << line << '\n';
  return finish(analysis);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Room-acoustics analysis for speech intelligibility"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string manifest_path, before_path, after_path;
  bool with_noise = false, no_noise = false;
  std::string gender, target;

  CLI::App* analyze = app.add_subcommand("analyze",
                                         "Decay parameters and compliance");
  analyze->add_option("manifest", manifest_path, "Session manifest")
      ->required();
  analyze->add_flag("--export-decay", flags.export_decay,
                    "Write per-band decay curves as CSV");
  add_common(analyze, flags);

  CLI::App* sti = app.add_subcommand("sti", "Speech transmission index");
  sti->add_option("manifest", manifest_path, "Session manifest")->required();
  sti->add_flag("--with-noise", with_noise,
                "Include measured ambient noise in the STI");
  sti->add_flag("--no-noise", no_noise, "Ignore ambient noise entries");
  sti->add_option("--gender", gender, "Report emphasis: male or female")
      ->check(CLI::IsMember({"male", "female"}));
  add_common(sti, flags);

  CLI::App* compare = app.add_subcommand("compare",
                                         "Before/after session deltas");
  compare->add_option("before", before_path, "Manifest before treatment")
      ->required();
  compare->add_option("after", after_path, "Manifest after treatment")
      ->required();
  add_common(compare, flags);

  CLI::App* advise = app.add_subcommand("advise",
                                        "Required absorption to reach target");
  advise->add_option("manifest", manifest_path, "Session manifest")
      ->required();
  advise->add_option("--target", target,
                     "Target profile: hybrid_meeting, lecture or custom");
  add_common(advise, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) return run_analyze(manifest_path, flags);
    if (sti->parsed())
      return run_sti(manifest_path, flags, with_noise, no_noise, gender);
    if (compare->parsed()) return run_compare(before_path, after_path, flags);
    if (advise->parsed()) return run_advise(manifest_path, flags, target);
  } catch (const rosa::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUnusable;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return kExitUnusable;
  }
  return kExitUnusable;
}
