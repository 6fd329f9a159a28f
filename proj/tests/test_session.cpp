#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rosa/session.hpp"
#include "rosa/wave.hpp"
#include "support/fixtures.hpp"

using namespace rosa;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ROSA_CLI_PATH) + " " + args +
                          " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

fixtures::SessionFixtureSpec flat_spec(double t_seconds, bool with_noise) {
  fixtures::SessionFixtureSpec spec = fixtures::untreated_spec();
  spec.id = "flat";
  spec.condition = "other";
  spec.band_t_s.fill(t_seconds);
  spec.with_noise = with_noise;
  return spec;
}

}  // namespace

TEST_CASE("manifest validation lists every violation at once") {
  const auto dir = fixtures::scratch_dir("manifest_invalid");
  {
    std::ofstream out(dir / "bad.json");
    out << R"({"schema_version": 2, "scenarios": []})";
  }
  try {
    SessionManifest::load(dir / "bad.json");
    FAIL("expected ManifestInvalid");
  } catch (const ManifestInvalid& e) {
    const std::string msg = e.what();
    CHECK(msg.find("schema_version") != std::string::npos);
    CHECK(msg.find("session_id") != std::string::npos);
    CHECK(msg.find("room") != std::string::npos);
    CHECK(msg.find("scenario") != std::string::npos);
  }

  {
    std::ofstream out(dir / "junk.json");
    out << "{ not json";
  }
  CHECK_THROWS_AS(SessionManifest::load(dir / "junk.json"), ManifestInvalid);
  CHECK_THROWS_AS(SessionManifest::load(dir / "absent.json"), ManifestInvalid);
}

TEST_CASE("flat T = 0.5 s fixture: spatial average within 1%, all pass") {
  const auto dir = fixtures::scratch_dir("session_flat");
  const fs::path manifest_path =
      fixtures::write_session_fixture(dir, flat_spec(0.5, false));

  const SessionManifest manifest = SessionManifest::load(manifest_path);
  const SessionAnalysis analysis = analyze_session(manifest);
  CHECK(analysis.issues.empty());
  REQUIRE(analysis.session.scenarios.size() == 1);

  const ScenarioResult& scenario = analysis.session.scenarios[0];
  REQUIRE(scenario.positions.size() == 2);
  REQUIRE(scenario.spatial_avg.size() == 8);
  for (const BandParams& b : scenario.spatial_avg) {
    CAPTURE(b.band_center_hz);
    REQUIRE(b.t30_s.has_value());
    CHECK(*b.t30_s == doctest::Approx(0.5).epsilon(0.01));
  }
  for (const T30Check& c : check_t30(scenario.spatial_avg, analysis.profile)) {
    REQUIRE(c.verdict.has_value());
    CHECK(*c.verdict == T30Verdict::kPass);
  }

  // Schroeder frequency from the measured mid-band average:
  // 2000 sqrt(0.5 / 150.8) = 115.2 Hz.
  REQUIRE(analysis.schroeder_frequency_hz.has_value());
  CHECK(*analysis.schroeder_frequency_hz ==
        doctest::Approx(115.2).epsilon(0.01));
}

TEST_CASE("missing IR file: partial result, batch continues") {
  const auto dir = fixtures::scratch_dir("session_partial");
  const fs::path manifest_path =
      fixtures::write_session_fixture(dir, flat_spec(0.5, false));

  json doc = json::parse(slurp(manifest_path));
  doc["scenarios"][0]["receivers"].push_back(
      {{"label", "M9"}, {"ir_file", "missing.wav"}, {"distance_m", 3.0}});
  {
    std::ofstream out(manifest_path, std::ios::trunc);
    out << doc.dump(2);
  }

  const SessionManifest manifest = SessionManifest::load(manifest_path);
  const SessionAnalysis analysis = analyze_session(manifest);
  CHECK(analysis.partial());
  REQUIRE(analysis.issues.size() == 1);
  CHECK(analysis.issues[0].receiver == "M9");
  CHECK(analysis.session.scenarios[0].positions.size() == 2);
}

TEST_CASE("cli exit codes: 0 complete, 1 partial, 2 unusable") {
  const auto dir = fixtures::scratch_dir("cli_exit");
  const fs::path manifest_path =
      fixtures::write_session_fixture(dir, flat_spec(0.5, false));
  const fs::path out = dir / "out";

  CHECK(run_cli("analyze " + manifest_path.string() + " --out " +
                out.string()) == 0);
  CHECK(fs::exists(out / "report.json"));
  CHECK(fs::exists(out / "t30.csv"));
  CHECK(fs::exists(out / "c50.csv"));

  // partial: add a missing file
  json doc = json::parse(slurp(manifest_path));
  doc["scenarios"][0]["receivers"].push_back(
      {{"label", "M9"}, {"ir_file", "missing.wav"}, {"distance_m", 3.0}});
  {
    std::ofstream o(manifest_path, std::ios::trunc);
    o << doc.dump(2);
  }
  CHECK(run_cli("analyze " + manifest_path.string() + " --out " +
                out.string()) == 1);

  // unusable: empty scenario list
  doc["scenarios"] = json::array();
  {
    std::ofstream o(dir / "empty.json", std::ios::trunc);
    o << doc.dump(2);
  }
  CHECK(run_cli("analyze " + (dir / "empty.json").string() + " --out " +
                out.string()) == 2);
}

TEST_CASE("determinism: --no-timestamp reports are byte-identical") {
  const auto dir = fixtures::scratch_dir("cli_determinism");
  const fs::path manifest_path =
      fixtures::write_session_fixture(dir, fixtures::untreated_spec());

  const fs::path out1 = dir / "run1";
  const fs::path out2 = dir / "run2";
  REQUIRE(run_cli("analyze " + manifest_path.string() + " --no-timestamp" +
                  " --out " + out1.string()) == 0);
  REQUIRE(run_cli("analyze " + manifest_path.string() + " --no-timestamp" +
                  " --out " + out2.string()) == 0);

  for (const char* name : {"report.json", "t30.csv", "edt.csv", "c50.csv",
                           "noise.csv"}) {
    CAPTURE(name);
    const std::string a = slurp(out1 / name);
    CHECK(!a.empty());
    CHECK(a == slurp(out2 / name));
  }
  // and the timestamp really is absent
  CHECK(slurp(out1 / "report.json").find("generated_at") == std::string::npos);
}

TEST_CASE("sti command: ideal impulse scores 1.000 excellent") {
  const auto dir = fixtures::scratch_dir("cli_sti_ideal");

  AudioBuffer impulse;
  impulse.sample_rate = 48000;
  impulse.samples.assign(24000, 0.0);
  impulse.samples[0] = 1.0;
  save_wave_float32(dir / "impulse.wav", impulse);
  {
    std::ofstream out(dir / "manifest.json");
    out << R"({
      "schema_version": 1,
      "session_id": "ideal",
      "condition": "other",
      "room": {"volume_m3": 150.8, "usage": "hybrid_meeting"},
      "scenarios": [{
        "source": "S1",
        "receivers": [{"label": "M1", "ir_file": "impulse.wav",
                       "distance_m": 1.0}]
      }]
    })";
  }

  const fs::path out = dir / "out";
  CHECK(run_cli("sti " + (dir / "manifest.json").string() + " --no-noise" +
                " --no-timestamp --out " + out.string()) == 0);
  const json report = json::parse(slurp(out / "report.json"));
  const json& sti =
      report["scenarios"][0]["positions"][0]["sti_no_noise"];
  CHECK(std::abs(sti["sti_male"].get<double>() - 1.0) < 0.001);
  CHECK(std::abs(sti["sti_female"].get<double>() - 1.0) < 0.001);
  CHECK(sti["rating_male"] == "excellent");
  CHECK(sti["mtf"].size() == 7);
  CHECK(sti["mtf"][0].size() == 14);
  CHECK(fs::exists(out / "sti.csv"));
}

TEST_CASE("sti command: --with-noise without noise entries is MissingNoise") {
  const auto dir = fixtures::scratch_dir("cli_sti_missing_noise");
  const fs::path manifest_path =
      fixtures::write_session_fixture(dir, flat_spec(0.5, false));
  CHECK(run_cli("sti " + manifest_path.string() + " --with-noise --out " +
                (dir / "out").string()) == 2);
}

TEST_CASE("sti with noise is strictly below sti without noise") {
  const auto dir = fixtures::scratch_dir("cli_sti_noise");
  const fs::path manifest_path =
      fixtures::write_session_fixture(dir, fixtures::treated_spec());

  const SessionManifest manifest = SessionManifest::load(manifest_path);
  AnalysisOptions options;
  options.sti = StiMode::kBoth;
  const SessionAnalysis analysis = analyze_session(manifest, options);
  REQUIRE(analysis.issues.empty());
  for (const PositionResult& p : analysis.session.scenarios[0].positions) {
    REQUIRE(p.sti_with_noise.has_value());
    REQUIRE(p.sti_no_noise.has_value());
    CHECK(p.sti_with_noise->sti_male < p.sti_no_noise->sti_male);
    CHECK(p.sti_with_noise->sti_female < p.sti_no_noise->sti_female);
  }
}

TEST_CASE("treated fixtures: female STI sits ~0.003 above male") {
  // Regression target on the shipped fixtures (not an exact law): in the
  // treated-room regime the female weighting, which ignores the noisy
  // 125 Hz band, comes out slightly ahead.
  const auto dir = fixtures::scratch_dir("sti_gender_gap");
  const fs::path manifest_path =
      fixtures::write_session_fixture(dir, fixtures::treated_spec());

  AnalysisOptions options;
  options.sti = StiMode::kBoth;
  const SessionAnalysis analysis =
      analyze_session(SessionManifest::load(manifest_path), options);
  REQUIRE(analysis.issues.empty());
  for (const PositionResult& p : analysis.session.scenarios[0].positions) {
    REQUIRE(p.sti_with_noise.has_value());
    const double gap = p.sti_with_noise->sti_female -
                       p.sti_with_noise->sti_male;
    CAPTURE(p.receiver);
    CHECK(gap >= 0.001);
    CHECK(gap <= 0.005);
  }
}

TEST_CASE("manifest sti_config option overrides the speech reference") {
  const auto dir = fixtures::scratch_dir("session_sti_config");
  const fs::path manifest_path =
      fixtures::write_session_fixture(dir, fixtures::treated_spec());
  {
    // 12 dB quieter talker: every with-noise band SNR drops, STI drops.
    std::ofstream out(dir / "quiet_talker.conf");
    out << "speech.band_levels_at_1m = 37.9 42.3 46.0 40.0 32.8 26.8 21.5\n"
           "speech.vocal_effort = quiet\n";
  }

  AnalysisOptions options;
  options.sti = StiMode::kBoth;
  const SessionManifest base = SessionManifest::load(manifest_path);
  const SessionAnalysis with_default = analyze_session(base, options);

  json doc = json::parse(slurp(manifest_path));
  doc["options"]["sti_config"] = "quiet_talker.conf";
  {
    std::ofstream out(manifest_path, std::ios::trunc);
    out << doc.dump(2);
  }
  const SessionAnalysis with_quiet =
      analyze_session(SessionManifest::load(manifest_path), options);

  const auto& p_default = with_default.session.scenarios[0].positions[0];
  const auto& p_quiet = with_quiet.session.scenarios[0].positions[0];
  CHECK(p_quiet.sti_with_noise->sti_male <
        p_default.sti_with_noise->sti_male);
  // The no-noise path has no SNR term, so the reference must not matter.
  CHECK(p_quiet.sti_no_noise->sti_male ==
        doctest::Approx(p_default.sti_no_noise->sti_male).epsilon(1e-12));
}

TEST_CASE("compare: identical manifests give zero deltas") {
  const auto dir = fixtures::scratch_dir("cli_compare_self");
  const fs::path manifest_path =
      fixtures::write_session_fixture(dir, fixtures::treated_spec());

  const fs::path out = dir / "out";
  CHECK(run_cli("compare " + manifest_path.string() + " " +
                manifest_path.string() + " --no-timestamp --out " +
                out.string()) == 0);
  const json report = json::parse(slurp(out / "report.json"));
  for (const json& scenario : report["scenarios"]) {
    for (const json& position : scenario["positions"]) {
      for (const json& d : position["t30"]) {
        if (!d["delta"].is_null()) CHECK(d["delta"].get<double>() == 0.0);
      }
      CHECK(position["sti_with_noise"]["delta"].get<double>() == 0.0);
    }
  }
  CHECK(fs::exists(out / "delta_t30.csv"));
  CHECK(fs::exists(out / "delta_sti.csv"));

  // Self-comparison transitions are identities like "fair -> fair".
  for (const auto& [label, count] : report["sti_transitions"].items()) {
    const auto arrow = label.find(" -> ");
    REQUIRE(arrow != std::string::npos);
    CHECK(label.substr(0, arrow) == label.substr(arrow + 4));
    CHECK(count.get<int>() > 0);
  }
}

TEST_CASE("compare: disjoint labels exit 2") {
  const auto dir_a = fixtures::scratch_dir("cli_compare_a");
  const auto dir_b = fixtures::scratch_dir("cli_compare_b");
  const fs::path a =
      fixtures::write_session_fixture(dir_a, flat_spec(0.6, false));

  fixtures::SessionFixtureSpec other = flat_spec(0.5, false);
  const fs::path b = fixtures::write_session_fixture(dir_b, other);
  json doc = json::parse(slurp(b));
  doc["scenarios"][0]["source"] = "S9";
  {
    std::ofstream out(b, std::ios::trunc);
    out << doc.dump(2);
  }
  CHECK(run_cli("compare " + a.string() + " " + b.string() + " --out " +
                (dir_b / "out").string()) == 2);
}

TEST_CASE("advise command") {
  const auto dir = fixtures::scratch_dir("cli_advise");
  const fs::path manifest_path =
      fixtures::write_session_fixture(dir, flat_spec(0.65, false));

  const fs::path out = dir / "out";
  CHECK(run_cli("advise " + manifest_path.string() + " --no-timestamp" +
                " --out " + out.string()) == 0);
  const json report = json::parse(slurp(out / "report.json"));
  for (const json& band : report["bands"]) {
    if (band["center_hz"].get<double>() == 1000.0) {
      CHECK(std::abs(band["added_absorption_m2"].get<double>() - 11.2) < 0.1);
    }
  }
  CHECK(fs::exists(out / "absorption.csv"));

  SUBCASE("already compliant: all-zero table") {
    // Below target (inside the tolerance band): nothing to add anywhere.
    const auto dir2 = fixtures::scratch_dir("cli_advise_zero");
    const fs::path ok =
        fixtures::write_session_fixture(dir2, flat_spec(0.48, false));
    const fs::path out2 = dir2 / "out";
    CHECK(run_cli("advise " + ok.string() + " --no-timestamp --out " +
                  out2.string()) == 0);
    const json r2 = json::parse(slurp(out2 / "report.json"));
    for (const json& band : r2["bands"])
      CHECK(band["added_absorption_m2"].get<double>() == 0.0);
  }

  SUBCASE("missing volume is ManifestInvalid, exit 2") {
    json doc = json::parse(slurp(manifest_path));
    doc["room"].erase("volume_m3");
    const fs::path novol = dir / "novol.json";
    {
      std::ofstream o(novol, std::ios::trunc);
      o << doc.dump(2);
    }
    CHECK(run_cli("advise " + novol.string() + " --out " +
                  (dir / "out2").string()) == 2);
  }
}

TEST_CASE("decay curve CSV export") {
  const auto dir = fixtures::scratch_dir("cli_decay_export");
  const fs::path manifest_path =
      fixtures::write_session_fixture(dir, flat_spec(0.5, false));
  const fs::path out = dir / "out";
  CHECK(run_cli("analyze " + manifest_path.string() +
                " --export-decay --no-timestamp --out " + out.string()) == 0);
  const fs::path curve_file = out / "decay_S1_M1.csv";
  REQUIRE(fs::exists(curve_file));
  const std::string content = slurp(curve_file);
  CHECK(content.find("band_hz,time_s,level_db") == 0);
  CHECK(content.find("\n1000,") != std::string::npos);
}

TEST_CASE("third-octave analysis runs end to end") {
  const auto dir = fixtures::scratch_dir("cli_third");
  const fs::path manifest_path =
      fixtures::write_session_fixture(dir, flat_spec(0.5, false));
  const SessionManifest manifest = SessionManifest::load(manifest_path);
  AnalysisOptions options;
  options.bands_override = "third";
  const SessionAnalysis analysis = analyze_session(manifest, options);
  REQUIRE(!analysis.session.scenarios.empty());
  const auto& avg = analysis.session.scenarios[0].spatial_avg;
  CHECK(avg.size() == 24);
  // The fixture carriers sit at octave centers; those third-octave bands
  // must still recover T = 0.5.
  for (const BandParams& b : avg) {
    if (b.band_center_hz == 1000.0 || b.band_center_hz == 250.0) {
      REQUIRE(b.t30_s.has_value());
      CHECK(*b.t30_s == doctest::Approx(0.5).epsilon(0.02));
    }
  }
}
