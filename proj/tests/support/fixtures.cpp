#include "support/fixtures.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "rosa/wave.hpp"

namespace fixtures {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDecayRate60 = 6.907755278982137;  // ln(1000)

void append_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> 8 * i & 0xFF));
}

void append_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8 & 0xFF));
}

void write_pcm(const std::filesystem::path& path, const std::string& payload,
               int sample_rate, int channels, int bits) {
  std::string out;
  const uint32_t data_bytes = static_cast<uint32_t>(payload.size());
  const uint16_t block = static_cast<uint16_t>(channels * bits / 8);
  out += "RIFF";
  append_u32(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  append_u32(out, 16);
  append_u16(out, 1);  // PCM
  append_u16(out, static_cast<uint16_t>(channels));
  append_u32(out, static_cast<uint32_t>(sample_rate));
  append_u32(out, static_cast<uint32_t>(sample_rate) * block);
  append_u16(out, block);
  append_u16(out, static_cast<uint16_t>(bits));
  out += "data";
  append_u32(out, data_bytes);
  out += payload;
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace

rosa::AudioBuffer exponential_envelope(double t_seconds, double duration_s,
                                       int sample_rate) {
  rosa::AudioBuffer out;
  out.sample_rate = sample_rate;
  const std::size_t n =
      static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    out.samples[i] = std::exp(-kDecayRate60 * t / t_seconds);
  }
  return out;
}

rosa::AudioBuffer multitone_ir(const std::vector<double>& carriers_hz,
                               const std::vector<double>& t_seconds,
                               double duration_s, int sample_rate,
                               double lead_silence_s) {
  rosa::AudioBuffer out;
  out.sample_rate = sample_rate;
  const std::size_t lead =
      static_cast<std::size_t>(std::llround(lead_silence_s * sample_rate));
  const std::size_t n =
      static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  out.samples.assign(lead + n, 0.0);
  const double amp = 1.0 / static_cast<double>(carriers_hz.size());
  for (std::size_t k = 0; k < carriers_hz.size(); ++k) {
    const double rate = kDecayRate60 / t_seconds[k];
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / sample_rate;
      out.samples[lead + i] +=
          amp * std::cos(2.0 * kPi * carriers_hz[k] * t) * std::exp(-rate * t);
    }
  }
  return out;
}

rosa::AudioBuffer sine(double freq_hz, double duration_s, int sample_rate,
                       double amplitude) {
  rosa::AudioBuffer out;
  out.sample_rate = sample_rate;
  const std::size_t n =
      static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.samples[i] =
        amplitude * std::sin(2.0 * kPi * freq_hz * i / sample_rate);
  }
  return out;
}

void write_wav_pcm16(const std::filesystem::path& path,
                     const std::vector<int16_t>& samples, int sample_rate,
                     int channels) {
  std::string payload;
  payload.reserve(samples.size() * 2);
  for (int16_t s : samples) {
    payload.push_back(static_cast<char>(s & 0xFF));
    payload.push_back(static_cast<char>(s >> 8 & 0xFF));
  }
  write_pcm(path, payload, sample_rate, channels, 16);
}

void write_wav_pcm24(const std::filesystem::path& path,
                     const std::vector<int32_t>& samples, int sample_rate) {
  std::string payload;
  payload.reserve(samples.size() * 3);
  for (int32_t s : samples) {
    payload.push_back(static_cast<char>(s & 0xFF));
    payload.push_back(static_cast<char>(s >> 8 & 0xFF));
    payload.push_back(static_cast<char>(s >> 16 & 0xFF));
  }
  write_pcm(path, payload, sample_rate, 1, 24);
}

SessionFixtureSpec untreated_spec() {
  SessionFixtureSpec spec;
  spec.id = "seminar-untreated";
  spec.condition = "untreated";
  // Low-frequency peak around 100 Hz, elevated mids, falling highs.
  spec.band_t_s = {1.00, 1.05, 0.968, 0.873, 0.826, 0.755, 0.673, 0.602};
  spec.noise_levels_db = {48.0, 46.0, 42.0, 38.0, 34.0, 30.0, 26.0, 22.0};
  return spec;
}

SessionFixtureSpec treated_spec() {
  SessionFixtureSpec spec = untreated_spec();
  spec.id = "seminar-treated";
  spec.condition = "treated";
  // 125 Hz band: 1.05 -> 0.63 s, exactly -40%.
  spec.band_t_s = {0.70, 0.63, 0.52, 0.50, 0.48, 0.46, 0.44, 0.42};
  return spec;
}

std::filesystem::path write_session_fixture(const std::filesystem::path& dir,
                                            const SessionFixtureSpec& spec) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  // Carriers at the exact octave midband frequencies 62.5 .. 8000 Hz.
  std::vector<double> carriers, times;
  for (int k = -4; k <= 3; ++k) {
    carriers.push_back(1000.0 * std::pow(2.0, k));
    times.push_back(spec.band_t_s[static_cast<std::size_t>(k + 4)]);
  }

  nlohmann::json receivers = nlohmann::json::array();
  for (std::size_t i = 0; i < spec.distances_m.size(); ++i) {
    const std::string label = "M" + std::to_string(i + 1);
    const std::string file = "s1_" + label + ".wav";
    rosa::AudioBuffer ir = multitone_ir(carriers, times, spec.ir_duration_s,
                                        spec.sample_rate, 0.010);
    rosa::save_wave_float32(dir / file, ir);
    receivers.push_back({{"label", label},
                         {"ir_file", file},
                         {"distance_m", spec.distances_m[i]}});
  }

  nlohmann::json scenario = {{"source", "S1"}, {"receivers", receivers}};

  if (spec.with_noise) {
    // Calibrated tone-per-band noise recording: a sine at each exact band
    // center whose Leq lands on the requested level.
    const double cal = 94.0;
    rosa::AudioBuffer noise;
    noise.sample_rate = spec.sample_rate;
    const double duration = 2.0;
    noise.samples.assign(
        static_cast<std::size_t>(duration * spec.sample_rate) + 4800, 0.0);
    for (std::size_t k = 0; k < carriers.size(); ++k) {
      const double amp =
          std::sqrt(2.0) *
          std::pow(10.0, (spec.noise_levels_db[k] - cal) / 20.0);
      for (std::size_t i = 0; i < noise.samples.size(); ++i) {
        noise.samples[i] += amp * std::sin(2.0 * kPi * carriers[k] * i /
                                           spec.sample_rate);
      }
    }
    rosa::save_wave_float32(dir / "noise_s1.wav", noise);
    scenario["noise"] = {{"file", "noise_s1.wav"},
                         {"calibration_offset_db", cal},
                         {"duration_s", duration}};
  }

  nlohmann::json manifest = {
      {"schema_version", 1},
      {"session_id", spec.id},
      {"condition", spec.condition},
      {"room", {{"volume_m3", spec.volume_m3}, {"usage", spec.usage}}},
      {"options", {{"bands", "octave"}, {"sti_noise", spec.with_noise}}},
      {"scenarios", nlohmann::json::array({scenario})}};

  const fs::path manifest_path = dir / "manifest.json";
  std::ofstream out(manifest_path, std::ios::trunc);
  out << manifest.dump(2) << '\n';
  return manifest_path;
}

std::filesystem::path scratch_dir(const std::string& name) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("rosa_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace fixtures
