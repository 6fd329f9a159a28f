// Synthetic signals, WAV files and session manifests used across the test
// suites. Session fixtures emulate an untreated/treated measurement pair;
// they are constructed, not measured data.
#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "rosa/types.hpp"

namespace fixtures {

// Pure exponential amplitude envelope exp(-6.9078 t / T) from sample 0.
rosa::AudioBuffer exponential_envelope(double t_seconds, double duration_s,
                                       int sample_rate);

// Sum of per-band cosines at the given carrier frequencies, each decaying
// with its own reverberation time: a deterministic broadband IR whose
// octave-band energy envelopes are single-slope exponentials.
rosa::AudioBuffer multitone_ir(const std::vector<double>& carriers_hz,
                               const std::vector<double>& t_seconds,
                               double duration_s, int sample_rate,
                               double lead_silence_s = 0.0);

rosa::AudioBuffer sine(double freq_hz, double duration_s, int sample_rate,
                       double amplitude = 1.0);

// Raw WAV writers for format tests (the library writer only does float32).
void write_wav_pcm16(const std::filesystem::path& path,
                     const std::vector<int16_t>& samples, int sample_rate,
                     int channels = 1);
void write_wav_pcm24(const std::filesystem::path& path,
                     const std::vector<int32_t>& samples, int sample_rate);

// ---- session fixture pair (emulates the untreated/treated comparison) ----

struct SessionFixtureSpec {
  std::string id;
  std::string condition;  // untreated | treated
  // T per octave band 63..8000 Hz (8 values).
  std::array<double, 8> band_t_s;
  bool with_noise = true;
  // Noise band levels 63..8000 Hz dB SPL; emitted as a calibrated
  // recording of per-band tones.
  std::array<double, 8> noise_levels_db;
  std::vector<double> distances_m = {1.5, 2.5};
  double volume_m3 = 150.8;
  std::string usage = "hybrid_meeting";
  int sample_rate = 48000;
  double ir_duration_s = 2.0;
};

// The tuned untreated/treated pair: 125 Hz band goes 1.05 s -> 0.63 s
// (-40%), mid bands ~0.83 s -> ~0.48 s, shared projector-like noise.
SessionFixtureSpec untreated_spec();
SessionFixtureSpec treated_spec();

// Writes the IR and noise WAVs plus manifest.json under dir; returns the
// manifest path.
std::filesystem::path write_session_fixture(const std::filesystem::path& dir,
                                            const SessionFixtureSpec& spec);

// Scratch directory under the system temp dir, wiped at construction.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace fixtures
