#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "rosa/types.hpp"

namespace rosa {

// The 7 speech-important octave bands x 14 modulation frequencies the STI
// method evaluates.
struct ModulationGrid {
  std::array<double, 7> octave_bands_hz;
  std::array<double, 14> modulation_frequencies_hz;

  static ModulationGrid standard();
};

enum class Gender { kMale, kFemale };

// Octave-band weighting factors (alpha) and adjacent-band redundancy
// factors (beta). sum(alpha) - sum(beta) must equal 1 so an ideal channel
// scores STI = 1; validated at construction.
struct GenderWeights {
  std::array<double, 7> alpha{};
  std::array<double, 6> beta{};
  Gender gender = Gender::kMale;

  static GenderWeights male_default();
  static GenderWeights female_default();
  static GenderWeights validated(const std::array<double, 7>& alpha,
                                 const std::array<double, 6>& beta,
                                 Gender gender);
};

// Average speech octave-band levels at 1 m for a given vocal effort.
struct SpeechReference {
  std::array<double, 7> band_levels_at_1m_db{};
  std::string vocal_effort_label = "normal";

  static SpeechReference normal_effort();
};

struct StiResult {
  std::array<std::array<double, 14>, 7> mtf{};  // m actually fed to the TI chain
  std::array<double, 7> mti{};
  double sti_male = 0.0;
  double sti_female = 0.0;
  std::string rating_male;
  std::string rating_female;
  bool noise_included = false;
  double distance_m = 0.0;
  // Masking and absolute-threshold terms of the full IEC model are omitted;
  // only the SNR pathway is applied.
  bool simplified_iec = true;
};

// Noise-free modulation reduction factors for one band:
// m(f) = |sum h^2(t) exp(-i 2 pi f t)| / sum h^2(t), over the IR truncated
// at the detected noise floor, clipped into [0, 1].
std::array<double, 14> mtf_from_ir(const AudioBuffer& ir_band,
                                   const ModulationGrid& grid,
                                   std::size_t onset = 0);

// m' = m / (1 + 10^(-snr/10))
double apply_noise_correction(double m, double snr_db);

// 10 log10(m / (1 - m)), clipped to [-15, +15] dB.
double effective_snr(double m);

// Linear map of the clipped effective SNR onto [0, 1].
double transmission_index(double snr_eff_db);

// STI = sum alpha_k MTI_k - sum beta_k sqrt(MTI_k MTI_k+1), clipped to [0,1].
double aggregate_sti(std::span<const double> mti, const GenderWeights& weights);

// Intelligibility rating label; bins are lower-edge inclusive.
std::string rate_sti(double sti);

// Free-field point-source level correction: L(d) = L(1 m) - 20 log10(d).
BandSpectrum speech_spectrum_at(const SpeechReference& reference,
                                double distance_m);

// Full indirect pipeline: filterbank, per-band noise-free MTF, SNR
// correction from received speech minus ambient noise (skipped when noise
// is absent), effective SNR, TI, MTI, and gender-weighted aggregation.
StiResult compute_sti_indirect(const ImpulseResponse& ir,
                               const std::optional<BandSpectrum>& noise,
                               const SpeechReference& reference,
                               const ModulationGrid& grid);

// Overridable weight/reference configuration, loadable from a key-value
// file (see docs/sti_config.example).
struct StiConfig {
  GenderWeights male = GenderWeights::male_default();
  GenderWeights female = GenderWeights::female_default();
  SpeechReference reference = SpeechReference::normal_effort();
};

StiConfig load_sti_config(const std::filesystem::path& path);

StiResult compute_sti_indirect(const ImpulseResponse& ir,
                               const std::optional<BandSpectrum>& noise,
                               const StiConfig& config,
                               const ModulationGrid& grid);

}  // namespace rosa
