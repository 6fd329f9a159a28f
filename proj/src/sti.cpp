#include "rosa/sti.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "rosa/decay.hpp"
#include "rosa/filterbank.hpp"

namespace rosa {

namespace {

constexpr double kSnrClipDb = 15.0;
constexpr double kMinStiSampleRate = 16000.0;
constexpr double kWeightSumTolerance = 1e-6;

}  // namespace

ModulationGrid ModulationGrid::standard() {
  return {{125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0},
          {0.63, 0.80, 1.00, 1.25, 1.60, 2.00, 2.50, 3.15, 4.00, 5.00, 6.30,
           8.00, 10.00, 12.50}};
}

GenderWeights GenderWeights::validated(const std::array<double, 7>& alpha,
                                       const std::array<double, 6>& beta,
                                       Gender gender) {
  double sum = 0.0;
  for (double a : alpha) {
    if (a < 0.0) throw WeightDimensionMismatch("negative alpha weight");
    sum += a;
  }
  for (double b : beta) {
    if (b < 0.0) throw WeightDimensionMismatch("negative beta weight");
    sum -= b;
  }
  if (std::abs(sum - 1.0) > kWeightSumTolerance)
    throw WeightDimensionMismatch(
        "sum(alpha) - sum(beta) = " + std::to_string(sum) +
        "; an ideal channel must score exactly 1");
  GenderWeights w;
  w.alpha = alpha;
  w.beta = beta;
  w.gender = gender;
  return w;
}

GenderWeights GenderWeights::male_default() {
  return validated({0.085, 0.127, 0.230, 0.233, 0.309, 0.224, 0.173},
                   {0.085, 0.078, 0.065, 0.011, 0.047, 0.095}, Gender::kMale);
}

GenderWeights GenderWeights::female_default() {
  // The 125 Hz band carries zero weight for female speech.
  return validated({0.0, 0.117, 0.223, 0.216, 0.328, 0.250, 0.194},
                   {0.0, 0.099, 0.066, 0.062, 0.025, 0.076}, Gender::kFemale);
}

SpeechReference SpeechReference::normal_effort() {
  SpeechReference ref;
  ref.band_levels_at_1m_db = {49.9, 54.3, 58.0, 52.0, 44.8, 38.8, 33.5};
  ref.vocal_effort_label = "normal";
  return ref;
}

std::array<double, 14> mtf_from_ir(const AudioBuffer& ir_band,
                                   const ModulationGrid& grid,
                                   std::size_t onset) {
  if (ir_band.empty()) throw EmptyInput("empty impulse response");
  const std::size_t trunc = find_truncation(ir_band, onset);

  std::array<double, 14> m{};
  const double fs = ir_band.sample_rate;
  double total = 0.0;
  for (std::size_t i = onset; i < trunc; ++i)
    total += ir_band.samples[i] * ir_band.samples[i];
  if (total <= 0.0) throw EmptyInput("zero energy after the onset");

  for (std::size_t k = 0; k < m.size(); ++k) {
    const double w = 2.0 * std::numbers::pi *
                     grid.modulation_frequencies_hz[k] / fs;
    // Rotating-phasor evaluation of sum h^2(t) exp(-i w t); the recurrence
    // drifts by ~N*eps, orders of magnitude below the m tolerances.
    const std::complex<double> step(std::cos(w), -std::sin(w));
    std::complex<double> phasor(1.0, 0.0);
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t i = onset; i < trunc; ++i) {
      const double e = ir_band.samples[i] * ir_band.samples[i];
      acc += e * phasor;
      phasor *= step;
    }
    m[k] = std::clamp(std::abs(acc) / total, 0.0, 1.0);
  }
  return m;
}

double apply_noise_correction(double m, double snr_db) {
  return m / (1.0 + std::pow(10.0, -snr_db / 10.0));
}

double effective_snr(double m) {
  if (m <= 0.0) return -kSnrClipDb;
  if (m >= 1.0) return kSnrClipDb;
  return std::clamp(10.0 * std::log10(m / (1.0 - m)), -kSnrClipDb, kSnrClipDb);
}

double transmission_index(double snr_eff_db) {
  return (snr_eff_db + kSnrClipDb) / (2.0 * kSnrClipDb);
}

double aggregate_sti(std::span<const double> mti,
                     const GenderWeights& weights) {
  if (mti.size() != weights.alpha.size())
    throw WeightDimensionMismatch("expected " +
                                  std::to_string(weights.alpha.size()) +
                                  " MTI values, got " +
                                  std::to_string(mti.size()));
  double sti = 0.0;
  for (std::size_t k = 0; k < mti.size(); ++k) sti += weights.alpha[k] * mti[k];
  for (std::size_t k = 0; k + 1 < mti.size(); ++k)
    sti -= weights.beta[k] * std::sqrt(mti[k] * mti[k + 1]);
  return std::clamp(sti, 0.0, 1.0);
}

std::string rate_sti(double sti) {
  if (!(sti >= 0.0 && sti <= 1.0))
    throw OutOfRange("STI " + std::to_string(sti) + " outside [0, 1]");
  if (sti < 0.30) return "bad";
  if (sti < 0.45) return "poor";
  if (sti < 0.60) return "fair";
  if (sti < 0.75) return "good";
  return "excellent";
}

BandSpectrum speech_spectrum_at(const SpeechReference& reference,
                                double distance_m) {
  if (!(distance_m > 0.0))
    throw InvalidDistance("distance must be positive, got " +
                          std::to_string(distance_m) + " m");
  const ModulationGrid grid = ModulationGrid::standard();
  BandSpectrum out;
  out.label = "speech (" + reference.vocal_effort_label + " effort)";
  const double correction = 20.0 * std::log10(distance_m);
  for (std::size_t k = 0; k < grid.octave_bands_hz.size(); ++k) {
    out.band_centers_hz.push_back(grid.octave_bands_hz[k]);
    out.levels_db.push_back(reference.band_levels_at_1m_db[k] - correction);
  }
  return out;
}

StiResult compute_sti_indirect(const ImpulseResponse& ir,
                               const std::optional<BandSpectrum>& noise,
                               const StiConfig& config,
                               const ModulationGrid& grid) {
  if (ir.buffer.sample_rate < kMinStiSampleRate)
    throw SampleRateTooLow("STI needs >= 16 kHz sampling, got " +
                           std::to_string(ir.buffer.sample_rate) + " Hz");

  const BandDefinition bands = BandDefinition::sti_octaves();
  // Per-band speech-minus-noise SNR, when ambient noise is given.
  std::array<double, 7> snr_db{};
  if (noise) {
    if (noise->band_centers_hz.size() != grid.octave_bands_hz.size())
      throw BandSetMismatch("noise spectrum has " +
                            std::to_string(noise->band_centers_hz.size()) +
                            " bands; the STI grid has 7");
    const BandSpectrum speech = speech_spectrum_at(config.reference,
                                                   ir.distance_m);
    for (std::size_t k = 0; k < snr_db.size(); ++k) {
      if (std::abs(noise->band_centers_hz[k] - grid.octave_bands_hz[k]) >
          0.01 * grid.octave_bands_hz[k])
        throw BandSetMismatch("noise band " +
                              std::to_string(noise->band_centers_hz[k]) +
                              " Hz does not match STI band " +
                              std::to_string(grid.octave_bands_hz[k]) + " Hz");
      snr_db[k] = speech.levels_db[k] - noise->levels_db[k];
    }
  }

  const std::vector<AudioBuffer> band_irs = octave_filterbank(ir.buffer, bands);

  StiResult result;
  result.noise_included = noise.has_value();
  result.distance_m = ir.distance_m;
  for (std::size_t k = 0; k < band_irs.size(); ++k) {
    std::array<double, 14> m = mtf_from_ir(band_irs[k], grid, ir.onset_index);
    double mti_sum = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (noise) m[j] = apply_noise_correction(m[j], snr_db[k]);
      result.mtf[k][j] = m[j];
      mti_sum += transmission_index(effective_snr(m[j]));
    }
    result.mti[k] = mti_sum / static_cast<double>(m.size());
  }

  result.sti_male = aggregate_sti(result.mti, config.male);
  result.sti_female = aggregate_sti(result.mti, config.female);
  result.rating_male = rate_sti(result.sti_male);
  result.rating_female = rate_sti(result.sti_female);
  return result;
}

StiResult compute_sti_indirect(const ImpulseResponse& ir,
                               const std::optional<BandSpectrum>& noise,
                               const SpeechReference& reference,
                               const ModulationGrid& grid) {
  StiConfig config;
  config.reference = reference;
  return compute_sti_indirect(ir, noise, config, grid);
}

namespace {

std::array<double, 7> parse7(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  std::array<double, 7> out{};
  for (double& v : out) {
    if (!(in >> v))
      throw InvalidInput("config key '" + key + "' needs 7 numbers");
  }
  double extra;
  if (in >> extra) throw InvalidInput("config key '" + key + "' has extras");
  return out;
}

std::array<double, 6> parse6(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  std::array<double, 6> out{};
  for (double& v : out) {
    if (!(in >> v))
      throw InvalidInput("config key '" + key + "' needs 6 numbers");
  }
  double extra;
  if (in >> extra) throw InvalidInput("config key '" + key + "' has extras");
  return out;
}

}  // namespace

StiConfig load_sti_config(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw FileNotFound("cannot open " + path.string());

  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw InvalidInput(path.string() + ":" + std::to_string(line_no) +
                           ": expected 'key = values'");
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  StiConfig config;
  std::array<double, 7> male_alpha = config.male.alpha;
  std::array<double, 6> male_beta = config.male.beta;
  std::array<double, 7> female_alpha = config.female.alpha;
  std::array<double, 6> female_beta = config.female.beta;

  for (const auto& [key, value] : kv) {
    if (key == "male.alpha") male_alpha = parse7(key, value);
    else if (key == "male.beta") male_beta = parse6(key, value);
    else if (key == "female.alpha") female_alpha = parse7(key, value);
    else if (key == "female.beta") female_beta = parse6(key, value);
    else if (key == "speech.band_levels_at_1m")
      config.reference.band_levels_at_1m_db = parse7(key, value);
    else if (key == "speech.vocal_effort")
      config.reference.vocal_effort_label = value;
    else
      throw InvalidInput("unknown config key '" + key + "' in " +
                         path.string());
  }

  config.male = GenderWeights::validated(male_alpha, male_beta, Gender::kMale);
  config.female =
      GenderWeights::validated(female_alpha, female_beta, Gender::kFemale);
  return config;
}

}  // namespace rosa
