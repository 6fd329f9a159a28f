#include "rosa/noise.hpp"

#include <cmath>

namespace rosa {

BandSpectrum band_leq(const AudioBuffer& recording, const BandDefinition& bands,
                      double duration_s) {
  if (!recording.calibration_offset_db)
    throw MissingCalibration(
        "band Leq needs a calibration offset mapping 0 dBFS RMS to dB SPL");
  if (!(duration_s > 0.0)) throw InvalidInput("integration time must be > 0");
  const std::size_t want =
      static_cast<std::size_t>(std::llround(duration_s * recording.sample_rate));
  if (recording.size() < want)
    throw RecordingTooShort("recording is " +
                            std::to_string(recording.duration_s()) +
                            " s, need " + std::to_string(duration_s) + " s");

  AudioBuffer window;
  window.sample_rate = recording.sample_rate;
  window.calibration_offset_db = recording.calibration_offset_db;
  window.samples.assign(recording.samples.begin(),
                        recording.samples.begin() + want);

  const std::vector<AudioBuffer> filtered = octave_filterbank(window, bands);

  BandSpectrum out;
  out.band_centers_hz = bands.nominal_centers();
  out.integration_time_s = duration_s;
  out.levels_db.reserve(filtered.size());
  for (const AudioBuffer& band : filtered) {
    double mean_square = 0.0;
    for (double s : band.samples) mean_square += s * s;
    mean_square /= static_cast<double>(band.samples.size());
    out.levels_db.push_back(db_from_power(mean_square) +
                            *recording.calibration_offset_db);
  }
  return out;
}

AWeightTable AWeightTable::iec61672() {
  AWeightTable t;
  t.centers_hz = {31.5, 40,   50,   63,   80,   100,  125,  160,  200,
                  250,  315,  400,  500,  630,  800,  1000, 1250, 1600,
                  2000, 2500, 3150, 4000, 5000, 6300, 8000, 10000, 12500,
                  16000};
  t.weights_db = {-39.4, -34.6, -30.2, -26.2, -22.5, -19.1, -16.1, -13.4,
                  -10.9, -8.6,  -6.6,  -4.8,  -3.2,  -1.9,  -0.8,  0.0,
                  0.6,   1.0,   1.2,   1.3,   1.2,   1.0,   0.5,   -0.1,
                  -1.1,  -2.5,  -4.3,  -6.6};
  return t;
}

double AWeightTable::weight_for(double nominal_center_hz) const {
  for (std::size_t i = 0; i < centers_hz.size(); ++i) {
    if (std::abs(centers_hz[i] - nominal_center_hz) <=
        0.01 * nominal_center_hz)
      return weights_db[i];
  }
  throw UnknownBand("no A-weight for band " +
                    std::to_string(nominal_center_hz) + " Hz");
}

double a_weighted_level(const BandSpectrum& spectrum,
                        const AWeightTable& table) {
  double sum = 0.0;
  for (std::size_t k = 0; k < spectrum.band_centers_hz.size(); ++k) {
    const double level = spectrum.levels_db[k];
    if (level == kNegInfDb) continue;  // silent band adds nothing
    sum += power_from_db(level + table.weight_for(spectrum.band_centers_hz[k]));
  }
  return db_from_power(sum);
}

}  // namespace rosa
