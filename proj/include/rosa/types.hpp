#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rosa {

// Error taxonomy. Every failure mode a caller may want to distinguish gets
// its own type; all derive from Error so batch drivers can catch broadly.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define ROSA_ERROR_TYPE(NAME)    \
  class NAME : public Error {    \
  public:                        \
    using Error::Error;          \
  }

// signal
ROSA_ERROR_TYPE(FileNotFound);
ROSA_ERROR_TYPE(UnsupportedFormat);
ROSA_ERROR_TYPE(MultiChannelInput);
ROSA_ERROR_TYPE(InvalidSpec);
ROSA_ERROR_TYPE(SampleRateMismatch);
ROSA_ERROR_TYPE(NoOnsetDetected);
ROSA_ERROR_TYPE(BandAboveNyquist);
// decay
ROSA_ERROR_TYPE(EmptyInput);
ROSA_ERROR_TYPE(InsufficientDecayRange);
ROSA_ERROR_TYPE(InvalidInput);
ROSA_ERROR_TYPE(BandSetMismatch);
// sti
ROSA_ERROR_TYPE(SampleRateTooLow);
ROSA_ERROR_TYPE(WeightDimensionMismatch);
ROSA_ERROR_TYPE(OutOfRange);
ROSA_ERROR_TYPE(InvalidDistance);
// noise
ROSA_ERROR_TYPE(MissingCalibration);
ROSA_ERROR_TYPE(RecordingTooShort);
ROSA_ERROR_TYPE(UnknownBand);
// compliance / cli
ROSA_ERROR_TYPE(UnknownUsage);
ROSA_ERROR_TYPE(NoMatchingPositions);
ROSA_ERROR_TYPE(ManifestInvalid);
ROSA_ERROR_TYPE(MissingNoise);

#undef ROSA_ERROR_TYPE

constexpr double kNegInfDb = -std::numeric_limits<double>::infinity();
constexpr double kPosInfDb = std::numeric_limits<double>::infinity();

inline double db_from_power(double p) {
  return p > 0.0 ? 10.0 * std::log10(p) : kNegInfDb;
}

inline double db_from_amplitude(double a) {
  return a > 0.0 ? 20.0 * std::log10(a) : kNegInfDb;
}

inline double power_from_db(double db) { return std::pow(10.0, db / 10.0); }

// Calibrated mono sample sequence. Samples are full-scale normalized
// (dimensionless); calibration_offset_db maps 0 dBFS RMS to dB SPL.
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = 0;
  std::optional<double> calibration_offset_db;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
};

// A measured or deconvolved room response between one source and one
// receiver position.
struct ImpulseResponse {
  AudioBuffer buffer;
  std::size_t onset_index = 0;  // detected direct-sound arrival
  std::string source_position;  // e.g. "S1"
  std::string receiver_position;  // e.g. "M3"
  double distance_m = 0.0;  // source-receiver; required > 0 for
                            // distance-corrected STI
};

// Per-band level vector in dB SPL (ambient noise, received speech, ...).
// A level of -inf is the silence sentinel, reported as "< 0 dB" in text.
struct BandSpectrum {
  std::vector<double> band_centers_hz;  // nominal centers, strictly increasing
  std::vector<double> levels_db;
  double integration_time_s = 0.0;
  std::string label;
};

// Room volume plus usage tags, the inputs to Schroeder-frequency and
// target-profile selection.
struct RoomGeometry {
  double volume_m3 = 0.0;
  std::vector<std::string> usage_labels;
};

}  // namespace rosa
