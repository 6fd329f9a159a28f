#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "rosa/types.hpp"

namespace rosa {

// Backward-integrated energy decay, normalized to 0 dB at the onset.
// levels_db[i] corresponds to onset + i samples; integration stops at
// truncation_index (an index into the source buffer).
struct DecayCurve {
  std::vector<double> levels_db;
  int sample_rate = 0;
  std::size_t truncation_index = 0;
};

enum class RtMarker { kT30, kT20, kEdt };

struct RtEstimate {
  double seconds = 0.0;
  double fit_r2 = 0.0;
};

// Per-band decay parameters for one position (or a spatial average).
struct BandParams {
  double band_center_hz = 0.0;
  std::optional<double> t30_s;
  std::optional<double> t20_s;
  std::optional<double> edt_s;
  std::optional<double> c50_db;  // may be +inf (no late energy)
  double fit_r2 = 0.0;  // of the primary time fit (T30 first)
  bool low_fit_quality = false;  // fit_r2 < 0.95
  int contributing_positions = 1;
  int c50_excluded_positions = 0;  // +inf values dropped from an average
};

// Index where backward integration stops: the smoothed energy envelope has
// dropped to within 5 dB of the noise floor estimated from the final 10%
// of the buffer, and stays there.
std::size_t find_truncation(const AudioBuffer& ir_band, std::size_t onset);

DecayCurve schroeder_curve(const AudioBuffer& ir_band, std::size_t onset);

// Least-squares line over the marker's span of the decay curve,
// extrapolated to 60 dB. Throws InsufficientDecayRange when the curve is
// truncated above the span's lower bound, or - when the analysis filter's
// bandwidth is supplied - when the fitted decay is too fast for that
// filter to have resolved (BT below ~8; the octave filterbank itself
// rings at BT ~6, so faster fits measure the filter, not the room).
RtEstimate reverberation_time(const DecayCurve& curve, RtMarker marker,
                              double bandwidth_hz = 0.0);

// Early-to-late energy ratio in dB. Returns +inf when no energy arrives
// after the early window (reported as "> 60 dB" in text output).
double clarity(const AudioBuffer& ir_band, std::size_t onset,
               double early_window_ms = 50.0);

// Definition: the early-to-total energy fraction implied by a C50 value.
double definition_d50(double c50_db);

// f_s = 2000 * sqrt(T / V). Below f_s individual room modes dominate.
double schroeder_frequency(const RoomGeometry& geometry, double rt_seconds);

// Arithmetic per-band mean over receiver positions. C50 +inf sentinels are
// excluded from the mean and counted in c50_excluded_positions.
std::vector<BandParams> spatial_average(
    const std::vector<std::vector<BandParams>>& per_position);

}  // namespace rosa
