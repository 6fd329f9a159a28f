#pragma once

#include <span>
#include <vector>

#include "rosa/types.hpp"

namespace rosa {

// One fractional-octave band. Filtering uses the exact base-2 midband
// frequency; reports carry the nominal label (63 Hz, 125 Hz, ...).
struct Band {
  double nominal_hz = 0.0;
  double exact_hz = 0.0;
};

struct BandDefinition {
  std::vector<Band> bands;  // strictly increasing centers
  int fraction = 1;  // bands per octave: 1 or 3

  double lower_edge_hz(std::size_t i) const;
  double upper_edge_hz(std::size_t i) const;
  std::vector<double> nominal_centers() const;

  // Octave bands, default 63 Hz .. 8 kHz (T30 / C50 analysis set).
  static BandDefinition octaves(double lo_nominal = 63.0,
                                double hi_nominal = 8000.0);
  // Third-octave bands, default 50 Hz .. 10 kHz.
  static BandDefinition third_octaves(double lo_nominal = 50.0,
                                      double hi_nominal = 10000.0);
  // The seven speech-important octave bands 125 Hz .. 8 kHz.
  static BandDefinition sti_octaves();
};

// Direct form II transposed biquad section.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

// Butterworth band-pass of the given order as cascaded biquads, normalized
// to unit gain at the band center. Edges must satisfy 0 < f_lo < f_hi and
// f_hi below Nyquist.
std::vector<Biquad> butter_bandpass(int order, double f_lo_hz, double f_hi_hz,
                                    double center_hz, double sample_rate);

std::vector<double> sosfilt(const std::vector<Biquad>& sections,
                            std::span<const double> x);

// Splits the buffer into one band-limited buffer per band. Bands with
// nominal center <= 250 Hz are filtered time-reversed so the filter's own
// decay cannot masquerade as room decay in short low-frequency tails.
std::vector<AudioBuffer> octave_filterbank(const AudioBuffer& buffer,
                                           const BandDefinition& bands);

}  // namespace rosa
