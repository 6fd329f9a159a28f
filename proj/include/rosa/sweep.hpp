#pragma once

#include <cstddef>
#include <vector>

#include "rosa/types.hpp"

namespace rosa {

// Exponential sine sweep parameters. Instantaneous frequency rises from
// f_start to f_end over `duration_s`; raised-cosine fades taper both ends.
struct SweepSpec {
  double f_start_hz = 50.0;
  double f_end_hz = 20000.0;
  double duration_s = 10.0;
  int sample_rate = 48000;
  double fade_s = 0.050;
};

struct EssPair {
  AudioBuffer sweep;
  AudioBuffer inverse_filter;  // time-reversed, amplitude-compensated sweep
};

struct DeconvolveOptions {
  double pre_roll_s = 0.005;  // kept ahead of the detected onset
  double onset_threshold_db = 20.0;  // onset = first sample above peak - 20 dB
};

// Linear convolution via FFT (sizes are padded to a power of two).
std::vector<double> fft_convolve(const std::vector<double>& a,
                                 const std::vector<double>& b);

// Generates the sweep and its inverse filter, normalized so that
// sweep * inverse_filter approximates a band-limited unit impulse.
EssPair generate_ess(const SweepSpec& spec);

// First sample whose magnitude exceeds peak - threshold dB, scanning
// forward. Throws NoOnsetDetected for an all-zero buffer.
std::size_t detect_onset(const AudioBuffer& buffer,
                         double threshold_db = 20.0);

// Convolves the recording with the inverse filter and trims the result to
// start `pre_roll_s` before the detected onset. Harmonic-distortion
// products of the exponential sweep land ahead of the onset and are
// discarded by the trim.
ImpulseResponse deconvolve(const AudioBuffer& recording,
                           const AudioBuffer& inverse_filter,
                           const DeconvolveOptions& options = {});

}  // namespace rosa
