#include "rosa/sweep.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

namespace rosa {

namespace {

constexpr double kPi = std::numbers::pi;

// FFTW planning is not thread-safe; execution is.
std::mutex g_fftw_plan_mutex;

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void validate(const SweepSpec& spec) {
  if (!(spec.f_start_hz > 0.0) || !(spec.f_end_hz > spec.f_start_hz) ||
      spec.f_end_hz > spec.sample_rate / 2.0)
    throw InvalidSpec("need 0 < f_start < f_end <= sample_rate / 2");
  if (!(spec.duration_s > 0.0)) throw InvalidSpec("duration must be > 0");
  if (spec.fade_s < 0.0 || 2.0 * spec.fade_s >= spec.duration_s)
    throw InvalidSpec("fades must satisfy 0 <= 2 * fade < duration");
  if (spec.sample_rate <= 0) throw InvalidSpec("sample rate must be > 0");
}

}  // namespace

std::vector<double> fft_convolve(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw EmptyInput("cannot convolve empty signals");
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(out_len);
  const std::size_t nc = n / 2 + 1;

  double* ta = fftw_alloc_real(n);
  double* tb = fftw_alloc_real(n);
  fftw_complex* fa = fftw_alloc_complex(nc);
  fftw_complex* fb = fftw_alloc_complex(nc);

  std::fill(ta, ta + n, 0.0);
  std::fill(tb, tb + n, 0.0);
  std::copy(a.begin(), a.end(), ta);
  std::copy(b.begin(), b.end(), tb);

  fftw_plan plan_a, plan_b, plan_inv;
  {
    std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
    plan_a = fftw_plan_dft_r2c_1d(static_cast<int>(n), ta, fa, FFTW_ESTIMATE);
    plan_b = fftw_plan_dft_r2c_1d(static_cast<int>(n), tb, fb, FFTW_ESTIMATE);
    plan_inv =
        fftw_plan_dft_c2r_1d(static_cast<int>(n), fa, ta, FFTW_ESTIMATE);
  }
  fftw_execute(plan_a);
  fftw_execute(plan_b);
  for (std::size_t i = 0; i < nc; ++i) {
    const double re = fa[i][0] * fb[i][0] - fa[i][1] * fb[i][1];
    const double im = fa[i][0] * fb[i][1] + fa[i][1] * fb[i][0];
    fa[i][0] = re;
    fa[i][1] = im;
  }
  fftw_execute(plan_inv);

  std::vector<double> out(out_len);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = ta[i] * scale;

  {
    std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
    fftw_destroy_plan(plan_a);
    fftw_destroy_plan(plan_b);
    fftw_destroy_plan(plan_inv);
  }
  fftw_free(ta);
  fftw_free(tb);
  fftw_free(fa);
  fftw_free(fb);
  return out;
}

EssPair generate_ess(const SweepSpec& spec) {
  validate(spec);
  const double fs = spec.sample_rate;
  const std::size_t n =
      static_cast<std::size_t>(std::llround(spec.duration_s * fs));
  // phase(t) = K (e^{t/L} - 1) with instantaneous frequency f1 e^{t/L}
  const double log_ratio = std::log(spec.f_end_hz / spec.f_start_hz);
  const double sweep_rate = spec.duration_s / log_ratio;  // L
  const double phase_scale = 2.0 * kPi * spec.f_start_hz * sweep_rate;  // K

  EssPair pair;
  pair.sweep.sample_rate = spec.sample_rate;
  pair.sweep.samples.resize(n);
  const std::size_t fade_n =
      static_cast<std::size_t>(std::llround(spec.fade_s * fs));
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    double v = std::sin(phase_scale * (std::exp(t / sweep_rate) - 1.0));
    if (fade_n > 0) {
      if (i < fade_n) {
        const double x = static_cast<double>(i) / fade_n;
        v *= 0.5 * (1.0 - std::cos(kPi * x));
      }
      if (i + fade_n >= n) {
        const double x = static_cast<double>(n - 1 - i) / fade_n;
        v *= 0.5 * (1.0 - std::cos(kPi * x));
      }
    }
    pair.sweep.samples[i] = v;
  }

  // Time reversal plus -6 dB/octave envelope flattens the sweep's pink
  // energy distribution, so the pair convolves to a unit-impulse-like pulse.
  pair.inverse_filter.sample_rate = spec.sample_rate;
  pair.inverse_filter.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    pair.inverse_filter.samples[i] =
        pair.sweep.samples[n - 1 - i] * std::exp(-t / sweep_rate);
  }

  // Normalize so the convolution peak is ~1.
  const std::vector<double> pulse =
      fft_convolve(pair.sweep.samples, pair.inverse_filter.samples);
  double peak = 0.0;
  for (double v : pulse) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (double& v : pair.inverse_filter.samples) v /= peak;
  }
  return pair;
}

std::size_t detect_onset(const AudioBuffer& buffer, double threshold_db) {
  if (buffer.empty()) throw EmptyInput("empty buffer");
  double peak = 0.0;
  for (double v : buffer.samples) peak = std::max(peak, std::abs(v));
  if (peak <= 0.0)
    throw NoOnsetDetected("buffer contains no signal");
  const double threshold = peak * std::pow(10.0, -threshold_db / 20.0);
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    if (std::abs(buffer.samples[i]) >= threshold) return i;
  }
  throw NoOnsetDetected("no sample above the onset threshold");
}

ImpulseResponse deconvolve(const AudioBuffer& recording,
                           const AudioBuffer& inverse_filter,
                           const DeconvolveOptions& options) {
  if (recording.sample_rate != inverse_filter.sample_rate)
    throw SampleRateMismatch(
        "recording at " + std::to_string(recording.sample_rate) +
        " Hz, inverse filter at " +
        std::to_string(inverse_filter.sample_rate) + " Hz");
  if (recording.size() < inverse_filter.size())
    throw InvalidInput("recording shorter than the inverse filter");

  AudioBuffer raw;
  raw.sample_rate = recording.sample_rate;
  raw.samples = fft_convolve(recording.samples, inverse_filter.samples);

  const std::size_t onset = detect_onset(raw, options.onset_threshold_db);
  const std::size_t pre_roll = static_cast<std::size_t>(
      std::llround(options.pre_roll_s * recording.sample_rate));
  const std::size_t start = onset > pre_roll ? onset - pre_roll : 0;

  ImpulseResponse ir;
  ir.buffer.sample_rate = recording.sample_rate;
  ir.buffer.samples.assign(raw.samples.begin() + start, raw.samples.end());
  ir.onset_index = onset - start;
  return ir;
}

}  // namespace rosa
