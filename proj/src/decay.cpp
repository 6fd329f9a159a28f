#include "rosa/decay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rosa {

namespace {

constexpr double kFloorMarginDb = 5.0;
constexpr double kFloorTailFraction = 0.10;
constexpr double kEnvelopeWindowS = 0.050;
constexpr double kLowFitThreshold = 0.95;
constexpr double kMinBandwidthTimeProduct = 8.0;

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& levels, std::size_t first,
                 std::size_t last, double fs) {
  const std::size_t n = last - first + 1;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = first; i <= last; ++i) {
    const double x = static_cast<double>(i) / fs;
    const double y = levels[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double den = n * sxx - sx * sx;
  LineFit fit;
  fit.slope = (n * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / n;
  const double ss_tot = syy - sy * sy / n;
  double ss_res = 0;
  for (std::size_t i = first; i <= last; ++i) {
    const double x = static_cast<double>(i) / fs;
    const double r = levels[i] - (fit.slope * x + fit.intercept);
    ss_res += r * r;
  }
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

// First index at or after `from` where the level reaches `threshold` dB.
std::optional<std::size_t> first_at_or_below(const std::vector<double>& levels,
                                             std::size_t from,
                                             double threshold) {
  for (std::size_t i = from; i < levels.size(); ++i) {
    if (levels[i] <= threshold) return i;
  }
  return std::nullopt;
}

}  // namespace

std::size_t find_truncation(const AudioBuffer& ir_band, std::size_t onset) {
  const std::size_t n = ir_band.size();
  if (n == 0) throw EmptyInput("empty impulse response");
  if (onset >= n) throw InvalidInput("onset beyond buffer");

  std::vector<double> energy(n);
  for (std::size_t i = 0; i < n; ++i)
    energy[i] = ir_band.samples[i] * ir_band.samples[i];

  // Noise floor from the final 10% of the buffer.
  const std::size_t tail =
      std::max<std::size_t>(1, static_cast<std::size_t>(n * kFloorTailFraction));
  const double floor_power =
      std::accumulate(energy.end() - tail, energy.end(), 0.0) / tail;
  const double threshold = floor_power * std::pow(10.0, kFloorMarginDb / 10.0);

  // Centered moving-average envelope, evaluated in a backward scan with a
  // sliding window sum. Summing locally keeps the tiny tail values exact;
  // a global cumulative sum would cancel catastrophically down there.
  const std::size_t win = std::max<std::size_t>(
      1, static_cast<std::size_t>(kEnvelopeWindowS * ir_band.sample_rate));
  const std::size_t half = win / 2;
  std::size_t lo = n - 1 > half ? n - 1 - half : 0;
  std::size_t hi = n;  // window is [lo, hi)
  double window_sum = 0.0;
  for (std::size_t j = lo; j < hi; ++j) window_sum += energy[j];

  // Last index still above floor + margin; integration stops right after it.
  for (std::size_t i = n; i-- > onset;) {
    const std::size_t want_lo = i > half ? i - half : 0;
    const std::size_t want_hi = std::min(n, i + half + 1);
    while (hi > want_hi) window_sum -= energy[--hi];
    while (lo > want_lo) window_sum += energy[--lo];
    if (window_sum / static_cast<double>(hi - lo) > threshold) return i + 1;
  }
  return onset;  // never above the floor: nothing usable
}

DecayCurve schroeder_curve(const AudioBuffer& ir_band, std::size_t onset) {
  const std::size_t n = ir_band.size();
  if (n == 0) throw EmptyInput("empty impulse response");
  if (onset >= n) throw InvalidInput("onset beyond buffer");

  const std::size_t trunc = find_truncation(ir_band, onset);
  if (trunc <= onset)
    throw EmptyInput("no energy above the noise floor after the onset");

  DecayCurve curve;
  curve.sample_rate = ir_band.sample_rate;
  curve.truncation_index = trunc;
  curve.levels_db.resize(trunc - onset);

  double tail = 0.0;
  for (std::size_t i = trunc; i-- > onset;) {
    tail += ir_band.samples[i] * ir_band.samples[i];
    curve.levels_db[i - onset] = tail;
  }
  const double total = curve.levels_db[0];
  if (total <= 0.0)
    throw EmptyInput("zero energy after the onset");
  for (double& v : curve.levels_db) v = db_from_power(v / total);
  return curve;
}

RtEstimate reverberation_time(const DecayCurve& curve, RtMarker marker,
                              double bandwidth_hz) {
  double upper_db = 0.0, lower_db = 0.0;
  const char* name = "";
  switch (marker) {
    case RtMarker::kT30:
      upper_db = -5.0;
      lower_db = -35.0;
      name = "T30";
      break;
    case RtMarker::kT20:
      upper_db = -5.0;
      lower_db = -25.0;
      name = "T20";
      break;
    case RtMarker::kEdt:
      upper_db = 0.0;
      lower_db = -10.0;
      name = "EDT";
      break;
  }

  if (curve.levels_db.empty()) throw EmptyInput("empty decay curve");

  // The last envelope-window of the curve integrates over fewer samples
  // than the noise-floor detector can vouch for and plunges toward -inf;
  // marker crossings there are artifacts, not decay.
  const std::size_t guard = std::min(
      curve.levels_db.size() - 1,
      static_cast<std::size_t>(kEnvelopeWindowS * curve.sample_rate));
  std::vector<double> usable(curve.levels_db.begin(),
                             curve.levels_db.end() - guard);

  const auto first = first_at_or_below(usable, 0, upper_db);
  const auto last =
      first ? first_at_or_below(usable, *first, lower_db) : std::nullopt;
  if (!first || !last || *last <= *first) {
    const double range = *std::min_element(usable.begin(), usable.end());
    throw InsufficientDecayRange(
        std::string(name) + " needs the curve to reach " +
        std::to_string(lower_db) + " dB; achieved dynamic range is " +
        std::to_string(range) + " dB");
  }

  const LineFit fit = fit_line(usable, *first, *last,
                               static_cast<double>(curve.sample_rate));
  if (!(fit.slope < 0.0))
    throw InsufficientDecayRange(std::string(name) +
                                 ": decay slope is not negative");
  const double t = 60.0 / -fit.slope;
  if (bandwidth_hz > 0.0 && t * bandwidth_hz < kMinBandwidthTimeProduct) {
    throw InsufficientDecayRange(
        std::string(name) + " = " + std::to_string(t) +
        " s is faster than a " + std::to_string(bandwidth_hz) +
        " Hz wide filter resolves (BT < 8): no real decay range");
  }
  return {t, fit.r2};
}

double clarity(const AudioBuffer& ir_band, std::size_t onset,
               double early_window_ms) {
  const std::size_t n = ir_band.size();
  if (n == 0) throw EmptyInput("empty impulse response");
  if (onset >= n) throw InvalidInput("onset beyond buffer");

  const std::size_t split =
      onset + static_cast<std::size_t>(
                  std::llround(early_window_ms * 1e-3 * ir_band.sample_rate));
  double early = 0.0, late = 0.0;
  for (std::size_t i = onset; i < n; ++i) {
    const double e = ir_band.samples[i] * ir_band.samples[i];
    (i < split ? early : late) += e;
  }
  if (late <= 0.0) return kPosInfDb;
  return db_from_power(early / late);
}

double definition_d50(double c50_db) {
  if (c50_db == kPosInfDb) return 1.0;
  return 1.0 / (1.0 + std::pow(10.0, -c50_db / 10.0));
}

double schroeder_frequency(const RoomGeometry& geometry, double rt_seconds) {
  if (!(geometry.volume_m3 > 0.0) || !(rt_seconds >= 0.0))
    throw InvalidInput("Schroeder frequency needs volume > 0 and T >= 0");
  return 2000.0 * std::sqrt(rt_seconds / geometry.volume_m3);
}

std::vector<BandParams> spatial_average(
    const std::vector<std::vector<BandParams>>& per_position) {
  if (per_position.empty()) throw EmptyInput("no positions to average");
  const std::size_t n_bands = per_position.front().size();
  for (const auto& pos : per_position) {
    if (pos.size() != n_bands)
      throw BandSetMismatch("positions disagree on band count");
    for (std::size_t b = 0; b < n_bands; ++b) {
      if (pos[b].band_center_hz != per_position.front()[b].band_center_hz)
        throw BandSetMismatch("positions disagree on band centers");
    }
  }

  std::vector<BandParams> out(n_bands);
  for (std::size_t b = 0; b < n_bands; ++b) {
    BandParams& avg = out[b];
    avg.band_center_hz = per_position.front()[b].band_center_hz;

    auto mean_of = [&](auto getter) -> std::optional<double> {
      double sum = 0.0;
      int count = 0;
      for (const auto& pos : per_position) {
        if (auto v = getter(pos[b])) {
          sum += *v;
          ++count;
        }
      }
      if (count == 0) return std::nullopt;
      return sum / count;
    };

    avg.t30_s = mean_of([](const BandParams& p) { return p.t30_s; });
    avg.t20_s = mean_of([](const BandParams& p) { return p.t20_s; });
    avg.edt_s = mean_of([](const BandParams& p) { return p.edt_s; });

    double c50_sum = 0.0;
    int c50_count = 0, c50_excluded = 0;
    double r2_sum = 0.0;
    int r2_count = 0, contributing = 0;
    for (const auto& pos : per_position) {
      const BandParams& p = pos[b];
      if (p.c50_db) {
        if (*p.c50_db == kPosInfDb) {
          ++c50_excluded;
        } else {
          c50_sum += *p.c50_db;
          ++c50_count;
        }
      }
      if (p.t30_s || p.t20_s || p.edt_s || p.c50_db) {
        ++contributing;
        r2_sum += p.fit_r2;
        ++r2_count;
      }
    }
    if (c50_count > 0) avg.c50_db = c50_sum / c50_count;
    else if (c50_excluded > 0) avg.c50_db = kPosInfDb;
    avg.c50_excluded_positions = c50_excluded;
    avg.contributing_positions = contributing;
    avg.fit_r2 = r2_count > 0 ? r2_sum / r2_count : 0.0;
    avg.low_fit_quality = r2_count > 0 && avg.fit_r2 < kLowFitThreshold;
  }
  return out;
}

}  // namespace rosa
