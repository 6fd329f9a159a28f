#include "rosa/filterbank.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace rosa {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kFilterOrder = 3;  // per-side slope ~18 dB/oct, class-1-like
constexpr double kReversedFilterMaxCenterHz = 250.0;

// IEC 61260 nominal third-octave labels for one decade (1000..8000 and
// scaled copies cover the usual measurement range).
constexpr double kThirdOctaveNominals[] = {1000.0, 1250.0, 1600.0, 2000.0,
                                           2500.0, 3150.0, 4000.0, 5000.0,
                                           6300.0, 8000.0};

double exact_from_index(int k, int fraction) {
  return 1000.0 * std::pow(2.0, static_cast<double>(k) / fraction);
}

double nominal_third_octave(int k) {
  // k = 0 is 1000 Hz; nominal labels repeat every decade (10 bands).
  int r = ((k % 10) + 10) % 10;
  int decades = (k - r) / 10;
  return kThirdOctaveNominals[r] * std::pow(10.0, static_cast<double>(decades));
}

double nominal_octave(int k) {
  // Octave labels are every third third-octave label (62.5 -> 63, ...).
  return nominal_third_octave(3 * k);
}

}  // namespace

double BandDefinition::lower_edge_hz(std::size_t i) const {
  return bands.at(i).exact_hz * std::pow(2.0, -0.5 / fraction);
}

double BandDefinition::upper_edge_hz(std::size_t i) const {
  return bands.at(i).exact_hz * std::pow(2.0, 0.5 / fraction);
}

std::vector<double> BandDefinition::nominal_centers() const {
  std::vector<double> out;
  out.reserve(bands.size());
  for (const Band& b : bands) out.push_back(b.nominal_hz);
  return out;
}

BandDefinition BandDefinition::octaves(double lo_nominal, double hi_nominal) {
  BandDefinition def;
  def.fraction = 1;
  for (int k = -9; k <= 9; ++k) {
    double nominal = nominal_octave(k);
    if (nominal < lo_nominal * 0.99 || nominal > hi_nominal * 1.01) continue;
    def.bands.push_back({nominal, exact_from_index(k, 1)});
  }
  if (def.bands.empty()) throw InvalidInput("empty octave band range");
  return def;
}

BandDefinition BandDefinition::third_octaves(double lo_nominal,
                                             double hi_nominal) {
  BandDefinition def;
  def.fraction = 3;
  for (int k = -27; k <= 27; ++k) {
    double nominal = nominal_third_octave(k);
    if (nominal < lo_nominal * 0.99 || nominal > hi_nominal * 1.01) continue;
    def.bands.push_back({nominal, exact_from_index(k, 3)});
  }
  if (def.bands.empty()) throw InvalidInput("empty third-octave band range");
  return def;
}

BandDefinition BandDefinition::sti_octaves() { return octaves(125.0, 8000.0); }

std::vector<Biquad> butter_bandpass(int order, double f_lo_hz, double f_hi_hz,
                                    double center_hz, double sample_rate) {
  using cplx = std::complex<double>;
  if (!(0.0 < f_lo_hz && f_lo_hz < f_hi_hz) || f_hi_hz >= sample_rate / 2.0)
    throw BandAboveNyquist("band edges " + std::to_string(f_lo_hz) + ".." +
                           std::to_string(f_hi_hz) +
                           " Hz invalid at sample rate " +
                           std::to_string(sample_rate) + " Hz");

  // Analog prototype with pre-warped edges, then bilinear transform.
  const double k2fs = 2.0 * sample_rate;
  const double w1 = k2fs * std::tan(kPi * f_lo_hz / sample_rate);
  const double w2 = k2fs * std::tan(kPi * f_hi_hz / sample_rate);
  const double bw = w2 - w1;
  const double w0sq = w1 * w2;

  // Low-pass -> band-pass: each prototype pole p yields the roots of
  // s^2 - p*bw*s + w0^2.
  std::vector<std::pair<cplx, cplx>> pole_pairs;  // conjugate pairs
  for (int k = 0; k < order; ++k) {
    const double theta = kPi * (2.0 * k + order + 1.0) / (2.0 * order);
    const cplx p(std::cos(theta), std::sin(theta));
    if (p.imag() < -1e-12) continue;  // conjugates handled together
    const cplx a = p * (bw / 2.0);
    const cplx disc = std::sqrt(a * a - w0sq);
    if (std::abs(p.imag()) < 1e-12) {
      // real prototype pole: the two band-pass roots are conjugates
      pole_pairs.emplace_back(a + disc, a - disc);
    } else {
      // complex pole: roots pair up with those of the conjugate prototype
      pole_pairs.emplace_back(a + disc, std::conj(a + disc));
      pole_pairs.emplace_back(a - disc, std::conj(a - disc));
    }
  }

  std::vector<Biquad> sections;
  sections.reserve(pole_pairs.size());
  for (const auto& [p1, p2] : pole_pairs) {
    const cplx z1 = (k2fs + p1) / (k2fs - p1);
    const cplx z2 = (k2fs + p2) / (k2fs - p2);
    Biquad s;
    // numerator zeros at z = +1 and z = -1 (from s = 0 and s = inf)
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;
    s.a1 = -(z1 + z2).real();
    s.a2 = (z1 * z2).real();
    sections.push_back(s);
  }

  // Normalize to unit gain at the band center.
  const cplx z = std::exp(cplx(0.0, 2.0 * kPi * center_hz / sample_rate));
  cplx h(1.0, 0.0);
  for (const Biquad& s : sections) {
    h *= (s.b0 * z * z + s.b1 * z + s.b2) / (z * z + s.a1 * z + s.a2);
  }
  const double gain = std::abs(h);
  if (!(gain > 0.0)) throw InvalidInput("degenerate band-pass design");
  sections.front().b0 /= gain;
  sections.front().b1 /= gain;
  sections.front().b2 /= gain;
  return sections;
}

std::vector<double> sosfilt(const std::vector<Biquad>& sections,
                            std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  for (const Biquad& s : sections) {
    double s0 = 0.0, s1 = 0.0;
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + s0;
      s0 = s.b1 * in - s.a1 * out + s1;
      s1 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

std::vector<AudioBuffer> octave_filterbank(const AudioBuffer& buffer,
                                           const BandDefinition& bands) {
  if (buffer.empty()) throw EmptyInput("cannot filter an empty buffer");
  const double fs = buffer.sample_rate;
  for (std::size_t i = 0; i < bands.bands.size(); ++i) {
    if (bands.upper_edge_hz(i) >= fs / 2.0)
      throw BandAboveNyquist(
          "band " + std::to_string(bands.bands[i].nominal_hz) +
          " Hz exceeds Nyquist at sample rate " + std::to_string(fs) + " Hz");
  }

  std::vector<AudioBuffer> out;
  out.reserve(bands.bands.size());
  for (std::size_t i = 0; i < bands.bands.size(); ++i) {
    const Band& band = bands.bands[i];
    const auto sos = butter_bandpass(kFilterOrder, bands.lower_edge_hz(i),
                                     bands.upper_edge_hz(i), band.exact_hz, fs);
    AudioBuffer filtered;
    filtered.sample_rate = buffer.sample_rate;
    filtered.calibration_offset_db = buffer.calibration_offset_db;
    if (band.nominal_hz <= kReversedFilterMaxCenterHz) {
      std::vector<double> rev(buffer.samples.rbegin(), buffer.samples.rend());
      std::vector<double> y = sosfilt(sos, rev);
      filtered.samples.assign(y.rbegin(), y.rend());
    } else {
      filtered.samples = sosfilt(sos, buffer.samples);
    }
    out.push_back(std::move(filtered));
  }
  return out;
}

}  // namespace rosa
