#pragma once

#include <vector>

#include "rosa/filterbank.hpp"
#include "rosa/types.hpp"

namespace rosa {

// Equivalent continuous level per band over the first `duration_s` seconds
// of a calibrated recording, dB SPL re 20 uPa. Silent bands report the
// -inf sentinel. Linear (Leq) time weighting over the window.
BandSpectrum band_leq(const AudioBuffer& recording, const BandDefinition& bands,
                      double duration_s);

// A-weighting corrections per nominal band center (IEC 61672 values),
// overridable configuration data.
struct AWeightTable {
  std::vector<double> centers_hz;
  std::vector<double> weights_db;

  static AWeightTable iec61672();
  double weight_for(double nominal_center_hz) const;  // throws UnknownBand
};

// Energetic sum of A-weighted band levels. An empty or all-silent spectrum
// yields the -inf sentinel.
double a_weighted_level(const BandSpectrum& spectrum,
                        const AWeightTable& table = AWeightTable::iec61672());

}  // namespace rosa
