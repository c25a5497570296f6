// Copyright 2026 The napt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NAPT_SINC_H_
#define NAPT_SINC_H_

#include <cmath>
#include <vector>

#include "napt/layers.h"

namespace napt {

inline constexpr double kSincMinLowHz = 50.0;
inline constexpr double kSincMinBandHz = 50.0;
inline constexpr double kSincMaxHighHz = kSampleRate / 2.0 - 1.0;

/// Effective cutoffs after clamping the raw (low, band) parameters.
struct SincCutoffs {
  double low = 0, high = 0;
  double dlow_draw = 0;   // d low / d raw_low
  double dhigh_dlow = 0;  // d high / d low (through the clamp)
  double dhigh_dband = 0;
  bool clamped = false;
};

inline SincCutoffs sinc_cutoffs(double raw_low, double raw_band) {
  SincCutoffs c;
  const double max_low = kSincMaxHighHz - kSincMinBandHz;
  c.low = raw_low;
  c.dlow_draw = 1;
  if (raw_low < kSincMinLowHz || raw_low > max_low) {
    c.low = raw_low < kSincMinLowHz ? kSincMinLowHz : max_low;
    c.dlow_draw = 0;
    c.clamped = true;
  }
  const double h = c.low + raw_band;
  if (raw_band < kSincMinBandHz) {
    c.high = c.low + kSincMinBandHz;
    c.dhigh_dlow = 1;
    c.clamped = true;
  } else if (h > kSincMaxHighHz) {
    c.high = kSincMaxHighHz;
    c.clamped = true;
  } else {
    c.high = h;
    c.dhigh_dlow = 1;
    c.dhigh_dband = 1;
  }
  return c;
}

inline double hamming(int i, int K) {
  return K == 1 ? 1.0 : 0.54 - 0.46 * std::cos(2 * M_PI * i / (K - 1));
}

/// Hamming-windowed ideal band-pass with unit pass-band gain, centred on
/// tap (K - 1) / 2. K must be odd. A multiple of the window is subtracted so
/// the taps sum to zero; short kernels otherwise leak DC through filters
/// whose lower edge sits inside the window's transition band.
inline std::vector<double> sinc_kernel(double low_hz, double high_hz, int K) {
  if (K < 1 || K % 2 == 0) throw Error("sinc kernel length must be odd");
  std::vector<double> h(K);
  const int half = (K - 1) / 2;
  double sum_h = 0, sum_w = 0;
  for (int i = 0; i < K; ++i) {
    const int m = i - half;
    const double w = hamming(i, K);
    const double v =
        m == 0 ? 2 * (high_hz - low_hz) / kSampleRate
               : (std::sin(2 * M_PI * high_hz * m / kSampleRate) -
                  std::sin(2 * M_PI * low_hz * m / kSampleRate)) / (M_PI * m);
    h[i] = v * w;
    sum_h += h[i];
    sum_w += w;
  }
  for (int i = 0; i < K; ++i) h[i] -= hamming(i, K) * sum_h / sum_w;
  return h;
}

/// Builds the K x F filter bank from 1 x F raw low and band parameters.
/// Gradients flow to both cutoffs of every filter.
template <typename S>
Var<S> sinc_bank(Var<S> raw_low, Var<S> raw_band, int K) {
  const Index F = raw_low.cols();
  if (raw_low.rows() != 1 || raw_band.rows() != 1 || raw_band.cols() != F)
    throw Error("sinc_bank: parameters must be 1 x filters");
  std::vector<SincCutoffs> cut(F);
  Matrix<S> bank(K, F);
  for (Index f = 0; f < F; ++f) {
    cut[f] = sinc_cutoffs(double(raw_low.value()(0, f)), double(raw_band.value()(0, f)));
    const std::vector<double> h = sinc_kernel(cut[f].low, cut[f].high, K);
    for (int i = 0; i < K; ++i) bank(i, f) = S(h[i]);
  }
  const int il = raw_low.id, ib = raw_band.id;
  return raw_low.tape->push(
      std::move(bank), {il, ib}, [il, ib, K, cut](Tape<S>& t, const Matrix<S>& g) {
        const Index F = Index(cut.size());
        const int half = (K - 1) / 2;
        Matrix<S> dl(1, F), db(1, F);
        for (Index f = 0; f < F; ++f) {
          // Undo the DC projection first: g <- g - 1 (w.g) / sum(w).
          double wg = 0, sw = 0;
          for (int i = 0; i < K; ++i) {
            wg += hamming(i, K) * double(g(i, f));
            sw += hamming(i, K);
          }
          double d_high = 0, d_low = 0;
          for (int i = 0; i < K; ++i) {
            const int m = i - half;
            const double w = hamming(i, K);
            const double gi = (double(g(i, f)) - wg / sw) * w * 2.0 / kSampleRate;
            d_high += gi * std::cos(2 * M_PI * cut[f].high * m / kSampleRate);
            d_low -= gi * std::cos(2 * M_PI * cut[f].low * m / kSampleRate);
          }
          const double total_low = d_low + d_high * cut[f].dhigh_dlow;
          dl(0, f) = S(total_low * cut[f].dlow_draw);
          db(0, f) = S(d_high * cut[f].dhigh_dband);
        }
        t.accumulate(il, dl);
        t.accumulate(ib, db);
      });
}

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Trainable cutoffs of a sinc layer, initialised on the mel scale.
template <typename S>
struct SincFilters {
  Parameter<S>* low = nullptr;
  Parameter<S>* band = nullptr;
  int kernel = 251;

  static SincFilters create(ParameterStore<S>& store, const std::string& prefix,
                            int filters, int kernel) {
    if (kernel % 2 == 0) throw ConfigError("sinc_kernel", "must be odd");
    if (filters < 1) throw ConfigError("sinc_filters", "must be positive");
    SincFilters s;
    s.kernel = kernel;
    s.low = &store.create(prefix + ".low_hz", 1, filters);
    s.band = &store.create(prefix + ".band_hz", 1, filters);
    s.low->decay = s.band->decay = false;
    // Start strictly inside the clamp region so no cutoff sits on a kink.
    const double m0 = hz_to_mel(2 * kSincMinLowHz);
    const double m1 = hz_to_mel(kSincMaxHighHz - kSincMinBandHz);
    for (int f = 0; f < filters; ++f) {
      const double lo = mel_to_hz(m0 + (m1 - m0) * f / filters);
      const double hi = mel_to_hz(m0 + (m1 - m0) * (f + 1) / filters);
      s.low->value(0, f) = S(lo);
      s.band->value(0, f) = S(std::max(hi - lo, 2 * kSincMinBandHz));
    }
    return s;
  }

  Var<S> bank(Tape<S>& t) const { return sinc_bank(t.param(*low), t.param(*band), kernel); }

  /// Projects the raw parameters back into the valid region. Returns the
  /// number of filters that needed clamping.
  int project() {
    int n = 0;
    for (Index f = 0; f < low->value.cols(); ++f) {
      const SincCutoffs c = sinc_cutoffs(double(low->value(0, f)), double(band->value(0, f)));
      if (!c.clamped) continue;
      ++n;
      low->value(0, f) = S(c.low);
      band->value(0, f) = S(c.high - c.low);
    }
    return n;
  }
};

}  // namespace napt

#endif  // NAPT_SINC_H_
