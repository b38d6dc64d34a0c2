#pragma once

#include <vector>

#include "tfwi/types.hpp"

namespace tfwi {

/// Uniformly sampled real signal: sample n is taken at t0 + n dt.
struct TimeSeries {
    std::vector<double> samples;
    double dt = 1.0;
    double t0 = 0.0;

    [[nodiscard]] double time(std::size_t n) const { return t0 + static_cast<double>(n) * dt; }
    void validate() const;
    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;
};

/// Complex values on an explicit, strictly increasing list of omega >= 0
/// (rad/s).
struct Spectrum {
    std::vector<double> omegas;
    std::vector<Complex> values;

    void validate() const;
};

/// (1 - 2 pi^2 f^2 t^2) exp(-pi^2 f^2 t^2), f in Hz.
double ricker(double t, double peak_frequency);

/// Ricker wavelet sampled at t0 + n dt.
TimeSeries ricker_series(double peak_frequency, std::size_t nt, double dt, double t0 = 0.0);

/// sum_n x_n exp(-i omega t_n) dt, the transform matching time-harmonic
/// fields u(t) = Re(u exp(+i omega t)).
Complex dft(const TimeSeries& series, double omega);
Spectrum dft(const TimeSeries& series, const std::vector<double>& omegas);

/// Pointwise product of two spectra on the same omega list.
Spectrum convolve(const Spectrum& a, const Spectrum& b);

/// Real signal whose transform is spectrum * wavelet: the one-sided inverse
/// transform (1/pi) Re sum_k w_k X_k exp(i omega_k t) with trapezoid weights
/// w_k. A list that does not start at 0 is extended to 0 assuming a vanishing
/// DC value.
TimeSeries idft_synthesize(const Spectrum& spectrum, const Spectrum& wavelet, std::size_t nt, double dt,
                           double t0 = 0.0);

/// record / (max(|w|, level * max|w|) * phase(w)).
Spectrum deconvolve(const Spectrum& record, const Spectrum& wavelet, double water_level = 1e-4);

/// omega = 2 pi f.
double hz_to_rad(double hz);

}  // namespace tfwi
