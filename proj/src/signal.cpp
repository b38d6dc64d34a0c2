#include "tfwi/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tfwi/error.hpp"

namespace tfwi {

void TimeSeries::validate() const
{
    if (!(dt > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "time series needs dt > 0");
    }
    if (samples.size() < 2) {
        throw Error(ErrorCode::invalid_argument, "time series needs at least 2 samples");
    }
}

void Spectrum::validate() const
{
    if (values.size() != omegas.size()) {
        throw Error(ErrorCode::dimension_mismatch, "spectrum values do not match its frequency list");
    }
    for (std::size_t k = 0; k < omegas.size(); ++k) {
        if (!(omegas[k] >= 0.0) || (k > 0 && !(omegas[k] > omegas[k - 1]))) {
            throw Error(ErrorCode::invalid_argument, "spectrum frequencies must be non-negative and increasing");
        }
    }
}

double ricker(double t, double peak_frequency)
{
    if (!(peak_frequency > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "Ricker peak frequency must be positive");
    }
    const double a = std::numbers::pi * std::numbers::pi * peak_frequency * peak_frequency * t * t;
    return (1.0 - 2.0 * a) * std::exp(-a);
}

TimeSeries ricker_series(double peak_frequency, std::size_t nt, double dt, double t0)
{
    TimeSeries out{std::vector<double>(nt), dt, t0};
    for (std::size_t n = 0; n < nt; ++n) {
        out.samples[n] = ricker(out.time(n), peak_frequency);
    }
    return out;
}

Complex dft(const TimeSeries& series, double omega)
{
    series.validate();
    if (!(omega >= 0.0)) {
        throw Error(ErrorCode::invalid_argument, "dft requires omega >= 0");
    }
    Complex sum{0.0, 0.0};
    for (std::size_t n = 0; n < series.samples.size(); ++n) {
        sum += series.samples[n] * std::polar(1.0, -omega * series.time(n));
    }
    return sum * series.dt;
}

Spectrum dft(const TimeSeries& series, const std::vector<double>& omegas)
{
    Spectrum out{omegas, {}};
    out.values.reserve(omegas.size());
    for (double w : omegas) {
        out.values.push_back(dft(series, w));
    }
    out.validate();
    return out;
}

namespace {

void check_shared_grid(const Spectrum& a, const Spectrum& b)
{
    a.validate();
    b.validate();
    if (a.omegas != b.omegas) {
        throw Error(ErrorCode::dimension_mismatch, "spectra are sampled on different frequency lists");
    }
}

}  // namespace

Spectrum convolve(const Spectrum& a, const Spectrum& b)
{
    check_shared_grid(a, b);
    Spectrum out{a.omegas, std::vector<Complex>(a.values.size())};
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        out.values[k] = a.values[k] * b.values[k];
    }
    return out;
}

TimeSeries idft_synthesize(const Spectrum& spectrum, const Spectrum& wavelet, std::size_t nt, double dt, double t0)
{
    const Spectrum product = convolve(spectrum, wavelet);
    TimeSeries out{std::vector<double>(nt, 0.0), dt, t0};
    out.validate();
    const auto& w = product.omegas;
    const std::size_t k_count = w.size();
    if (k_count == 0) {
        return out;
    }
    std::vector<double> weight(k_count, 0.0);
    for (std::size_t k = 0; k < k_count; ++k) {
        const double left = k > 0 ? w[k] - w[k - 1] : w[k];
        const double right = k + 1 < k_count ? w[k + 1] - w[k] : 0.0;
        weight[k] = 0.5 * (left + right);
    }
    for (std::size_t n = 0; n < nt; ++n) {
        const double t = out.time(n);
        double sum = 0.0;
        for (std::size_t k = 0; k < k_count; ++k) {
            sum += weight[k] * (product.values[k] * std::polar(1.0, w[k] * t)).real();
        }
        out.samples[n] = sum / std::numbers::pi;
    }
    return out;
}

Spectrum deconvolve(const Spectrum& record, const Spectrum& wavelet, double water_level)
{
    check_shared_grid(record, wavelet);
    if (!(water_level > 0.0 && water_level < 1.0)) {
        throw Error(ErrorCode::invalid_argument, "water level must lie in (0, 1)");
    }
    double peak = 0.0;
    for (const Complex& v : wavelet.values) {
        peak = std::max(peak, std::abs(v));
    }
    if (!(peak > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "cannot deconvolve by an all-zero wavelet");
    }
    const double floor = water_level * peak;
    Spectrum out{record.omegas, std::vector<Complex>(record.values.size())};
    for (std::size_t k = 0; k < record.values.size(); ++k) {
        const double magnitude = std::abs(wavelet.values[k]);
        const Complex phase = magnitude > 0.0 ? wavelet.values[k] / magnitude : Complex{1.0, 0.0};
        out.values[k] = record.values[k] / (std::max(magnitude, floor) * phase);
    }
    return out;
}

double hz_to_rad(double hz) { return 2.0 * std::numbers::pi * hz; }

}  // namespace tfwi
