#include "tfwi/pml.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "tfwi/error.hpp"

namespace tfwi {

void PmlProfile::validate() const
{
    if (!(c_pml >= 0.0) || !std::isfinite(c_pml)) {
        throw Error(ErrorCode::validation_error, "pml.c_pml must be non-negative");
    }
    if (!(width > 0.0)) {
        throw Error(ErrorCode::validation_error, "pml width must be positive");
    }
    if (!(omega_c_ratio > 0.0 && omega_c_ratio < 1.0)) {
        throw Error(ErrorCode::validation_error, "pml.omega_c_ratio must lie in (0, 1)");
    }
}

double damping(double local_coordinate, const PmlProfile& profile)
{
    const double tol = 1e-9 * profile.width;
    if (!(local_coordinate >= -tol && local_coordinate <= profile.width + tol)) {
        std::ostringstream msg;
        msg << "local layer coordinate " << local_coordinate << " outside [0, " << profile.width << "]";
        throw Error(ErrorCode::out_of_range, msg.str());
    }
    const double x = std::clamp(local_coordinate, 0.0, profile.width);
    return profile.c_pml * (1.0 - std::cos(0.5 * std::numbers::pi * x / profile.width));
}

Complex stretching(double local_coordinate, double omega, const PmlProfile& profile)
{
    if (!(omega > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "stretching requires omega > 0");
    }
    const double gamma = damping(local_coordinate, profile);
    if (gamma == 0.0) {
        return {1.0, 0.0};
    }
    return 1.0 + gamma / Complex(profile.omega_c_ratio * omega, omega);
}

ElasticTensor stretched_stiffness(const ElasticTensor& c, Complex eps_x, Complex eps_y)
{
    const std::array<Complex, 2> eps{eps_x, eps_y};
    const Complex volume = eps_x * eps_y;
    ElasticTensor out;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < 2; ++k) {
                for (int l = 0; l < 2; ++l) {
                    out(i, j, k, l) = volume / (eps[static_cast<std::size_t>(i)] * eps[static_cast<std::size_t>(k)]) *
                                      c(i, j, k, l);
                }
            }
        }
    }
    return out;
}

}  // namespace tfwi
