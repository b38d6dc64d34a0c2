#pragma once

#include "tfwi/types.hpp"

namespace tfwi {

/// Homogeneous unbounded medium, source at `source`, field point `point`.
struct AnalyticQuery {
    Point source{};
    Point point{};
    double omega = 0.0;
    double vp = 4000.0;
    double vs = 2400.0;
    double density = 2500.0;
};

/// H_n^(2)(x) = J_n(x) - i Y_n(x) for n in {0, 1}, x > 0.
Complex hankel2(int order, double x);

/// Horizontal displacement for a unit vertical point force in a homogeneous
/// unbounded medium (outgoing under the e^{+i omega t} convention), with
/// theta = atan2(x - x_s, -(y - y_s)).
Complex greens_x_analytic(const AnalyticQuery& q);

}  // namespace tfwi
