#include "tfwi/analytic.hpp"

#include <cmath>
#include <sstream>

#include "tfwi/error.hpp"

namespace tfwi {

Complex hankel2(int order, double x)
{
    if (order != 0 && order != 1) {
        throw Error(ErrorCode::invalid_argument, "hankel2 supports orders 0 and 1");
    }
    if (!(x > 0.0) || !std::isfinite(x)) {
        std::ostringstream msg;
        msg << "hankel2 requires a positive argument, got " << x;
        throw Error(ErrorCode::invalid_argument, msg.str());
    }
    const double nu = order;
    return {std::cyl_bessel_j(nu, x), -std::cyl_neumann(nu, x)};
}

Complex greens_x_analytic(const AnalyticQuery& q)
{
    if (!(q.omega > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "omega must be positive");
    }
    if (!(q.vp > 0.0) || !(q.vs > 0.0) || !(q.density > 0.0)) {
        throw Error(ErrorCode::invalid_material, "velocities and density must be positive");
    }
    const double dx = q.point.x - q.source.x;
    const double dy = q.point.y - q.source.y;
    const double r = std::hypot(dx, dy);
    if (!(r > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "field point coincides with the source");
    }
    const double theta = std::atan2(dx, -dy);
    const double cs = std::cos(theta) * std::sin(theta);
    const double rho = q.density;
    const double w = q.omega;
    const Complex i{0.0, 1.0};
    const double ap = r * w / q.vp;
    const double as = r * w / q.vs;
    return i / (4.0 * rho * q.vp * q.vp) * cs * hankel2(0, ap) -
           i / (4.0 * rho * q.vs * q.vs) * cs * hankel2(0, as) -
           i / (2.0 * rho * q.vp) * cs / (r * w) * hankel2(1, ap) +
           i / (2.0 * rho * q.vs) * cs / (r * w) * hankel2(1, as);
}

}  // namespace tfwi
