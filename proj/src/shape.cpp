#include "tfwi/shape.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tfwi/error.hpp"

namespace tfwi {

std::array<double, 2> legendre(int n, double t)
{
    if (n == 0) {
        return {1.0, 0.0};
    }
    double p_prev = 1.0;
    double p = t;
    for (int k = 2; k <= n; ++k) {
        const double next = ((2.0 * k - 1.0) * t * p - (k - 1.0) * p_prev) / k;
        p_prev = p;
        p = next;
    }
    // P'_n from the recurrence (1 - t^2) P'_n = n (P_{n-1} - t P_n), with the
    // endpoint values n(n+1)/2 * t^(n+1).
    double dp;
    if (std::abs(1.0 - t * t) < 1e-14) {
        dp = 0.5 * n * (n + 1) * (n % 2 == 1 ? 1.0 : t);
    } else {
        dp = n * (p_prev - t * p) / (1.0 - t * t);
    }
    return {p, dp};
}

std::array<double, 2> integrated_legendre(int j, double t)
{
    const double value = (legendre(j, t)[0] - legendre(j - 2, t)[0]) / std::sqrt(2.0 * (2.0 * j - 1.0));
    const double derivative = std::sqrt((2.0 * j - 1.0) / 2.0) * legendre(j - 1, t)[0];
    return {value, derivative};
}

QuadratureRule gauss_legendre(int count)
{
    if (count < 1) {
        throw Error(ErrorCode::invalid_argument, "quadrature needs at least one point");
    }
    QuadratureRule rule;
    rule.points.resize(static_cast<std::size_t>(count));
    rule.weights.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        double t = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [p, dp] = legendre(count, t);
            const double dt = p / dp;
            t -= dt;
            if (std::abs(dt) < 1e-16) {
                break;
            }
        }
        const double dp = legendre(count, t)[1];
        rule.points[static_cast<std::size_t>(count - 1 - i)] = t;
        rule.weights[static_cast<std::size_t>(count - 1 - i)] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    return rule;
}

HierarchicalBasis::HierarchicalBasis(int degree) : degree_(degree)
{
    if (degree < 1 || degree > max_degree) {
        throw Error(ErrorCode::out_of_range, "polynomial degree " + std::to_string(degree) + " outside [1, 3]");
    }
    for (int v = 0; v < 4; ++v) {
        modes_.push_back({ModeKind::vertex, v, 1, 1});
    }
    for (int e = 0; e < 4; ++e) {
        for (int j = 2; j <= degree; ++j) {
            const bool horizontal = e == 0 || e == 2;
            modes_.push_back({ModeKind::edge, e, horizontal ? j : 1, horizontal ? 1 : j});
        }
    }
    for (int i = 2; i <= degree; ++i) {
        for (int j = 2; j <= degree; ++j) {
            modes_.push_back({ModeKind::interior, 0, i, j});
        }
    }
}

int HierarchicalBasis::index_of(const ModeId& id) const
{
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        if (modes_[i] == id) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

void HierarchicalBasis::evaluate(Vec2 local, std::vector<double>& values,
                                 std::vector<std::array<double, 2>>& gradients) const
{
    const auto n = static_cast<std::size_t>(mode_count());
    values.resize(n);
    gradients.resize(n);

    // 1D factors: index 0 -> (1 - t)/2, 1 -> (1 + t)/2, j >= 2 -> integrated Legendre.
    std::array<std::array<double, 2>, max_degree + 1> fx{};
    std::array<std::array<double, 2>, max_degree + 1> fy{};
    fx[0] = {0.5 * (1.0 - local.x), -0.5};
    fx[1] = {0.5 * (1.0 + local.x), 0.5};
    fy[0] = {0.5 * (1.0 - local.y), -0.5};
    fy[1] = {0.5 * (1.0 + local.y), 0.5};
    for (int j = 2; j <= degree_; ++j) {
        fx[static_cast<std::size_t>(j)] = integrated_legendre(j, local.x);
        fy[static_cast<std::size_t>(j)] = integrated_legendre(j, local.y);
    }

    const auto put = [&](std::size_t m, const std::array<double, 2>& a, const std::array<double, 2>& b) {
        values[m] = a[0] * b[0];
        gradients[m] = {a[1] * b[0], a[0] * b[1]};
    };

    static constexpr std::array<std::array<int, 2>, 4> corner{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    for (std::size_t m = 0; m < n; ++m) {
        const ModeId& id = modes_[m];
        switch (id.kind) {
        case ModeKind::vertex: {
            const auto c = corner[static_cast<std::size_t>(id.entity)];
            put(m, fx[static_cast<std::size_t>(c[0])], fy[static_cast<std::size_t>(c[1])]);
            break;
        }
        case ModeKind::edge: {
            const auto ox = static_cast<std::size_t>(id.order_x);
            const auto oy = static_cast<std::size_t>(id.order_y);
            switch (id.entity) {
            case 0: put(m, fx[ox], fy[0]); break;
            case 1: put(m, fx[1], fy[oy]); break;
            case 2: put(m, fx[ox], fy[1]); break;
            default: put(m, fx[0], fy[oy]); break;
            }
            break;
        }
        case ModeKind::interior:
            put(m, fx[static_cast<std::size_t>(id.order_x)], fy[static_cast<std::size_t>(id.order_y)]);
            break;
        }
    }
}

ShapeValues shape_functions(int degree, Vec2 local)
{
    const HierarchicalBasis basis(degree);
    constexpr double slack = 1.0 + 1e-12;
    if (std::abs(local.x) > slack || std::abs(local.y) > slack) {
        throw Error(ErrorCode::invalid_argument, "local coordinates outside [-1, 1]^2");
    }
    ShapeValues out;
    basis.evaluate(local, out.values, out.gradients);
    return out;
}

}  // namespace tfwi
