#pragma once

#include <array>
#include <vector>

#include "tfwi/types.hpp"

namespace tfwi {

/// Gauss-Legendre rule on [-1, 1].
struct QuadratureRule {
    std::vector<double> points;
    std::vector<double> weights;
};

QuadratureRule gauss_legendre(int count);

/// Legendre polynomial P_n and its derivative at t.
std::array<double, 2> legendre(int n, double t);

/// Integrated Legendre function (P_j - P_{j-2}) / sqrt(2(2j - 1)) for j >= 2,
/// with its derivative sqrt((2j - 1) / 2) P_{j-1}. Vanishes at t = +-1.
std::array<double, 2> integrated_legendre(int j, double t);

enum class ModeKind { vertex, edge, interior };

/// Identity of a hierarchical mode independent of the element degree.
struct ModeId {
    ModeKind kind = ModeKind::vertex;
    int entity = 0;  // vertex or local edge number
    int order_x = 1;
    int order_y = 1;
    friend bool operator==(const ModeId&, const ModeId&) = default;
};

/// Scalar hierarchical modes of a degree-p quadrilateral: 4 vertex modes,
/// then p - 1 modes per local edge (edges 0..3), then (p - 1)^2 interior
/// modes, built from integrated Legendre functions.
class HierarchicalBasis {
public:
    static constexpr int max_degree = 3;

    explicit HierarchicalBasis(int degree);

    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] int mode_count() const { return (degree_ + 1) * (degree_ + 1); }
    [[nodiscard]] ModeId mode(int index) const { return modes_[static_cast<std::size_t>(index)]; }
    [[nodiscard]] int index_of(const ModeId& id) const;

    /// Values and local gradients (d/dxi, d/deta) of every mode at (xi, eta).
    void evaluate(Vec2 local, std::vector<double>& values, std::vector<std::array<double, 2>>& gradients) const;

private:
    int degree_;
    std::vector<ModeId> modes_;
};

struct ShapeValues {
    std::vector<double> values;
    std::vector<std::array<double, 2>> gradients;
};

/// Throws Error(out_of_range) for degrees outside [1, 3] and
/// Error(invalid_argument) for points outside the reference square.
ShapeValues shape_functions(int degree, Vec2 local);

}  // namespace tfwi
