#pragma once

#include <cmath>
#include <complex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace tfwi {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>;

/// Point or direction in the 2D plane. y points upwards; the Earth's surface is
/// the top of the grid.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Vec2 a, Vec2 b) = default;

    [[nodiscard]] double norm() const { return std::hypot(x, y); }
};

using Point = Vec2;

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

}  // namespace tfwi
