#pragma once

#include <array>
#include <span>
#include <vector>

#include "tfwi/mesh.hpp"
#include "tfwi/types.hpp"

namespace tfwi {

struct AmbientProperties {
    double vp = 4000.0;       // m/s
    double vs = 2400.0;       // m/s
    double density = 2500.0;  // kg/m^3

    void validate() const;
    friend bool operator==(const AmbientProperties&, const AmbientProperties&) = default;
};

/// Nodal P- and S-wave velocities: the first node_count() entries are v_p,
/// the following node_count() entries are v_s, in mesh node order.
class ModelVector {
public:
    ModelVector() = default;
    explicit ModelVector(std::size_t node_count);
    ModelVector(std::vector<double> vp, std::vector<double> vs);

    static ModelVector homogeneous(std::size_t node_count, double vp, double vs);

    [[nodiscard]] std::size_t node_count() const { return values_.size() / 2; }
    [[nodiscard]] std::size_t size() const { return values_.size(); }

    [[nodiscard]] std::span<const double> values() const { return values_; }
    [[nodiscard]] std::span<double> values() { return values_; }
    [[nodiscard]] std::span<const double> vp() const { return values().first(node_count()); }
    [[nodiscard]] std::span<double> vp() { return values().first(node_count()); }
    [[nodiscard]] std::span<const double> vs() const { return values().last(node_count()); }
    [[nodiscard]] std::span<double> vs() { return values().last(node_count()); }

    [[nodiscard]] Eigen::Map<const RealVector> as_eigen() const;
    static ModelVector from_eigen(const RealVector& values);

    /// All velocities positive and v_p > sqrt(2) v_s at every node.
    [[nodiscard]] bool is_valid() const;
    void validate() const;

    friend bool operator==(const ModelVector&, const ModelVector&) = default;

private:
    std::vector<double> values_;
};

struct Velocities {
    double vp = 0.0;
    double vs = 0.0;
};

/// Bilinear interpolation of nodal velocities inside the containing element.
Velocities evaluate_velocities(const ModelVector& model, const Mesh& mesh, Point p);

/// Same as evaluate_velocities for a known element and local coordinates.
Velocities evaluate_velocities(const ModelVector& model, const Mesh& mesh, int element, Vec2 local);

/// Bilinear nodal basis of an element at local coordinates (corner order).
std::array<double, 4> bilinear_basis(Vec2 local);

struct LameParameters {
    double lambda = 0.0;
    double mu = 0.0;

    /// False when lambda <= 0 or mu <= 0 (v_p <= sqrt(2) v_s).
    [[nodiscard]] bool valid() const { return lambda > 0.0 && mu > 0.0; }
};

LameParameters lame_parameters(double vp, double vs, double density);
Velocities velocities_from_lame(LameParameters lame, double density);

/// Fourth-order 2D stiffness tensor C_ijkl with indices in {0, 1}.
class ElasticTensor {
public:
    [[nodiscard]] Complex operator()(int i, int j, int k, int l) const { return c_[index(i, j, k, l)]; }
    Complex& operator()(int i, int j, int k, int l) { return c_[index(i, j, k, l)]; }

    /// 4x4 matrix D with D[(i,j),(k,l)] = C_ijkl acting on the displacement
    /// gradient (u_x,x, u_x,y, u_y,x, u_y,y). Used instead of a Voigt matrix
    /// because stretched tensors lose minor symmetry.
    [[nodiscard]] Eigen::Matrix4cd gradient_matrix() const;

private:
    static constexpr std::size_t index(int i, int j, int k, int l)
    {
        return static_cast<std::size_t>(((i * 2 + j) * 2 + k) * 2 + l);
    }
    std::array<Complex, 16> c_{};
};

/// rho((v_p^2 - 2 v_s^2) d_ij d_kl + v_s^2 (d_il d_jk + d_ik d_jl)).
/// Requires positive velocities and density with v_p^2 >= 2 v_s^2.
ElasticTensor isotropic_stiffness(double vp, double vs, double density);

/// Lumped nodal areas A_k = integral of the bilinear basis function of node k.
std::vector<double> lumped_node_areas(const Mesh& mesh);

/// Projects every node onto the admissible set: velocities above
/// min_velocity and v_s at most v_p / (sqrt(2) (1 + margin)).
ModelVector clamp_to_valid(const ModelVector& model, double min_velocity = 1.0, double margin = 1e-3);

}  // namespace tfwi
