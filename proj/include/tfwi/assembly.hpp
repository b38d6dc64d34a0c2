#pragma once

#include <memory>
#include <vector>

#include "tfwi/material.hpp"
#include "tfwi/mesh.hpp"
#include "tfwi/pml.hpp"
#include "tfwi/shape.hpp"
#include "tfwi/types.hpp"

namespace tfwi {

struct DiscretizationConfig {
    int degree = 3;
    /// Gauss points per axis in unstretched elements; 0 selects degree + 1.
    int quadrature_points = 0;
    /// Additional points per axis inside absorbing layers.
    int pml_extra_points = 2;

    [[nodiscard]] int interior_points() const { return quadrature_points > 0 ? quadrature_points : degree + 1; }
    [[nodiscard]] int pml_points() const { return interior_points() + pml_extra_points; }
    void validate() const;
    friend bool operator==(const DiscretizationConfig&, const DiscretizationConfig&) = default;
};

/// Global numbering of displacement coefficients: vertex modes first with x
/// and y interleaved, then edge modes (per mesh edge, by order), then
/// interior modes (per element).
class DofMap {
public:
    DofMap(const Mesh& mesh, int degree);

    [[nodiscard]] int degree() const { return basis_.degree(); }
    [[nodiscard]] const HierarchicalBasis& basis() const { return basis_; }
    [[nodiscard]] Eigen::Index size() const { return size_; }
    [[nodiscard]] int local_size() const { return 2 * basis_.mode_count(); }

    /// Global dof of local dof 2 * mode + component of an element.
    [[nodiscard]] const int* element_dofs(int element) const
    {
        return &element_dofs_[static_cast<std::size_t>(element) * static_cast<std::size_t>(local_size())];
    }
    [[nodiscard]] static int node_dof(int node, int component) { return 2 * node + component; }

private:
    HierarchicalBasis basis_;
    Eigen::Index size_ = 0;
    std::vector<int> element_dofs_;
};

/// Material and absorbing-layer settings shared by all assembled operators.
struct OperatorSettings {
    double density = 2500.0;
    PmlProfile pml;
    DiscretizationConfig discretization;
};

struct ElementMatrices {
    ComplexMatrix stiffness;  // + integral of grad(N)^T C~ grad(N)
    ComplexMatrix mass;       // integral of e_x e_y rho N^T N
};

/// Element matrices ordered by local dof 2 * mode + component.
ElementMatrices element_matrices(const Mesh& mesh, int element, const ModelVector& model, double omega,
                                 const OperatorSettings& settings);

/// L = K - omega^2 M together with its parts and the dof map.
struct AssembledSystem {
    SparseMatrix impedance;
    SparseMatrix stiffness;
    SparseMatrix mass;
    std::shared_ptr<const DofMap> dofs;
    double omega = 0.0;
};

AssembledSystem assemble_system(const Mesh& mesh, std::shared_ptr<const DofMap> dofs, const ModelVector& model,
                                double omega, const OperatorSettings& settings);

/// Only the impedance matrix; what the forward and adjoint solves need.
SparseMatrix assemble_impedance(const Mesh& mesh, const DofMap& dofs, const ModelVector& model, double omega,
                                const OperatorSettings& settings);

/// f N^T(s) d: the shape values at s scattered into the dofs of the containing
/// element along the unit direction d. Rejects sources in the void or in an
/// absorbing layer.
ComplexVector assemble_point_source(const Mesh& mesh, const DofMap& dofs, Point s, Vec2 direction, Complex amplitude);

/// Sparse row r with u(p) . d = r . u for every coefficient vector u.
struct PointFunctional {
    std::vector<int> dofs;
    std::vector<double> weights;

    [[nodiscard]] Complex apply(const ComplexVector& u) const;
    void scatter(Complex value, ComplexVector& target) const;
};

PointFunctional point_functional(const Mesh& mesh, const DofMap& dofs, Point p, Vec2 direction);

/// u^T (dL/dm_k) v for a single model coefficient k, computed element-wise
/// over the support of the k-th basis function.
Complex apply_dL_dm(const ComplexVector& u, const ComplexVector& v, const Mesh& mesh, const DofMap& dofs,
                    const ModelVector& model, double omega, const OperatorSettings& settings, std::size_t k);

/// u^T (dL/dm_k) v for every k at once (length 2 N_m, model order).
ComplexVector model_derivative_products(const ComplexVector& u, const ComplexVector& v, const Mesh& mesh,
                                        const DofMap& dofs, const ModelVector& model, double omega,
                                        const OperatorSettings& settings);

}  // namespace tfwi
