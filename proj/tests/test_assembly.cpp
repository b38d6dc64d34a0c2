#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "tfwi/assembly.hpp"
#include "tfwi/error.hpp"
#include "tfwi/mesh.hpp"
#include "tfwi/pml.hpp"
#include "tfwi/shape.hpp"

using namespace tfwi;

namespace {

Mesh layered_mesh()
{
    TunnelGeometry g;
    g.domain_width = 4;
    g.depth_above_tunnel = 3;
    g.pml_width = 2;
    g.element_size = 1;
    g.pml_on_top = true;
    return build_tunnel_mesh(g);
}

OperatorSettings settings_for(int degree, double width = 2.0)
{
    OperatorSettings s;
    s.discretization.degree = degree;
    s.pml.width = width;
    return s;
}

ModelVector varying_model(const Mesh& mesh)
{
    ModelVector m(mesh.node_count());
    for (std::size_t k = 0; k < mesh.node_count(); ++k) {
        const Point p = mesh.nodes()[k];
        m.vp()[k] = 4000 + 40 * p.x - 25 * p.y;
        m.vs()[k] = 2400 - 15 * p.x + 20 * p.y;
    }
    return m;
}

int element_at(const Mesh& mesh, Point p) { return locate_point(mesh, p).element; }

// Independent element stiffness: Gauss quadrature of the stretched tensor in
// index form. In d_i v_j C~_ijkl d_k u_l, i and k are derivative indices.
ComplexMatrix reference_stiffness(const Mesh& mesh, int element, const ModelVector& model, double omega,
                                  const OperatorSettings& s, int points)
{
    const Element& e = mesh.element(element);
    const double h = e.upper.x - e.lower.x;
    const int modes = (s.discretization.degree + 1) * (s.discretization.degree + 1);
    ComplexMatrix k = ComplexMatrix::Zero(2 * modes, 2 * modes);
    const QuadratureRule rule = gauss_legendre(points);
    for (int qi = 0; qi < points; ++qi) {
        for (int qj = 0; qj < points; ++qj) {
            const Vec2 xi{rule.points[static_cast<std::size_t>(qi)], rule.points[static_cast<std::size_t>(qj)]};
            const double w = rule.weights[static_cast<std::size_t>(qi)] * rule.weights[static_cast<std::size_t>(qj)] *
                             h * h / 4;
            const Point x = mesh.to_global(element, xi);
            const Velocities v = evaluate_velocities(model, mesh, element, xi);
            Complex ex = 1.0;
            Complex ey = 1.0;
            if (e.region != Region::interior) {
                const auto local = pml_local_coordinate(mesh, element, x);
                if (stretches_x(e.region)) ex = stretching(local.x, omega, s.pml);
                if (stretches_y(e.region)) ey = stretching(local.y, omega, s.pml);
            }
            const ElasticTensor c = stretched_stiffness(isotropic_stiffness(v.vp, v.vs, s.density), ex, ey);
            const ShapeValues sv = shape_functions(s.discretization.degree, xi);
            for (int a = 0; a < modes; ++a) {
                const double ga[2] = {sv.gradients[static_cast<std::size_t>(a)][0] * 2 / h,
                                      sv.gradients[static_cast<std::size_t>(a)][1] * 2 / h};
                for (int b = 0; b < modes; ++b) {
                    const double gb[2] = {sv.gradients[static_cast<std::size_t>(b)][0] * 2 / h,
                                          sv.gradients[static_cast<std::size_t>(b)][1] * 2 / h};
                    for (int j = 0; j < 2; ++j)
                        for (int l = 0; l < 2; ++l) {
                            Complex sum = 0.0;
                            for (int i = 0; i < 2; ++i)
                                for (int kk = 0; kk < 2; ++kk) sum += ga[i] * c(i, j, kk, l) * gb[kk];
                            k(2 * a + j, 2 * b + l) += w * sum;
                        }
                }
            }
        }
    }
    return k;
}

// Coefficients of a displacement field that is bilinear in x and y: only the
// vertex modes are non-zero.
ComplexVector nodal_field(const Mesh& mesh, const DofMap& dofs, const std::function<Vec2(Point)>& u)
{
    ComplexVector c = ComplexVector::Zero(dofs.size());
    for (std::size_t n = 0; n < mesh.node_count(); ++n) {
        const Vec2 v = u(mesh.nodes()[n]);
        c[DofMap::node_dof(static_cast<int>(n), 0)] = v.x;
        c[DofMap::node_dof(static_cast<int>(n), 1)] = v.y;
    }
    return c;
}

}  // namespace

TEST(Assembly, DofCount)
{
    const Mesh mesh = layered_mesh();
    for (int p = 1; p <= 3; ++p) {
        const DofMap dofs(mesh, p);
        const auto expected = 2 * mesh.node_count() + 2 * (p - 1) * mesh.edge_count() +
                              2 * (p - 1) * (p - 1) * mesh.element_count();
        EXPECT_EQ(static_cast<std::size_t>(dofs.size()), expected);
        EXPECT_EQ(dofs.local_size(), 2 * (p + 1) * (p + 1));
    }
}

TEST(Assembly, SharedEdgeDofsAgree)
{
    const Mesh mesh = layered_mesh();
    const DofMap dofs(mesh, 3);
    const HierarchicalBasis& basis = dofs.basis();
    // Right edge of one element is the left edge of its neighbour.
    const int a = element_at(mesh, {1.5, 1.5});
    const int b = element_at(mesh, {2.5, 1.5});
    for (int order = 2; order <= 3; ++order) {
        const int ma = basis.index_of({ModeKind::edge, 1, 1, order});
        const int mb = basis.index_of({ModeKind::edge, 3, 1, order});
        for (int c = 0; c < 2; ++c) {
            EXPECT_EQ(dofs.element_dofs(a)[2 * ma + c], dofs.element_dofs(b)[2 * mb + c]);
        }
    }
}

TEST(Assembly, InteriorElementMatchesReference)
{
    const Mesh mesh = layered_mesh();
    const ModelVector m = varying_model(mesh);
    const OperatorSettings s = settings_for(3);
    const int e = element_at(mesh, {1.5, 1.5});
    const auto em = element_matrices(mesh, e, m, 3000.0, s);
    const ComplexMatrix ref = reference_stiffness(mesh, e, m, 3000.0, s, 4);
    EXPECT_LT((em.stiffness - ref).norm() / ref.norm(), 1e-12);
}

TEST(Assembly, LayerElementsMatchReference)
{
    const Mesh mesh = layered_mesh();
    const ModelVector m = varying_model(mesh);
    const OperatorSettings s = settings_for(3);
    for (const Point p : {Point{-0.5, 1.5}, Point{1.5, -1.5}, Point{5.5, 4.5}, Point{-1.5, 3.5}}) {
        const int e = element_at(mesh, p);
        ASSERT_NE(mesh.element(e).region, Region::interior);
        const auto em = element_matrices(mesh, e, m, 3000.0, s);
        const ComplexMatrix ref = reference_stiffness(mesh, e, m, 3000.0, s, s.discretization.pml_points());
        EXPECT_LT((em.stiffness - ref).norm() / ref.norm(), 1e-12) << p.x << "," << p.y;
        // Complex symmetric, not Hermitian.
        EXPECT_LT((em.stiffness - em.stiffness.transpose()).norm() / ref.norm(), 1e-12);
        EXPECT_GT(em.stiffness.imag().norm(), 1e-3 * ref.norm());
    }
}

TEST(Assembly, RigidMotionsHaveNoStrainEnergy)
{
    const Mesh mesh = layered_mesh();
    const ModelVector m = varying_model(mesh);
    const int e = element_at(mesh, {2.5, 0.5});
    const auto em = element_matrices(mesh, e, m, 3000.0, settings_for(2));
    const int modes = 9;
    const Element& el = mesh.element(e);
    for (int motion = 0; motion < 3; ++motion) {
        ComplexVector u = ComplexVector::Zero(2 * modes);
        for (int v = 0; v < 4; ++v) {
            const Point x = mesh.node(el.nodes[static_cast<std::size_t>(v)]);
            const Vec2 d = motion == 0 ? Vec2{1, 0} : motion == 1 ? Vec2{0, 1} : Vec2{-x.y, x.x};
            u[2 * v] = d.x;
            u[2 * v + 1] = d.y;
        }
        EXPECT_LT((em.stiffness * u).norm(), 1e-6 * em.stiffness.norm());
    }
}

TEST(Assembly, MassOfInteriorElement)
{
    const Mesh mesh = layered_mesh();
    const ModelVector m = ModelVector::homogeneous(mesh.node_count(), 4000, 2400);
    const int e = element_at(mesh, {0.5, 0.5});
    const auto em = element_matrices(mesh, e, m, 3000.0, settings_for(3));
    ComplexVector u = ComplexVector::Zero(em.mass.rows());
    for (int v = 0; v < 4; ++v) u[2 * v] = 1.0;
    EXPECT_NEAR((u.transpose() * em.mass * u)(0, 0).real(), 2500.0, 1e-9);
}

TEST(Assembly, ImpedanceIsStiffnessMinusMass)
{
    const Mesh mesh = layered_mesh();
    const ModelVector m = varying_model(mesh);
    const OperatorSettings s = settings_for(2);
    auto dofs = std::make_shared<const DofMap>(mesh, 2);
    const double omega = 2500.0;
    const AssembledSystem sys = assemble_system(mesh, dofs, m, omega, s);
    const SparseMatrix diff = sys.impedance - (sys.stiffness - omega * omega * sys.mass);
    EXPECT_LT(diff.norm(), 1e-9 * sys.impedance.norm());
    const SparseMatrix l = assemble_impedance(mesh, *dofs, m, omega, s);
    EXPECT_LT(SparseMatrix(l - sys.impedance).norm(), 1e-12 * l.norm());
    const SparseMatrix asym = sys.impedance - SparseMatrix(sys.impedance.transpose());
    EXPECT_LT(asym.norm(), 1e-12 * l.norm());
}

TEST(Assembly, GlobalRigidTranslationWithoutLayer)
{
    TunnelGeometry g;
    g.domain_width = 3;
    g.depth_above_tunnel = 2;
    const Mesh mesh = build_tunnel_mesh(g);
    OperatorSettings s = settings_for(3);
    auto dofs = std::make_shared<const DofMap>(mesh, 3);
    const AssembledSystem sys =
        assemble_system(mesh, dofs, ModelVector::homogeneous(mesh.node_count(), 4000, 2400), 1000.0, s);
    const ComplexVector u = nodal_field(mesh, *dofs, [](Point p) { return Vec2{0.3 - 0.1 * p.y, 0.7 + 0.1 * p.x}; });
    EXPECT_LT((sys.stiffness * u).norm(), 1e-6 * sys.stiffness.norm());
}

TEST(Assembly, PointFunctionalReproducesBilinearFields)
{
    const Mesh mesh = layered_mesh();
    const DofMap dofs(mesh, 3);
    const auto field = [](Point p) { return Vec2{1 + 2 * p.x - p.y + 0.5 * p.x * p.y, -3 + p.x + 4 * p.y}; };
    const ComplexVector u = nodal_field(mesh, dofs, field);
    for (const Point p : {Point{0.25, 0.75}, Point{2.0, 1.3}, Point{3.9, 2.1}, Point{-1.2, 4.7}}) {
        const Vec2 v = field(p);
        EXPECT_NEAR(point_functional(mesh, dofs, p, {1, 0}).apply(u).real(), v.x, 1e-12);
        EXPECT_NEAR(point_functional(mesh, dofs, p, {0, 1}).apply(u).real(), v.y, 1e-12);
        const Vec2 d{0.6, 0.8};
        EXPECT_NEAR(point_functional(mesh, dofs, p, d).apply(u).real(), 0.6 * v.x + 0.8 * v.y, 1e-12);
    }
    const PointFunctional at_node = point_functional(mesh, dofs, {1, 1}, {0, 1});
    double sum = 0.0;
    for (double w : at_node.weights) sum += std::abs(w);
    EXPECT_NEAR(sum, 1.0, 1e-14);
}

TEST(Assembly, PointSourceIsAdjointOfFunctional)
{
    const Mesh mesh = layered_mesh();
    const DofMap dofs(mesh, 3);
    const Point s{1.3, 2.6};
    const Vec2 d{0.6, -0.8};
    const ComplexVector f = assemble_point_source(mesh, dofs, s, d, Complex(2.0, -1.0));
    const PointFunctional r = point_functional(mesh, dofs, s, d);
    ComplexVector g = ComplexVector::Zero(dofs.size());
    r.scatter(Complex(2.0, -1.0), g);
    EXPECT_LT((f - g).norm(), 1e-14);
    EXPECT_THROW(assemble_point_source(mesh, dofs, {-1.0, 1.0}, d, 1.0), Error);
}

TEST(Assembly, DerivativeProductsMatchFiniteDifferences)
{
    const Mesh mesh = layered_mesh();
    const ModelVector m = varying_model(mesh);
    const OperatorSettings s = settings_for(2);
    const DofMap dofs(mesh, 2);
    const double omega = 2000.0;
    ComplexVector u(dofs.size());
    ComplexVector v(dofs.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        u[i] = Complex(std::sin(0.37 * i), std::cos(0.11 * i));
        v[i] = Complex(std::cos(0.23 * i), std::sin(0.71 * i + 1));
    }
    const ComplexVector all = model_derivative_products(u, v, mesh, dofs, m, omega, s);
    ASSERT_EQ(static_cast<std::size_t>(all.size()), m.size());
    const double step = 1e-2;
    for (std::size_t k : {std::size_t{0}, std::size_t{7}, std::size_t{12}, m.node_count() + 3, m.size() - 1}) {
        ModelVector up = m;
        ModelVector dn = m;
        up.values()[k] += step;
        dn.values()[k] -= step;
        const SparseMatrix dl = (assemble_impedance(mesh, dofs, up, omega, s) -
                                 assemble_impedance(mesh, dofs, dn, omega, s)) / (2 * step);
        const Complex fd = u.transpose() * (dl * v);
        const Complex single = apply_dL_dm(u, v, mesh, dofs, m, omega, s, k);
        EXPECT_LT(std::abs(single - fd), 1e-6 * std::abs(fd)) << k;
        EXPECT_LT(std::abs(all[static_cast<Eigen::Index>(k)] - single), 1e-10 * std::abs(single)) << k;
    }
}

TEST(Assembly, InputChecks)
{
    const Mesh mesh = layered_mesh();
    const DofMap dofs(mesh, 2);
    const OperatorSettings s = settings_for(2);
    EXPECT_THROW(assemble_impedance(mesh, dofs, ModelVector::homogeneous(3, 4000, 2400), 1000.0, s), Error);
    EXPECT_THROW(assemble_impedance(mesh, dofs, varying_model(mesh), 0.0, s), Error);
    ModelVector bad = varying_model(mesh);
    bad.vs()[5] = 3500;
    EXPECT_THROW(assemble_impedance(mesh, dofs, bad, 1000.0, s), Error);
    DiscretizationConfig d;
    d.degree = 4;
    EXPECT_THROW(d.validate(), Error);
}
