#include <gtest/gtest.h>

#include <cmath>

#include "tfwi/adjoint.hpp"
#include "tfwi/error.hpp"

using namespace tfwi;

namespace {

// 4 x 4 m box with a 1 m layer on all sides: 6 x 6 elements.
Mesh box()
{
    TunnelGeometry g;
    g.domain_width = 4;
    g.depth_above_tunnel = 4;
    g.pml_width = 1;
    g.pml_on_top = true;
    return build_tunnel_mesh(g);
}

OperatorSettings p2()
{
    OperatorSettings s;
    s.discretization.degree = 2;
    return s;
}

ModelVector perturbed(const Mesh& mesh, double scale)
{
    ModelVector m(mesh.node_count());
    for (std::size_t k = 0; k < mesh.node_count(); ++k) {
        const Point p = mesh.nodes()[k];
        m.vp()[k] = 4000 + scale * (60 * std::sin(p.x + 0.3) + 40 * p.y);
        m.vs()[k] = 2400 + scale * (50 * std::cos(0.7 * p.y) - 30 * p.x);
    }
    return m;
}

StationLayout stations()
{
    StationLayout l;
    l.sources.push_back({{0.5, 3.2}, {0.6, 0.8}});
    l.receivers.push_back({{3.5, 0.5}, {{1, 0}, {0, 1}}});
    l.receivers.push_back({{3.2, 3.7}, {{1, 0}, {0, 1}}});
    return l;
}

}  // namespace

TEST(Adjoint, MisfitSumsSquaredResiduals)
{
    RecordSet a({100, 200}, 2, 1, 2);
    RecordSet b({100, 200}, 2, 1, 2);
    a.at(0, 1, 0, 0) = Complex(3, 4);
    a.at(1, 0, 0, 1) = Complex(1, 0);
    b.at(1, 0, 0, 1) = Complex(0, 1);
    const Misfit m = misfit(a, b);
    EXPECT_DOUBLE_EQ(m.value, 25.0 + 2.0);
    EXPECT_DOUBLE_EQ(m.partial[1], 25.0);
    EXPECT_DOUBLE_EQ(m.partial[2], 2.0);
    EXPECT_THROW(misfit(a, RecordSet({100}, 2, 1, 2)), Error);
}

TEST(Adjoint, NormalizationAndMask)
{
    RealVector raw(4);
    raw << 2, 4, 6, 8;
    RealVector areas(2);
    areas << 0.5, 2;
    const RealVector v = normalize_gradient(raw, areas);
    EXPECT_DOUBLE_EQ(v[0], 4);
    EXPECT_DOUBLE_EQ(v[1], 2);
    EXPECT_DOUBLE_EQ(v[2], 12);
    EXPECT_DOUBLE_EQ(v[3], 4);
    Gradient g;
    g.values = v;
    const Gradient p = precondition(g, {{0.0, 0.5}});
    EXPECT_DOUBLE_EQ(p.values[0], 0);
    EXPECT_DOUBLE_EQ(p.values[1], 1);
    EXPECT_DOUBLE_EQ(p.values[2], 0);
    EXPECT_DOUBLE_EQ(p.values[3], 2);
    EXPECT_THROW(normalize_gradient(raw, RealVector(3)), Error);
}

TEST(Adjoint, SourceIsNegatedConjugateResidual)
{
    const PointFunctional a{{0, 2}, {0.25, 0.75}};
    const PointFunctional b{{2, 3}, {1.0, -1.0}};
    const ComplexVector rhs = adjoint_source({Complex(1, 2), Complex(0, -1)}, {a, b}, 5);
    EXPECT_EQ(rhs[0], -0.25 * Complex(1, -2));
    EXPECT_EQ(rhs[2], -0.75 * Complex(1, -2) - Complex(0, 1));
    EXPECT_EQ(rhs[3], Complex(0, 1));
    EXPECT_EQ(rhs[1], Complex(0, 0));
}

TEST(Adjoint, GradientMatchesCentralDifferences)
{
    const Mesh mesh = box();
    const ForwardModel forward(mesh, p2());
    const StationLayout layout = stations();
    const std::vector<double> omegas{3000, 5000};
    const RecordSet observed = simulate_records(forward, perturbed(mesh, 1.0), omegas, layout);
    const ModelVector m = perturbed(mesh, 0.0);
    const MisfitGradient mg = evaluate_misfit(forward, m, observed, layout, {}, true);
    ASSERT_GT(mg.misfit.value, 0.0);
    EXPECT_LT(mg.gradient.imaginary_ratio, 1.0);

    const double h = 1e-2;
    const double scale = mg.gradient.raw.cwiseAbs().maxCoeff();
    for (std::size_t k : {std::size_t{8}, std::size_t{24}, std::size_t{30}, m.node_count() + 16, m.node_count() + 40}) {
        ModelVector up = m;
        ModelVector dn = m;
        up.values()[k] += h;
        dn.values()[k] -= h;
        const double fd = (evaluate_misfit(forward, up, observed, layout, {}, false).misfit.value -
                           evaluate_misfit(forward, dn, observed, layout, {}, false).misfit.value) /
                          (2 * h);
        const double g = mg.gradient.raw[static_cast<Eigen::Index>(k)];
        EXPECT_LT(std::abs(g - fd), 1e-4 * std::max(std::abs(fd), 1e-3 * scale)) << k;
    }
}

TEST(Adjoint, AccumulateMatchesEvaluate)
{
    const Mesh mesh = box();
    const ForwardModel forward(mesh, p2());
    const StationLayout layout = stations();
    const RecordSet observed = simulate_records(forward, perturbed(mesh, 1.0), {4000}, layout);
    const ModelVector m = perturbed(mesh, 0.0);
    const MisfitGradient mg = evaluate_misfit(forward, m, observed, layout, {}, true);

    const Factorization f = forward.factorize(m, 4000);
    const auto u = forward_solve(forward, f, 4000, layout);
    std::vector<Complex> residuals = sample_receivers(forward, u[0], layout);
    for (std::size_t i = 0; i < residuals.size(); ++i) residuals[i] -= observed.values()[i];
    const ComplexVector adj = adjoint_field(f, adjoint_source(forward, residuals, layout));
    const Gradient g = accumulate_gradient(forward, m, {{4000, u[0].values, adj}});
    EXPECT_LT((g.raw - mg.gradient.raw).norm(), 1e-12 * g.raw.norm());
    EXPECT_LT((g.values - mg.gradient.values).norm(), 1e-12 * g.values.norm());
}

TEST(Adjoint, ZeroResidualZeroGradient)
{
    const Mesh mesh = box();
    const ForwardModel forward(mesh, p2());
    const StationLayout layout = stations();
    const ModelVector m = perturbed(mesh, 1.0);
    const RecordSet observed = simulate_records(forward, m, {3000}, layout);
    const MisfitGradient mg = evaluate_misfit(forward, m, observed, layout, {}, true);
    EXPECT_EQ(mg.misfit.value, 0.0);
    EXPECT_EQ(mg.gradient.raw.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Adjoint, EvaluationIsDeterministic)
{
    const Mesh mesh = box();
    const ForwardModel forward(mesh, p2());
    const StationLayout layout = stations();
    const RecordSet observed = simulate_records(forward, perturbed(mesh, 1.0), {2000, 3000, 4000}, layout);
    const ModelVector m = perturbed(mesh, 0.0);
    const auto a = evaluate_misfit(forward, m, observed, layout, {}, true);
    const auto b = evaluate_misfit(forward, m, observed, layout, {}, true);
    EXPECT_EQ(a.misfit.value, b.misfit.value);
    EXPECT_TRUE(a.gradient.raw == b.gradient.raw);
}

TEST(Adjoint, SegmentDistance)
{
    EXPECT_DOUBLE_EQ(segment_distance({1, 1}, {0, 0}, {2, 0}), 1.0);
    EXPECT_DOUBLE_EQ(segment_distance({5, 4}, {0, 0}, {2, 0}), 5.0);
    EXPECT_DOUBLE_EQ(segment_distance({-3, 0}, {0, 0}, {0, 0}), 3.0);
}

TEST(Adjoint, MaskAroundStations)
{
    TunnelGeometry g;
    g.domain_width = 20;
    g.depth_above_tunnel = 10;
    g.pml_width = 2;
    g.pml_on_top = true;
    const Mesh mesh = build_tunnel_mesh(g);
    StationLayout l;
    l.sources.push_back({{10, 5}, {1, 0}});
    const PreconditionMask mask = build_mask(l, mesh, {});
    for (std::size_t n = 0; n < mesh.node_count(); ++n) {
        const Point p = mesh.nodes()[n];
        const double d = (p - Point{10, 5}).norm();
        double expected = std::clamp((d - 2.5) / 2.5, 0.0, 1.0);
        if (p.x < 0 || p.x > 20 || p.y < 0 || p.y > 10) expected = 0.0;
        EXPECT_NEAR(mask.factors[n], expected, 1e-12) << p.x << "," << p.y;
    }
}

TEST(Adjoint, MaskNearFreeSurfaces)
{
    TunnelGeometry g;
    g.domain_width = 20;
    g.depth_above_tunnel = 4;
    g.tunnel_height = 2;
    g.depth_below_tunnel = 4;
    g.tunnel_length = 6;
    g.pml_width = 2;
    const Mesh mesh = build_tunnel_mesh(g);
    const PreconditionMask mask = build_mask({}, mesh, {});
    const auto at = [&](Point p) {
        for (std::size_t n = 0; n < mesh.node_count(); ++n)
            if ((mesh.nodes()[n] - p).norm() < 1e-12) return mask.factors[n];
        return -1.0;
    };
    EXPECT_DOUBLE_EQ(at({15, 10}), 0.0);          // on the surface
    EXPECT_NEAR(at({15, 7}), (3 - 1.75) / 1.75, 1e-12);
    EXPECT_DOUBLE_EQ(at({15, 5}), 1.0);
    EXPECT_DOUBLE_EQ(at({3, 4}), 0.0);            // tunnel floor
    EXPECT_NEAR(at({8, 5}), (2 - 1.75) / 1.75, 1e-12);  // ahead of the face
    EXPECT_DOUBLE_EQ(at({-1, 1}), 0.0);           // absorbing layer

    MaskSettings bad;
    bad.station_radius = -1;
    EXPECT_THROW(build_mask({}, mesh, bad), Error);
}
