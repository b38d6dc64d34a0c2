#include <gtest/gtest.h>

#include <sstream>

#include "tfwi/error.hpp"
#include "tfwi/mesh.hpp"

using namespace tfwi;

namespace {

TunnelGeometry blind_test()
{
    TunnelGeometry g;
    g.domain_width = 100;
    g.depth_above_tunnel = 15;
    g.tunnel_height = 6;
    g.depth_below_tunnel = 15;
    g.tunnel_length = 20;
    g.pml_width = 3;
    g.element_size = 1;
    return g;
}

int count_region(const Mesh& mesh, Region r)
{
    int n = 0;
    for (const auto& e : mesh.elements()) {
        n += e.region == r ? 1 : 0;
    }
    return n;
}

}  // namespace

TEST(Mesh, BlindTestElementCount)
{
    const Mesh mesh = build_tunnel_mesh(blind_test());
    EXPECT_EQ(mesh.element_count(), 3996u);
}

TEST(Mesh, NodeCountExcludesVoidInterior)
{
    const Mesh mesh = build_tunnel_mesh(blind_test());
    // 107 x 40 grid nodes; the void hides 23 x 5 of them (x = -3..19, y = 16..20).
    EXPECT_EQ(mesh.node_count(), 107u * 40u - 23u * 5u);
    EXPECT_EQ(mesh.grid_nodes_x(), 107);
    EXPECT_EQ(mesh.grid_nodes_y(), 40);
    EXPECT_DOUBLE_EQ(mesh.total_area(), 3996.0);
}

TEST(Mesh, RegionsPartitionElements)
{
    const Mesh mesh = build_tunnel_mesh(blind_test());
    EXPECT_EQ(count_region(mesh, Region::interior), 100 * 36 - 20 * 6);
    EXPECT_EQ(count_region(mesh, Region::pml_corner), 2 * 9);
    EXPECT_EQ(count_region(mesh, Region::pml_x), 2 * 3 * 36 - 3 * 6);
    EXPECT_EQ(count_region(mesh, Region::pml_y), 100 * 3);
}

TEST(Mesh, FreeSurfaceEdges)
{
    const Mesh mesh = build_tunnel_mesh(blind_test());
    // Surface across the full grid width, tunnel roof and floor through the
    // left layer, and the face.
    EXPECT_EQ(mesh.free_surface_edges().size(), 106u + 23u + 23u + 6u);
    for (int id : mesh.free_surface_edges()) {
        const auto& edge = mesh.edges()[static_cast<std::size_t>(id)];
        const Point a = mesh.node(edge.nodes[0]);
        const Point b = mesh.node(edge.nodes[1]);
        const bool surface = a.y == 36 && b.y == 36;
        const bool roof_or_floor = (a.y == 21 && b.y == 21) || (a.y == 15 && b.y == 15);
        const bool face = a.x == 20 && b.x == 20 && a.y >= 15 && b.y <= 21;
        EXPECT_TRUE(surface || roof_or_floor || face) << a.x << "," << a.y;
    }
}

TEST(Mesh, OuterBoundaryTaggedAsLayer)
{
    const Mesh mesh = build_tunnel_mesh(blind_test());
    int outer = 0;
    for (const auto& e : mesh.edges()) {
        outer += e.tag == BoundaryTag::outer_pml ? 1 : 0;
    }
    // Bottom 106, right 39, left 39 minus the 6 edges of the tunnel mouth.
    EXPECT_EQ(outer, 106 + 39 + 33);
}

TEST(Mesh, EdgesOrientedAlongAxes)
{
    const Mesh mesh = build_tunnel_mesh(blind_test());
    for (const auto& e : mesh.elements()) {
        for (int k = 0; k < 4; ++k) {
            const auto& edge = mesh.edges()[static_cast<std::size_t>(e.edges[static_cast<std::size_t>(k)])];
            const Point a = mesh.node(edge.nodes[0]);
            const Point b = mesh.node(edge.nodes[1]);
            if (edge.horizontal) {
                ASSERT_LT(a.x, b.x);
            } else {
                ASSERT_LT(a.y, b.y);
            }
        }
    }
}

TEST(Mesh, FindAndPhysicalDomain)
{
    const Mesh mesh = build_tunnel_mesh(blind_test());
    EXPECT_FALSE(mesh.find({10, 18}).has_value());
    EXPECT_TRUE(mesh.find({10, 21}).has_value());
    EXPECT_FALSE(mesh.find({200, 5}).has_value());
    EXPECT_TRUE(mesh.in_physical_domain({50, 18}));
    EXPECT_TRUE(mesh.in_physical_domain({10, 21}));
    EXPECT_TRUE(mesh.in_physical_domain({20, 18}));
    EXPECT_FALSE(mesh.in_physical_domain({10, 18}));
    EXPECT_FALSE(mesh.in_physical_domain({-1, 5}));
    EXPECT_FALSE(mesh.in_physical_domain({50, -0.5}));
    EXPECT_THROW(locate_point(mesh, {10, 18}), Error);
}

TEST(Mesh, SharedEdgePicksLowestElement)
{
    const Mesh mesh = build_tunnel_mesh(blind_test());
    const auto loc = mesh.find({50, 10.5});
    ASSERT_TRUE(loc.has_value());
    const auto& e = mesh.element(loc->element);
    EXPECT_DOUBLE_EQ(e.upper.x, 50.0);
    EXPECT_DOUBLE_EQ(loc->local.x, 1.0);
    const Point back = mesh.to_global(loc->element, loc->local);
    EXPECT_DOUBLE_EQ(back.x, 50.0);
    EXPECT_DOUBLE_EQ(back.y, 10.5);
}

TEST(Mesh, LayerLocalCoordinates)
{
    const Mesh mesh = build_tunnel_mesh(blind_test());
    const auto left = locate_point(mesh, {-2.5, 5});
    EXPECT_EQ(mesh.element(left.element).region, Region::pml_x);
    EXPECT_DOUBLE_EQ(pml_local_coordinate(mesh, left.element, {-2.5, 5}).x, 2.5);

    const auto corner = locate_point(mesh, {102, -1});
    EXPECT_EQ(mesh.element(corner.element).region, Region::pml_corner);
    const auto c = pml_local_coordinate(mesh, corner.element, {102, -1});
    EXPECT_DOUBLE_EQ(c.x, 2.0);
    EXPECT_DOUBLE_EQ(c.y, 1.0);

    const auto inner = locate_point(mesh, {50, 5});
    EXPECT_THROW(pml_local_coordinate(mesh, inner.element, {50, 5}), Error);
}

TEST(Mesh, NoTunnelNoTopLayer)
{
    TunnelGeometry g;
    g.domain_width = 4;
    g.depth_above_tunnel = 3;
    g.element_size = 1;
    const Mesh mesh = build_tunnel_mesh(g);
    EXPECT_EQ(mesh.element_count(), 12u);
    EXPECT_EQ(mesh.node_count(), 20u);
    // Without a layer every boundary edge is a free surface.
    EXPECT_EQ(mesh.free_surface_edges().size(), 14u);
}

TEST(Mesh, TopLayerForUnboundedRuns)
{
    TunnelGeometry g;
    g.domain_width = 10;
    g.depth_above_tunnel = 6;
    g.pml_width = 2;
    g.pml_on_top = true;
    const Mesh mesh = build_tunnel_mesh(g);
    EXPECT_EQ(mesh.element_count(), 14u * 10u);
    EXPECT_TRUE(mesh.free_surface_edges().empty());
}

TEST(Mesh, RejectsInvalidGeometry)
{
    TunnelGeometry g = blind_test();
    g.element_size = 0.7;
    try {
        build_tunnel_mesh(g);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::validation_error);
        EXPECT_NE(std::string(e.what()).find("domain_width"), std::string::npos);
    }
    g = blind_test();
    g.pml_width = -1;
    EXPECT_THROW(build_tunnel_mesh(g), Error);
    g = blind_test();
    g.tunnel_length = 120;
    EXPECT_THROW(build_tunnel_mesh(g), Error);
}

TEST(Mesh, StationValidation)
{
    const Mesh mesh = build_tunnel_mesh(blind_test());
    StationLayout ok;
    ok.sources.push_back({{20, 18}, {1, 0}});
    ok.receivers.push_back({{8, 21}, {{1, 0}, {0, 1}}});
    EXPECT_NO_THROW(ok.validate(mesh));
    EXPECT_EQ(ok.directions_per_receiver(), 2u);

    StationLayout in_layer = ok;
    in_layer.receivers.push_back({{-1, 5}, {{1, 0}, {0, 1}}});
    EXPECT_THROW(in_layer.validate(mesh), Error);

    StationLayout in_void = ok;
    in_void.sources[0].position = {10, 18};
    EXPECT_THROW(in_void.validate(mesh), Error);

    StationLayout skew = ok;
    skew.sources[0].direction = {1, 1};
    EXPECT_THROW(skew.validate(mesh), Error);

    StationLayout ragged = ok;
    ragged.receivers.push_back({{30, 10}, {{1, 0}}});
    EXPECT_THROW(ragged.validate(mesh), Error);
}

TEST(Mesh, DumpListsTables)
{
    TunnelGeometry g;
    g.domain_width = 2;
    g.depth_above_tunnel = 1;
    const Mesh mesh = build_tunnel_mesh(g);
    std::ostringstream out;
    mesh.dump(out);
    EXPECT_NE(out.str().find("# nodes 6"), std::string::npos);
    EXPECT_NE(out.str().find("# elements 2"), std::string::npos);
    EXPECT_NE(out.str().find("# edges 7"), std::string::npos);
}
