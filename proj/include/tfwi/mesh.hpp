#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "tfwi/types.hpp"

namespace tfwi {

/// Extents of the 2D tunnel domain in metres.
///
/// The physical domain spans x in [0, domain_width] and y in [0, height()],
/// with the Earth's surface at y = height(). The tunnel is a rectangular void
/// with its face at x = tunnel_length, floor at y = depth_below_tunnel, and it
/// runs through the left absorbing layer to the outer boundary. A geometry
/// with tunnel_height == tunnel_length == 0 has no tunnel.
struct TunnelGeometry {
    double domain_width = 0.0;
    double depth_above_tunnel = 0.0;
    double tunnel_height = 0.0;
    double depth_below_tunnel = 0.0;
    double tunnel_length = 0.0;
    double pml_width = 0.0;
    double element_size = 1.0;
    /// Replaces the free Earth's surface by an absorbing layer (unbounded
    /// configurations used for calibration against the analytic solution).
    bool pml_on_top = false;

    [[nodiscard]] double height() const { return depth_above_tunnel + tunnel_height + depth_below_tunnel; }
    [[nodiscard]] bool has_tunnel() const { return tunnel_height > 0.0 || tunnel_length > 0.0; }

    /// Throws Error(validation_error) naming the offending field.
    void validate() const;

    friend bool operator==(const TunnelGeometry&, const TunnelGeometry&) = default;
};

enum class Region : std::uint8_t { interior, pml_x, pml_y, pml_corner };
enum class BoundaryTag : std::uint8_t { none, free_surface, outer_pml };

[[nodiscard]] inline bool stretches_x(Region r) { return r == Region::pml_x || r == Region::pml_corner; }
[[nodiscard]] inline bool stretches_y(Region r) { return r == Region::pml_y || r == Region::pml_corner; }

/// Local corner order: 0 = (-1,-1), 1 = (1,-1), 2 = (1,1), 3 = (-1,1).
/// Local edge order: 0 bottom (0-1), 1 right (1-2), 2 top (3-2), 3 left (0-3).
/// Horizontal edges run in +x and vertical edges in +y in every element.
struct Element {
    std::array<int, 4> nodes{};
    std::array<int, 4> edges{};
    Region region = Region::interior;
    /// Inner-edge reference coordinates of the absorbing layer this element
    /// belongs to; only meaningful along a stretched axis.
    double pml_x0 = 0.0;
    double pml_y0 = 0.0;
    Point lower{};
    Point upper{};
};

struct Edge {
    std::array<int, 2> nodes{};
    /// Adjacent elements; the second entry is -1 on the boundary of the grid
    /// or of the tunnel void.
    std::array<int, 2> elements{-1, -1};
    BoundaryTag tag = BoundaryTag::none;
    bool horizontal = true;
};

struct PointLocation {
    int element = -1;
    Vec2 local{};  // (xi, eta) in [-1, 1]^2
};

struct PmlLocalCoordinate {
    double x = 0.0;
    double y = 0.0;
};

/// Structured axis-aligned quadrilateral grid of the tunnel domain with the
/// absorbing collar. Immutable after construction.
class Mesh {
public:
    [[nodiscard]] const TunnelGeometry& geometry() const { return geometry_; }
    [[nodiscard]] double element_size() const { return geometry_.element_size; }

    [[nodiscard]] std::size_t node_count() const { return nodes_.size(); }
    [[nodiscard]] std::size_t element_count() const { return elements_.size(); }
    [[nodiscard]] std::size_t edge_count() const { return edges_.size(); }

    [[nodiscard]] const std::vector<Point>& nodes() const { return nodes_; }
    [[nodiscard]] const std::vector<Element>& elements() const { return elements_; }
    [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
    [[nodiscard]] const Point& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    [[nodiscard]] const Element& element(int id) const { return elements_.at(static_cast<std::size_t>(id)); }

    /// Grid nodes per axis (including nodes that are not used because they
    /// lie strictly inside the tunnel void) and the lower-left grid corner.
    [[nodiscard]] int grid_nodes_x() const { return cells_x_ + 1; }
    [[nodiscard]] int grid_nodes_y() const { return cells_y_ + 1; }
    [[nodiscard]] Point origin() const { return origin_; }

    [[nodiscard]] double element_area(int id) const;
    [[nodiscard]] double total_area() const;

    /// Maps local coordinates of an element to global coordinates.
    [[nodiscard]] Point to_global(int element, Vec2 local) const;

    /// Returns the containing element with the lowest id, or nullopt when the
    /// point lies in the void or outside the grid.
    [[nodiscard]] std::optional<PointLocation> find(Point p) const;

    /// Inside the physical domain (not in an absorbing layer, not in the void).
    [[nodiscard]] bool in_physical_domain(Point p) const;

    /// Boundary edges tagged as free surfaces (Earth's surface, tunnel walls).
    [[nodiscard]] std::vector<int> free_surface_edges() const;

    /// Plain-text debug dump: node table, element table, edge tags.
    void dump(std::ostream& out) const;

private:
    friend Mesh build_tunnel_mesh(const TunnelGeometry& geometry);

    TunnelGeometry geometry_;
    Point origin_{};
    int cells_x_ = 0;
    int cells_y_ = 0;
    std::vector<int> cell_to_element_;  // -1 for void cells
    std::vector<Point> nodes_;
    std::vector<Element> elements_;
    std::vector<Edge> edges_;
};

Mesh build_tunnel_mesh(const TunnelGeometry& geometry);

/// Throws Error(not_found) for points in the void or outside the grid.
PointLocation locate_point(const Mesh& mesh, Point p);

/// Distance of p from the inner edge of the absorbing layer, per stretched
/// axis (zero along an unstretched axis). Throws for interior elements.
PmlLocalCoordinate pml_local_coordinate(const Mesh& mesh, int element, Point p);

/// Source with an excitation direction (unit vector).
struct Source {
    Point position{};
    Vec2 direction{0.0, 1.0};
    friend bool operator==(const Source&, const Source&) = default;
};

/// Receiver recording the displacement projected on each listed direction.
struct Receiver {
    Point position{};
    std::vector<Vec2> directions{{1.0, 0.0}, {0.0, 1.0}};
    friend bool operator==(const Receiver&, const Receiver&) = default;
};

struct StationLayout {
    std::vector<Source> sources;
    std::vector<Receiver> receivers;

    /// All receivers must record the same number of directions.
    [[nodiscard]] std::size_t directions_per_receiver() const;

    /// Stations must lie in the physical domain or on a free surface, never
    /// inside an absorbing layer or the void; directions must be unit length.
    void validate(const Mesh& mesh) const;
    friend bool operator==(const StationLayout&, const StationLayout&) = default;
};

}  // namespace tfwi
