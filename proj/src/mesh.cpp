#include "tfwi/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "tfwi/error.hpp"

namespace tfwi {

namespace {

constexpr double relative_tolerance = 1e-9;

int conforming_cells(double extent, double h, const char* name)
{
    const double ratio = extent / h;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > relative_tolerance * std::max(1.0, ratio)) {
        std::ostringstream msg;
        msg << "geometry." << name << " = " << extent << " is not a multiple of element_size = " << h;
        throw Error(ErrorCode::validation_error, msg.str());
    }
    return static_cast<int>(rounded);
}

void require(bool condition, const char* field, const char* what)
{
    if (!condition) {
        throw Error(ErrorCode::validation_error, std::string("geometry.") + field + " " + what);
    }
}

}  // namespace

void TunnelGeometry::validate() const
{
    require(std::isfinite(element_size) && element_size > 0.0, "element_size", "must be positive");
    require(std::isfinite(domain_width) && domain_width > 0.0, "domain_width", "must be positive");
    require(std::isfinite(pml_width) && pml_width >= 0.0, "pml_width", "must be non-negative");
    require(depth_above_tunnel >= 0.0, "depth_above_tunnel", "must be non-negative");
    require(depth_below_tunnel >= 0.0, "depth_below_tunnel", "must be non-negative");
    require(tunnel_height >= 0.0, "tunnel_height", "must be non-negative");
    require(tunnel_length >= 0.0, "tunnel_length", "must be non-negative");
    require(height() > 0.0, "depth_above_tunnel", "plus depth_below_tunnel must be positive");
    if (has_tunnel()) {
        require(tunnel_height > 0.0, "tunnel_height", "must be positive when a tunnel is present");
        require(tunnel_length > 0.0, "tunnel_length", "must be positive when a tunnel is present");
        require(depth_above_tunnel > 0.0, "depth_above_tunnel", "must be positive when a tunnel is present");
        require(depth_below_tunnel > 0.0, "depth_below_tunnel", "must be positive when a tunnel is present");
        require(tunnel_length < domain_width, "tunnel_length", "must be smaller than domain_width");
    }
    conforming_cells(domain_width, element_size, "domain_width");
    conforming_cells(depth_above_tunnel, element_size, "depth_above_tunnel");
    conforming_cells(tunnel_height, element_size, "tunnel_height");
    conforming_cells(depth_below_tunnel, element_size, "depth_below_tunnel");
    conforming_cells(tunnel_length, element_size, "tunnel_length");
    conforming_cells(pml_width, element_size, "pml_width");
}

Mesh build_tunnel_mesh(const TunnelGeometry& geometry)
{
    geometry.validate();

    const double h = geometry.element_size;
    const double width = geometry.domain_width;
    const double height = geometry.height();
    const double pml = geometry.pml_width;
    const int pml_cells = static_cast<int>(std::round(pml / h));
    const int top_pml_cells = geometry.pml_on_top ? pml_cells : 0;

    Mesh mesh;
    mesh.geometry_ = geometry;
    mesh.origin_ = {-pml, -pml};
    mesh.cells_x_ = static_cast<int>(std::round(width / h)) + 2 * pml_cells;
    mesh.cells_y_ = static_cast<int>(std::round(height / h)) + pml_cells + top_pml_cells;

    const int nx = mesh.cells_x_;
    const int ny = mesh.cells_y_;
    auto grid_x = [&](int i) { return mesh.origin_.x + i * h; };
    auto grid_y = [&](int j) { return mesh.origin_.y + j * h; };

    const double void_top = geometry.depth_below_tunnel + geometry.tunnel_height;
    auto is_void = [&](int i, int j) {
        if (!geometry.has_tunnel()) {
            return false;
        }
        const double xc = grid_x(i) + 0.5 * h;
        const double yc = grid_y(j) + 0.5 * h;
        return xc < geometry.tunnel_length && yc > geometry.depth_below_tunnel && yc < void_top;
    };

    mesh.cell_to_element_.assign(static_cast<std::size_t>(nx) * ny, -1);
    std::vector<char> node_used(static_cast<std::size_t>(nx + 1) * (ny + 1), 0);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (is_void(i, j)) {
                continue;
            }
            mesh.cell_to_element_[static_cast<std::size_t>(j) * nx + i] = 0;
            for (int dj = 0; dj < 2; ++dj) {
                for (int di = 0; di < 2; ++di) {
                    node_used[static_cast<std::size_t>(j + dj) * (nx + 1) + i + di] = 1;
                }
            }
        }
    }

    std::vector<int> grid_to_node(node_used.size(), -1);
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            const auto g = static_cast<std::size_t>(j) * (nx + 1) + i;
            if (node_used[g]) {
                grid_to_node[g] = static_cast<int>(mesh.nodes_.size());
                mesh.nodes_.push_back({grid_x(i), grid_y(j)});
            }
        }
    }
    auto node_at = [&](int i, int j) { return grid_to_node[static_cast<std::size_t>(j) * (nx + 1) + i]; };

    // Edge keys: horizontal edges first, then vertical edges.
    const std::size_t horizontal_count = static_cast<std::size_t>(nx) * (ny + 1);
    std::vector<int> key_to_edge(horizontal_count + static_cast<std::size_t>(nx + 1) * ny, -1);
    auto edge_for = [&](std::size_t key, int a, int b, bool horizontal, int element) {
        int& id = key_to_edge[key];
        if (id < 0) {
            id = static_cast<int>(mesh.edges_.size());
            Edge edge;
            edge.nodes = {a, b};
            edge.horizontal = horizontal;
            edge.elements[0] = element;
            mesh.edges_.push_back(edge);
        } else {
            mesh.edges_[static_cast<std::size_t>(id)].elements[1] = element;
        }
        return id;
    };

    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            int& slot = mesh.cell_to_element_[static_cast<std::size_t>(j) * nx + i];
            if (slot < 0) {
                continue;
            }
            const int id = static_cast<int>(mesh.elements_.size());
            slot = id;

            Element e;
            e.nodes = {node_at(i, j), node_at(i + 1, j), node_at(i + 1, j + 1), node_at(i, j + 1)};
            e.lower = {grid_x(i), grid_y(j)};
            e.upper = {grid_x(i + 1), grid_y(j + 1)};
            const double xc = grid_x(i) + 0.5 * h;
            const double yc = grid_y(j) + 0.5 * h;
            const bool px = xc < 0.0 || xc > width;
            const bool py = yc < 0.0 || yc > height;
            e.region = px && py ? Region::pml_corner : px ? Region::pml_x : py ? Region::pml_y : Region::interior;
            e.pml_x0 = xc < 0.0 ? 0.0 : width;
            e.pml_y0 = yc < 0.0 ? 0.0 : height;

            const auto hkey = [&](int ii, int jj) { return static_cast<std::size_t>(jj) * nx + ii; };
            const auto vkey = [&](int ii, int jj) {
                return horizontal_count + static_cast<std::size_t>(jj) * (nx + 1) + ii;
            };
            e.edges[0] = edge_for(hkey(i, j), e.nodes[0], e.nodes[1], true, id);
            e.edges[1] = edge_for(vkey(i + 1, j), e.nodes[1], e.nodes[2], false, id);
            e.edges[2] = edge_for(hkey(i, j + 1), e.nodes[3], e.nodes[2], true, id);
            e.edges[3] = edge_for(vkey(i, j), e.nodes[0], e.nodes[3], false, id);
            mesh.elements_.push_back(e);
        }
    }

    const double x_min = mesh.origin_.x;
    const double x_max = grid_x(nx);
    const double y_min = mesh.origin_.y;
    const double y_max = grid_y(ny);
    const double tol = relative_tolerance * h;
    for (auto& edge : mesh.edges_) {
        if (edge.elements[1] >= 0) {
            continue;
        }
        const Point a = mesh.nodes_[static_cast<std::size_t>(edge.nodes[0])];
        const bool on_top = edge.horizontal && std::abs(a.y - y_max) < tol;
        const bool on_outer = on_top || (edge.horizontal && std::abs(a.y - y_min) < tol) ||
                              (!edge.horizontal && (std::abs(a.x - x_min) < tol || std::abs(a.x - x_max) < tol));
        if (on_top && !geometry.pml_on_top) {
            edge.tag = BoundaryTag::free_surface;
        } else if (on_outer) {
            edge.tag = pml > 0.0 ? BoundaryTag::outer_pml : BoundaryTag::free_surface;
        } else {
            edge.tag = BoundaryTag::free_surface;  // tunnel wall, ceiling, floor or face
        }
    }
    return mesh;
}

double Mesh::element_area(int id) const
{
    const auto& e = element(id);
    return (e.upper.x - e.lower.x) * (e.upper.y - e.lower.y);
}

double Mesh::total_area() const
{
    double sum = 0.0;
    for (int e = 0; e < static_cast<int>(elements_.size()); ++e) {
        sum += element_area(e);
    }
    return sum;
}

Point Mesh::to_global(int element_id, Vec2 local) const
{
    const auto& e = element(element_id);
    return {0.5 * (e.lower.x + e.upper.x) + 0.5 * (e.upper.x - e.lower.x) * local.x,
            0.5 * (e.lower.y + e.upper.y) + 0.5 * (e.upper.y - e.lower.y) * local.y};
}

std::optional<PointLocation> Mesh::find(Point p) const
{
    const double h = geometry_.element_size;
    const double tx = (p.x - origin_.x) / h;
    const double ty = (p.y - origin_.y) / h;
    if (!std::isfinite(tx) || !std::isfinite(ty)) {
        return std::nullopt;
    }

    std::optional<PointLocation> best;
    const auto candidates = [](double t) {
        return std::array<int, 2>{static_cast<int>(std::floor(t - relative_tolerance)),
                                  static_cast<int>(std::floor(t + relative_tolerance))};
    };
    for (int j : candidates(ty)) {
        for (int i : candidates(tx)) {
            if (i < 0 || j < 0 || i >= cells_x_ || j >= cells_y_) {
                continue;
            }
            const int id = cell_to_element_[static_cast<std::size_t>(j) * cells_x_ + i];
            if (id < 0 || (best && best->element <= id)) {
                continue;
            }
            const auto& e = elements_[static_cast<std::size_t>(id)];
            Vec2 local{(2.0 * p.x - (e.lower.x + e.upper.x)) / (e.upper.x - e.lower.x),
                       (2.0 * p.y - (e.lower.y + e.upper.y)) / (e.upper.y - e.lower.y)};
            const double slack = 1.0 + 2.0 * relative_tolerance;
            if (std::abs(local.x) > slack || std::abs(local.y) > slack) {
                continue;
            }
            local.x = std::clamp(local.x, -1.0, 1.0);
            local.y = std::clamp(local.y, -1.0, 1.0);
            best = PointLocation{id, local};
        }
    }
    return best;
}

bool Mesh::in_physical_domain(Point p) const
{
    const double tol = relative_tolerance * geometry_.element_size;
    if (p.x < -tol || p.x > geometry_.domain_width + tol || p.y < -tol || p.y > geometry_.height() + tol) {
        return false;
    }
    return find(p).has_value();
}

std::vector<int> Mesh::free_surface_edges() const
{
    std::vector<int> ids;
    for (int i = 0; i < static_cast<int>(edges_.size()); ++i) {
        if (edges_[static_cast<std::size_t>(i)].tag == BoundaryTag::free_surface) {
            ids.push_back(i);
        }
    }
    return ids;
}

void Mesh::dump(std::ostream& out) const
{
    static constexpr const char* region_names[] = {"interior", "pml-x", "pml-y", "pml-corner"};
    static constexpr const char* tag_names[] = {"none", "free-surface", "outer-pml"};
    out.precision(17);
    out << "# nodes " << nodes_.size() << "\n";
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        out << i << ' ' << nodes_[i].x << ' ' << nodes_[i].y << '\n';
    }
    out << "# elements " << elements_.size() << "\n";
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        const auto& e = elements_[i];
        out << i << ' ' << e.nodes[0] << ' ' << e.nodes[1] << ' ' << e.nodes[2] << ' ' << e.nodes[3] << ' '
            << region_names[static_cast<int>(e.region)] << '\n';
    }
    out << "# edges " << edges_.size() << "\n";
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const auto& e = edges_[i];
        out << i << ' ' << e.nodes[0] << ' ' << e.nodes[1] << ' ' << e.elements[0] << ' ' << e.elements[1] << ' '
            << tag_names[static_cast<int>(e.tag)] << '\n';
    }
}

PointLocation locate_point(const Mesh& mesh, Point p)
{
    if (auto loc = mesh.find(p)) {
        return *loc;
    }
    std::ostringstream msg;
    msg << "point (" << p.x << ", " << p.y << ") is not inside any element";
    throw Error(ErrorCode::not_found, msg.str());
}

PmlLocalCoordinate pml_local_coordinate(const Mesh& mesh, int element, Point p)
{
    if (element < 0 || element >= static_cast<int>(mesh.element_count())) {
        throw Error(ErrorCode::out_of_range, "element id out of range");
    }
    const auto& e = mesh.element(element);
    if (e.region == Region::interior) {
        throw Error(ErrorCode::invalid_argument, "element " + std::to_string(element) + " is not in an absorbing layer");
    }
    const double width = mesh.geometry().pml_width;
    PmlLocalCoordinate local;
    if (stretches_x(e.region)) {
        local.x = std::min(std::abs(p.x - e.pml_x0), width);
    }
    if (stretches_y(e.region)) {
        local.y = std::min(std::abs(p.y - e.pml_y0), width);
    }
    return local;
}

std::size_t StationLayout::directions_per_receiver() const
{
    if (receivers.empty()) {
        return 0;
    }
    const std::size_t n = receivers.front().directions.size();
    for (const auto& r : receivers) {
        if (r.directions.size() != n) {
            throw Error(ErrorCode::validation_error, "all receivers must record the same number of directions");
        }
    }
    return n;
}

void StationLayout::validate(const Mesh& mesh) const
{
    const auto check_unit = [](Vec2 d, const std::string& what) {
        if (std::abs(d.norm() - 1.0) > 1e-9) {
            throw Error(ErrorCode::validation_error, what + " direction must be a unit vector");
        }
    };
    const auto check_position = [&](Point p, const std::string& what) {
        if (!mesh.in_physical_domain(p)) {
            std::ostringstream msg;
            msg << what << " at (" << p.x << ", " << p.y << ") lies outside the physical domain";
            throw Error(ErrorCode::validation_error, msg.str());
        }
    };
    for (std::size_t i = 0; i < sources.size(); ++i) {
        const auto what = "source " + std::to_string(i);
        check_position(sources[i].position, what);
        check_unit(sources[i].direction, what);
    }
    for (std::size_t i = 0; i < receivers.size(); ++i) {
        const auto what = "receiver " + std::to_string(i);
        check_position(receivers[i].position, what);
        if (receivers[i].directions.empty()) {
            throw Error(ErrorCode::validation_error, what + " records no direction");
        }
        for (const auto& d : receivers[i].directions) {
            check_unit(d, what);
        }
    }
    (void)directions_per_receiver();
}

}  // namespace tfwi
