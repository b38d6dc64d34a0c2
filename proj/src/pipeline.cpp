#include "tfwi/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "tfwi/analytic.hpp"
#include "tfwi/error.hpp"

namespace tfwi {

Complex horizontal_displacement(const ForwardModel& forward, const ComplexVector& field, Point p)
{
    return point_functional(forward.mesh(), *forward.dofs(), p, {1.0, 0.0}).apply(field);
}

namespace {

double displacement_magnitude(const ForwardModel& forward, const ComplexVector& field, Point p)
{
    const Complex ux = point_functional(forward.mesh(), *forward.dofs(), p, {1.0, 0.0}).apply(field);
    const Complex uy = point_functional(forward.mesh(), *forward.dofs(), p, {0.0, 1.0}).apply(field);
    return std::sqrt(std::norm(ux) + std::norm(uy));
}

double median(std::vector<double> v)
{
    if (v.empty()) {
        return 0.0;
    }
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
    }
    return m;
}

}  // namespace

ValidationReport compare_with_analytic(const ForwardModel& forward, const ComplexVector& field, Point source,
                                       const AmbientProperties& ambient, double omega, Vec2 direction,
                                       double spacing, double exclusion_radius)
{
    if (!(spacing > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "sample spacing must be positive");
    }
    const Mesh& mesh = forward.mesh();
    const Vec2 d = (1.0 / direction.norm()) * direction;
    const auto& g = mesh.geometry();
    const double reach = std::hypot(g.domain_width, g.height());
    const auto steps = static_cast<int>(std::ceil(reach / spacing));

    ValidationReport report;
    std::vector<double> errors;
    for (int k = -steps; k <= steps; ++k) {
        const double t = k * spacing;
        const Point p = source + t * d;
        if (k == 0 || !mesh.in_physical_domain(p)) {
            continue;
        }
        ValidationRow row;
        row.distance = t;
        row.point = p;
        row.numeric = horizontal_displacement(forward, field, p);
        row.analytic = greens_x_analytic({source, p, omega, ambient.vp, ambient.vs, ambient.density});
        row.relative_error = std::abs(row.numeric.real() - row.analytic.real()) / std::abs(row.analytic);
        row.counted = std::abs(t) >= exclusion_radius;
        if (row.counted) {
            errors.push_back(row.relative_error);
            report.max_error = std::max(report.max_error, row.relative_error);
        }
        report.rows.push_back(row);
    }
    report.median_error = median(errors);
    return report;
}

std::vector<RayDecay> pml_decay(const ForwardModel& forward, const ComplexVector& field, Point source, int rays)
{
    const Mesh& mesh = forward.mesh();
    const double h = mesh.element_size();
    const Point lo = mesh.origin();
    const Point hi = lo + Vec2{(mesh.grid_nodes_x() - 1) * h, (mesh.grid_nodes_y() - 1) * h};
    std::vector<RayDecay> out;
    for (int k = 0; k < rays; ++k) {
        RayDecay ray;
        ray.angle = 2.0 * std::numbers::pi * k / rays;
        const Vec2 d{std::cos(ray.angle), std::sin(ray.angle)};
        // Exit parameter of the grid box.
        double t_out = std::numeric_limits<double>::infinity();
        if (d.x > 1e-12) t_out = std::min(t_out, (hi.x - source.x) / d.x);
        if (d.x < -1e-12) t_out = std::min(t_out, (lo.x - source.x) / d.x);
        if (d.y > 1e-12) t_out = std::min(t_out, (hi.y - source.y) / d.y);
        if (d.y < -1e-12) t_out = std::min(t_out, (lo.y - source.y) / d.y);
        // Last point of the physical domain, by bisection.
        double a = 0.0;
        double b = t_out;
        for (int it = 0; it < 60; ++it) {
            const double m = 0.5 * (a + b);
            (mesh.in_physical_domain(source + m * d) ? a : b) = m;
        }
        ray.inner = source + a * d;
        ray.outer = source + t_out * d;
        ray.inner_amplitude = displacement_magnitude(forward, field, ray.inner);
        ray.outer_amplitude = displacement_magnitude(forward, field, ray.outer);
        out.push_back(ray);
    }
    return out;
}

TunnelGeometry unbounded_geometry(const TunnelGeometry& geometry)
{
    TunnelGeometry g = geometry;
    g.depth_above_tunnel += g.tunnel_height;
    g.tunnel_height = 0.0;
    g.tunnel_length = 0.0;
    g.pml_on_top = true;
    return g;
}

PmlValidation validate_pml(const RunConfig& config)
{
    const TunnelGeometry geometry = unbounded_geometry(config.geometry);
    const Mesh mesh = build_tunnel_mesh(geometry);
    const OperatorSettings settings = config.operator_settings();
    const ForwardModel forward(mesh, settings);
    const ModelVector model = ModelVector::homogeneous(mesh.node_count(), config.ambient.vp, config.ambient.vs);

    PmlValidation out;
    out.source = {0.5 * geometry.domain_width, 0.5 * geometry.height()};
    out.direction = {geometry.domain_width, geometry.height()};
    StationLayout layout;
    layout.sources.push_back({out.source, {0.0, 1.0}});
    const double omega = config.validation.omega;
    const auto fields = forward_solve(forward, model, omega, layout);
    out.dofs = static_cast<std::size_t>(fields[0].values.size());
    out.comparison = compare_with_analytic(forward, fields[0].values, out.source, config.ambient, omega, out.direction,
                                           config.validation.sample_spacing, config.validation.exclusion_radius);
    out.decay = pml_decay(forward, fields[0].values, out.source);
    return out;
}

RecordSet make_synthetic(const RunConfig& config, const Mesh& mesh, const ModelVector& reference,
                         const std::vector<double>& omegas)
{
    const ForwardModel forward(mesh, config.operator_settings());
    return simulate_records(forward, reference, omegas, config.stations,
                            source_amplitudes(config.wavelet, omegas, config.stations.sources.size()));
}

std::vector<std::size_t> match_frequencies(const std::vector<double>& available, const std::vector<double>& wanted)
{
    std::vector<std::size_t> out;
    for (double w : wanted) {
        const auto it = std::find_if(available.begin(), available.end(),
                                     [&](double a) { return std::abs(a - w) <= 1e-9 * std::abs(w); });
        if (it == available.end()) {
            std::ostringstream msg;
            msg << "no observed records at omega = " << w << " rad/s";
            throw Error(ErrorCode::not_found, msg.str());
        }
        out.push_back(static_cast<std::size_t>(it - available.begin()));
    }
    return out;
}

InversionResult run_fwi(const RunConfig& config, const Mesh& mesh, const ModelVector& initial,
                        const RecordSet& observed, const GroupCallback& on_group)
{
    config.schedule.validate();
    for (const auto& group : config.schedule.groups) {
        match_frequencies(observed.omegas(), group);
    }
    const ForwardModel forward(mesh, config.operator_settings());
    const PreconditionMask mask = build_mask(config.stations, mesh, config.mask);
    const auto factory = [&](std::size_t, const std::vector<double>& omegas) -> std::unique_ptr<Objective> {
        RecordSet group = observed.select_frequencies(match_frequencies(observed.omegas(), omegas));
        ComplexMatrix amplitudes = source_amplitudes(config.wavelet, group.omegas(), config.stations.sources.size());
        return std::make_unique<FwiObjective>(forward, std::move(group), config.stations, std::move(amplitudes), mask);
    };
    return run_inversion(factory, initial.as_eigen(), config.schedule, config.resolved_optimizer(), on_group);
}

}  // namespace tfwi
