#pragma once

#include <vector>

#include "tfwi/config.hpp"
#include "tfwi/forward.hpp"
#include "tfwi/optimize.hpp"

namespace tfwi {

/// Horizontal displacement at an arbitrary point of the mesh.
Complex horizontal_displacement(const ForwardModel& forward, const ComplexVector& field, Point p);

struct ValidationRow {
    double distance = 0.0;  // signed, along the line from the source
    Point point{};
    Complex numeric;
    Complex analytic;
    /// |Re(numeric) - Re(analytic)| / |analytic|.
    double relative_error = 0.0;
    /// Outside the exclusion disk around the source.
    bool counted = false;
};

struct ValidationReport {
    std::vector<ValidationRow> rows;
    double median_error = 0.0;
    double max_error = 0.0;
};

/// Samples the physical domain along the line through the source with the
/// given direction and compares the numeric horizontal displacement for a
/// unit vertical force with the analytic Green's function.
ValidationReport compare_with_analytic(const ForwardModel& forward, const ComplexVector& field, Point source,
                                       const AmbientProperties& ambient, double omega, Vec2 direction,
                                       double spacing, double exclusion_radius);

struct RayDecay {
    double angle = 0.0;  // rad
    Point inner{};       // where the ray enters the absorbing layer
    Point outer{};       // where it leaves the grid
    double inner_amplitude = 0.0;
    double outer_amplitude = 0.0;
    [[nodiscard]] double ratio() const { return outer_amplitude / inner_amplitude; }
};

/// Displacement magnitude at the inner and outer edge of the absorbing layer
/// along `rays` equally spaced rays from the source.
std::vector<RayDecay> pml_decay(const ForwardModel& forward, const ComplexVector& field, Point source, int rays = 8);

/// Unbounded homogeneous configuration used by validate-pml: the configured
/// geometry without tunnel and with an absorbing layer on top.
TunnelGeometry unbounded_geometry(const TunnelGeometry& geometry);

struct PmlValidation {
    Point source{};
    Vec2 direction{};
    ValidationReport comparison;
    std::vector<RayDecay> decay;
    std::size_t dofs = 0;
};

/// Homogeneous unbounded run with a unit vertical force at the centre of the
/// physical domain, compared with the analytic solution along the domain
/// diagonal.
PmlValidation validate_pml(const RunConfig& config);

/// Records simulated in `reference` on `mesh` with the configured wavelet.
RecordSet make_synthetic(const RunConfig& config, const Mesh& mesh, const ModelVector& reference,
                         const std::vector<double>& omegas);

/// Full inversion over the configured schedule. `observed` must contain
/// every schedule frequency.
InversionResult run_fwi(const RunConfig& config, const Mesh& mesh, const ModelVector& initial,
                        const RecordSet& observed, const GroupCallback& on_group = {});

/// Indices of `wanted` in `available` (relative tolerance 1e-9).
std::vector<std::size_t> match_frequencies(const std::vector<double>& available, const std::vector<double>& wanted);

}  // namespace tfwi
