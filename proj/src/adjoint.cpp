#include "tfwi/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tfwi/error.hpp"
#include "tfwi/parallel.hpp"

namespace tfwi {

Misfit misfit(const RecordSet& synthetic, const RecordSet& observed)
{
    if (!synthetic.same_shape(observed)) {
        throw Error(ErrorCode::dimension_mismatch, "synthetic and observed records have different index ranges");
    }
    Misfit out;
    const std::size_t nf = synthetic.frequency_count();
    const std::size_t ns = synthetic.source_count();
    out.partial.assign(nf * ns, 0.0);
    for (std::size_t f = 0; f < nf; ++f) {
        for (std::size_t s = 0; s < ns; ++s) {
            double sum = 0.0;
            for (std::size_t r = 0; r < synthetic.receiver_count(); ++r) {
                for (std::size_t d = 0; d < synthetic.direction_count(); ++d) {
                    sum += std::norm(synthetic.at(f, s, r, d) - observed.at(f, s, r, d));
                }
            }
            out.partial[f * ns + s] = sum;
            out.value += sum;
        }
    }
    return out;
}

RealVector normalize_gradient(const RealVector& raw, const RealVector& areas)
{
    const Eigen::Index n = areas.size();
    if (raw.size() != 2 * n) {
        throw Error(ErrorCode::dimension_mismatch, "gradient and area vectors are not aligned");
    }
    RealVector out(raw.size());
    for (Eigen::Index k = 0; k < n; ++k) {
        out[k] = raw[k] / areas[k];
        out[n + k] = raw[n + k] / areas[k];
    }
    return out;
}

ComplexVector adjoint_source(const std::vector<Complex>& residuals, const std::vector<PointFunctional>& receivers,
                             Eigen::Index size)
{
    if (residuals.size() != receivers.size()) {
        throw Error(ErrorCode::dimension_mismatch, "one residual per receiver direction required");
    }
    ComplexVector rhs = ComplexVector::Zero(size);
    for (std::size_t i = 0; i < residuals.size(); ++i) {
        receivers[i].scatter(-std::conj(residuals[i]), rhs);
    }
    return rhs;
}

ComplexVector adjoint_source(const ForwardModel& forward, const std::vector<Complex>& residuals,
                             const StationLayout& layout)
{
    return adjoint_source(residuals, forward.receiver_functionals(layout), forward.dofs()->size());
}

ComplexVector adjoint_field(const Factorization& factorization, const ComplexVector& rhs)
{
    return factorization.solve(rhs);
}

namespace {

RealVector areas_of(const Mesh& mesh)
{
    const auto a = lumped_node_areas(mesh);
    return Eigen::Map<const RealVector>(a.data(), static_cast<Eigen::Index>(a.size()));
}

Gradient finish_gradient(const Mesh& mesh, const ComplexVector& sum)
{
    Gradient g;
    g.raw = 2.0 * sum.real();
    g.areas = areas_of(mesh);
    g.values = normalize_gradient(g.raw, g.areas);
    const double re = sum.real().cwiseAbs().maxCoeff();
    const double im = sum.imag().cwiseAbs().maxCoeff();
    g.imaginary_ratio = re > 0.0 ? im / re : 0.0;
    return g;
}

}  // namespace

Gradient accumulate_gradient(const ForwardModel& forward, const ModelVector& model,
                             const std::vector<FieldPair>& pairs)
{
    ComplexVector sum = ComplexVector::Zero(static_cast<Eigen::Index>(model.size()));
    for (const auto& p : pairs) {
        sum += model_derivative_products(p.forward, p.adjoint, forward.mesh(), *forward.dofs(), model, p.omega,
                                         forward.settings());
    }
    return finish_gradient(forward.mesh(), sum);
}

MisfitGradient evaluate_misfit(const ForwardModel& forward, const ModelVector& model, const RecordSet& observed,
                               const StationLayout& layout, const ComplexMatrix& amplitudes, bool with_gradient)
{
    const std::size_t nf = observed.frequency_count();
    const std::size_t ns = layout.sources.size();
    if (observed.source_count() != ns || observed.receiver_count() != layout.receivers.size() ||
        observed.direction_count() != layout.directions_per_receiver()) {
        throw Error(ErrorCode::dimension_mismatch, "observed records do not match the station layout");
    }
    if (amplitudes.size() != 0 &&
        (amplitudes.rows() != static_cast<Eigen::Index>(nf) || amplitudes.cols() != static_cast<Eigen::Index>(ns))) {
        throw Error(ErrorCode::dimension_mismatch, "amplitude table must be frequencies x sources");
    }
    const auto receivers = forward.receiver_functionals(layout);
    RecordSet synthetic(observed.omegas(), ns, layout.receivers.size(), layout.directions_per_receiver());
    const auto n_model = static_cast<Eigen::Index>(model.size());
    std::vector<ComplexVector> partial(nf);

    parallel_for(nf, [&](std::size_t f) {
        const double omega = observed.omegas()[f];
        const Factorization factorization = forward.factorize(model, omega);
        ComplexVector sum = ComplexVector::Zero(with_gradient ? n_model : 0);
        for (std::size_t s = 0; s < ns; ++s) {
            const Complex a = amplitudes.size() == 0 ? Complex{1.0, 0.0}
                                                     : amplitudes(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(s));
            const ComplexVector u = factorization.solve(forward.source_vector(layout.sources[s], a));
            std::vector<Complex> records;
            std::vector<Complex> residuals;
            records.reserve(receivers.size());
            residuals.reserve(receivers.size());
            for (std::size_t i = 0; i < receivers.size(); ++i) {
                records.push_back(receivers[i].apply(u));
                residuals.push_back(records.back() - observed.values()[observed.index(f, s, 0, 0) + i]);
            }
            synthetic.set_slice(f, s, records);
            if (with_gradient) {
                const ComplexVector adjoint =
                    adjoint_field(factorization, adjoint_source(residuals, receivers, forward.dofs()->size()));
                sum += model_derivative_products(u, adjoint, forward.mesh(), *forward.dofs(), model, omega,
                                                 forward.settings());
            }
        }
        partial[f] = std::move(sum);
    });

    MisfitGradient out;
    out.misfit = misfit(synthetic, observed);
    if (with_gradient) {
        ComplexVector sum = ComplexVector::Zero(n_model);
        for (const auto& p : partial) {
            sum += p;
        }
        out.gradient = finish_gradient(forward.mesh(), sum);
    }
    out.synthetic = std::move(synthetic);
    return out;
}

void MaskSettings::validate() const
{
    const auto check = [](double v, const char* key) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw Error(ErrorCode::validation_error, std::string("mask.") + key + " must be non-negative");
        }
    };
    check(station_radius, "station_radius");
    check(station_transition, "station_transition");
    check(surface_distance, "surface_distance");
    check(surface_transition, "surface_transition");
}

double segment_distance(Point p, Point a, Point b)
{
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

namespace {

double ramp(double distance, double zero_within, double width)
{
    if (distance <= zero_within) {
        return 0.0;
    }
    if (width <= 0.0 || distance >= zero_within + width) {
        return 1.0;
    }
    return (distance - zero_within) / width;
}

}  // namespace

PreconditionMask build_mask(const StationLayout& layout, const Mesh& mesh, const MaskSettings& settings)
{
    settings.validate();
    std::vector<Point> stations;
    for (const auto& s : layout.sources) {
        stations.push_back(s.position);
    }
    for (const auto& r : layout.receivers) {
        stations.push_back(r.position);
    }
    const auto surface = mesh.free_surface_edges();

    PreconditionMask mask;
    mask.factors.assign(mesh.node_count(), 1.0);
    for (std::size_t n = 0; n < mesh.node_count(); ++n) {
        const Point p = mesh.node(static_cast<int>(n));
        if (!mesh.in_physical_domain(p)) {
            mask.factors[n] = 0.0;
            continue;
        }
        double station = std::numeric_limits<double>::infinity();
        for (const Point& s : stations) {
            station = std::min(station, (p - s).norm());
        }
        double wall = std::numeric_limits<double>::infinity();
        for (int e : surface) {
            const Edge& edge = mesh.edges()[static_cast<std::size_t>(e)];
            wall = std::min(wall, segment_distance(p, mesh.node(edge.nodes[0]), mesh.node(edge.nodes[1])));
        }
        mask.factors[n] = std::min(ramp(station, settings.station_radius, settings.station_transition),
                                   ramp(wall, settings.surface_distance, settings.surface_transition));
    }
    return mask;
}

Gradient precondition(const Gradient& gradient, const PreconditionMask& mask)
{
    const auto n = static_cast<Eigen::Index>(mask.factors.size());
    if (gradient.values.size() != 2 * n) {
        throw Error(ErrorCode::dimension_mismatch, "mask and gradient are not aligned");
    }
    Gradient out = gradient;
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values[k] *= mask.factors[static_cast<std::size_t>(k)];
        out.values[n + k] *= mask.factors[static_cast<std::size_t>(k)];
    }
    return out;
}

}  // namespace tfwi
