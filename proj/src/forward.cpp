#include "tfwi/forward.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "tfwi/error.hpp"
#include "tfwi/parallel.hpp"

namespace tfwi {

RecordSet::RecordSet(std::vector<double> omegas, std::size_t sources, std::size_t receivers, std::size_t directions)
    : omegas_(std::move(omegas)), sources_(sources), receivers_(receivers), directions_(directions)
{
    for (double w : omegas_) {
        if (!(w > 0.0)) {
            throw Error(ErrorCode::invalid_argument, "record frequencies must be positive");
        }
    }
    values_.assign(omegas_.size() * sources_ * receivers_ * directions_, Complex{0.0, 0.0});
}

void RecordSet::set_slice(std::size_t f, std::size_t s, const std::vector<Complex>& slice)
{
    if (slice.size() != receivers_ * directions_) {
        throw Error(ErrorCode::dimension_mismatch, "record slice has the wrong length");
    }
    std::copy(slice.begin(), slice.end(), values_.begin() + static_cast<std::ptrdiff_t>(index(f, s, 0, 0)));
}

std::vector<Complex> RecordSet::slice(std::size_t f, std::size_t s) const
{
    const auto begin = values_.begin() + static_cast<std::ptrdiff_t>(index(f, s, 0, 0));
    return {begin, begin + static_cast<std::ptrdiff_t>(receivers_ * directions_)};
}

RecordSet RecordSet::select_frequencies(const std::vector<std::size_t>& indices) const
{
    std::vector<double> omegas;
    for (std::size_t i : indices) {
        if (i >= omegas_.size()) {
            throw Error(ErrorCode::out_of_range, "frequency index out of range");
        }
        omegas.push_back(omegas_[i]);
    }
    RecordSet out(omegas, sources_, receivers_, directions_);
    for (std::size_t k = 0; k < indices.size(); ++k) {
        for (std::size_t s = 0; s < sources_; ++s) {
            out.set_slice(k, s, slice(indices[k], s));
        }
    }
    return out;
}

bool RecordSet::same_shape(const RecordSet& other) const
{
    return omegas_ == other.omegas_ && sources_ == other.sources_ && receivers_ == other.receivers_ &&
           directions_ == other.directions_;
}

ForwardModel::ForwardModel(const Mesh& mesh, OperatorSettings settings)
    : mesh_(&mesh), settings_(settings)
{
    settings_.pml.validate();
    settings_.discretization.validate();
    if (!(settings_.density > 0.0)) {
        throw Error(ErrorCode::validation_error, "density must be positive");
    }
    dofs_ = std::make_shared<const DofMap>(mesh, settings_.discretization.degree);
}

SparseMatrix ForwardModel::impedance(const ModelVector& model, double omega) const
{
    return assemble_impedance(*mesh_, *dofs_, model, omega, settings_);
}

Factorization ForwardModel::factorize(const ModelVector& model, double omega) const
{
    return Factorization(impedance(model, omega));
}

ComplexVector ForwardModel::source_vector(const Source& source, Complex amplitude) const
{
    return assemble_point_source(*mesh_, *dofs_, source.position, source.direction, amplitude);
}

std::vector<PointFunctional> ForwardModel::receiver_functionals(const StationLayout& layout) const
{
    std::vector<PointFunctional> out;
    for (std::size_t r = 0; r < layout.receivers.size(); ++r) {
        const auto& receiver = layout.receivers[r];
        const PointLocation loc = locate_point(*mesh_, receiver.position);
        if (mesh_->element(loc.element).region != Region::interior) {
            std::ostringstream msg;
            msg << "receiver " << r << " at (" << receiver.position.x << ", " << receiver.position.y
                << ") lies inside an absorbing layer";
            throw Error(ErrorCode::invalid_argument, msg.str());
        }
        for (const Vec2& d : receiver.directions) {
            out.push_back(point_functional(*mesh_, *dofs_, receiver.position, d));
        }
    }
    return out;
}

namespace {

Complex amplitude_of(const std::vector<Complex>& amplitudes, std::size_t s, std::size_t sources)
{
    if (amplitudes.empty()) {
        return {1.0, 0.0};
    }
    if (amplitudes.size() != sources) {
        throw Error(ErrorCode::dimension_mismatch, "one source amplitude per source required");
    }
    return amplitudes[s];
}

}  // namespace

std::vector<WaveField> forward_solve(const ForwardModel& forward, const Factorization& factorization, double omega,
                                     const StationLayout& layout, const std::vector<Complex>& amplitudes)
{
    std::vector<WaveField> fields;
    fields.reserve(layout.sources.size());
    for (std::size_t s = 0; s < layout.sources.size(); ++s) {
        const Complex a = amplitude_of(amplitudes, s, layout.sources.size());
        const ComplexVector rhs = forward.source_vector(layout.sources[s], a);
        fields.push_back({factorization.solve(rhs), forward.dofs(), omega});
    }
    return fields;
}

std::vector<WaveField> forward_solve(const ForwardModel& forward, const ModelVector& model, double omega,
                                     const StationLayout& layout, const std::vector<Complex>& amplitudes)
{
    const Factorization factorization = forward.factorize(model, omega);
    return forward_solve(forward, factorization, omega, layout, amplitudes);
}

std::vector<Complex> sample_receivers(const ForwardModel& forward, const WaveField& field, const StationLayout& layout)
{
    if (field.values.size() != forward.dofs()->size()) {
        throw Error(ErrorCode::dimension_mismatch, "wave field does not match the dof map");
    }
    const auto functionals = forward.receiver_functionals(layout);
    std::vector<Complex> out;
    out.reserve(functionals.size());
    for (const auto& f : functionals) {
        out.push_back(f.apply(field.values));
    }
    return out;
}

RecordSet simulate_records(const ForwardModel& forward, const ModelVector& model, const std::vector<double>& omegas,
                           const StationLayout& layout, const ComplexMatrix& amplitudes)
{
    layout.validate(forward.mesh());
    const std::size_t ns = layout.sources.size();
    if (amplitudes.size() != 0 &&
        (amplitudes.rows() != static_cast<Eigen::Index>(omegas.size()) || amplitudes.cols() != static_cast<Eigen::Index>(ns))) {
        throw Error(ErrorCode::dimension_mismatch, "amplitude table must be frequencies x sources");
    }
    RecordSet records(omegas, ns, layout.receivers.size(), layout.directions_per_receiver());
    const auto functionals = forward.receiver_functionals(layout);
    parallel_for(omegas.size(), [&](std::size_t f) {
        const Factorization factorization = forward.factorize(model, omegas[f]);
        for (std::size_t s = 0; s < ns; ++s) {
            const Complex a = amplitudes.size() == 0 ? Complex{1.0, 0.0}
                                                     : amplitudes(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(s));
            const ComplexVector u = factorization.solve(forward.source_vector(layout.sources[s], a));
            std::vector<Complex> slice;
            slice.reserve(functionals.size());
            for (const auto& fn : functionals) {
                slice.push_back(fn.apply(u));
            }
            records.set_slice(f, s, slice);
        }
    });
    return records;
}

int DegreeSchedule::degree_for(double omega, int base_degree) const
{
    int degree = base_degree;
    for (const auto& b : breakpoints) {
        if (b.omega_from <= omega) {
            degree = b.degree;
        }
    }
    return degree;
}

void DegreeSchedule::validate() const
{
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
        if (breakpoints[i].degree < 1 || breakpoints[i].degree > HierarchicalBasis::max_degree) {
            throw Error(ErrorCode::validation_error, "degree schedule entries must lie in [1, 3]");
        }
        if (i > 0 && !(breakpoints[i].omega_from > breakpoints[i - 1].omega_from)) {
            throw Error(ErrorCode::validation_error, "degree schedule breakpoints must increase");
        }
    }
}

std::vector<double> sweep_frequencies(double omega_start, double omega_end, double step)
{
    if (!(omega_start > 0.0) || !(step > 0.0) || omega_end < omega_start) {
        throw Error(ErrorCode::invalid_argument, "sweep requires omega_start > 0, step > 0, omega_end >= omega_start");
    }
    const auto count = static_cast<std::size_t>(std::floor((omega_end - omega_start) / step + 1e-9)) + 1;
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = omega_start + static_cast<double>(i) * step;
    }
    return out;
}

RecordSet greens_sweep(const Mesh& mesh, const OperatorSettings& settings, const ModelVector& model,
                       const Source& source, const std::vector<Receiver>& receivers, double omega_start,
                       double omega_end, double step, const DegreeSchedule& degrees)
{
    degrees.validate();
    const auto omegas = sweep_frequencies(omega_start, omega_end, step);
    StationLayout layout{{source}, receivers};
    layout.validate(mesh);
    RecordSet records(omegas, 1, receivers.size(), layout.directions_per_receiver());

    std::map<int, std::unique_ptr<ForwardModel>> by_degree;
    for (double w : omegas) {
        const int p = degrees.degree_for(w, settings.discretization.degree);
        if (by_degree.count(p) == 0) {
            OperatorSettings s = settings;
            s.discretization.degree = p;
            by_degree.emplace(p, std::make_unique<ForwardModel>(mesh, s));
        }
    }
    parallel_for(omegas.size(), [&](std::size_t f) {
        const double w = omegas[f];
        try {
            const auto& forward = *by_degree.at(degrees.degree_for(w, settings.discretization.degree));
            const auto fields = forward_solve(forward, model, w, layout);
            records.set_slice(f, 0, sample_receivers(forward, fields.front(), layout));
        } catch (const Error& e) {
            std::ostringstream msg;
            msg << "sweep failed at omega = " << w << " rad/s: " << e.what();
            throw Error(e.code(), msg.str());
        }
    });
    return records;
}

}  // namespace tfwi
