#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "tfwi/assembly.hpp"
#include "tfwi/material.hpp"
#include "tfwi/mesh.hpp"
#include "tfwi/solver.hpp"
#include "tfwi/types.hpp"

namespace tfwi {

/// Complex displacement coefficients for one (model, omega, source).
struct WaveField {
    ComplexVector values;
    std::shared_ptr<const DofMap> dofs;
    double omega = 0.0;
};

/// Complex displacements u_fsrd over frequencies f, sources s, receivers r and
/// recorded directions d.
class RecordSet {
public:
    RecordSet() = default;
    RecordSet(std::vector<double> omegas, std::size_t sources, std::size_t receivers, std::size_t directions);

    [[nodiscard]] const std::vector<double>& omegas() const { return omegas_; }
    [[nodiscard]] std::size_t frequency_count() const { return omegas_.size(); }
    [[nodiscard]] std::size_t source_count() const { return sources_; }
    [[nodiscard]] std::size_t receiver_count() const { return receivers_; }
    [[nodiscard]] std::size_t direction_count() const { return directions_; }
    [[nodiscard]] std::size_t size() const { return values_.size(); }

    [[nodiscard]] std::size_t index(std::size_t f, std::size_t s, std::size_t r, std::size_t d) const
    {
        return ((f * sources_ + s) * receivers_ + r) * directions_ + d;
    }
    [[nodiscard]] Complex& at(std::size_t f, std::size_t s, std::size_t r, std::size_t d)
    {
        return values_[index(f, s, r, d)];
    }
    [[nodiscard]] Complex at(std::size_t f, std::size_t s, std::size_t r, std::size_t d) const
    {
        return values_[index(f, s, r, d)];
    }
    [[nodiscard]] std::vector<Complex>& values() { return values_; }
    [[nodiscard]] const std::vector<Complex>& values() const { return values_; }

    /// Receiver-direction block for one (f, s), receiver-major.
    void set_slice(std::size_t f, std::size_t s, const std::vector<Complex>& slice);
    [[nodiscard]] std::vector<Complex> slice(std::size_t f, std::size_t s) const;

    /// Records restricted to the listed frequency indices.
    [[nodiscard]] RecordSet select_frequencies(const std::vector<std::size_t>& indices) const;

    [[nodiscard]] bool same_shape(const RecordSet& other) const;

private:
    std::vector<double> omegas_;
    std::size_t sources_ = 0;
    std::size_t receivers_ = 0;
    std::size_t directions_ = 0;
    std::vector<Complex> values_;
};

/// Mesh, discretization and absorbing-layer settings shared by every solve.
class ForwardModel {
public:
    ForwardModel(const Mesh& mesh, OperatorSettings settings);

    [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
    [[nodiscard]] const OperatorSettings& settings() const { return settings_; }
    [[nodiscard]] const std::shared_ptr<const DofMap>& dofs() const { return dofs_; }

    [[nodiscard]] SparseMatrix impedance(const ModelVector& model, double omega) const;
    [[nodiscard]] Factorization factorize(const ModelVector& model, double omega) const;
    [[nodiscard]] ComplexVector source_vector(const Source& source, Complex amplitude) const;

    /// One functional per (receiver, direction), receiver-major. Rejects
    /// receivers in the void or in an absorbing layer.
    [[nodiscard]] std::vector<PointFunctional> receiver_functionals(const StationLayout& layout) const;

private:
    const Mesh* mesh_;
    OperatorSettings settings_;
    std::shared_ptr<const DofMap> dofs_;
};

/// Fields for every source from a single factorization of L(model, omega).
/// amplitudes holds f_omega per source (empty means unit amplitudes).
std::vector<WaveField> forward_solve(const ForwardModel& forward, const ModelVector& model, double omega,
                                     const StationLayout& layout, const std::vector<Complex>& amplitudes = {});

/// Same as forward_solve on an existing factorization.
std::vector<WaveField> forward_solve(const ForwardModel& forward, const Factorization& factorization, double omega,
                                     const StationLayout& layout, const std::vector<Complex>& amplitudes = {});

/// Displacements at every receiver along each recorded direction,
/// receiver-major.
std::vector<Complex> sample_receivers(const ForwardModel& forward, const WaveField& field, const StationLayout& layout);

/// Records for all frequencies and sources. amplitudes(f, s) gives f_omega;
/// an empty matrix means unit amplitudes. Frequencies run in parallel.
RecordSet simulate_records(const ForwardModel& forward, const ModelVector& model, const std::vector<double>& omegas,
                           const StationLayout& layout, const ComplexMatrix& amplitudes = {});

/// Polynomial degree as a function of omega: the last breakpoint whose
/// omega_from does not exceed omega wins; below all breakpoints (or with none)
/// the base degree applies.
struct DegreeSchedule {
    struct Breakpoint {
        double omega_from = 0.0;
        int degree = 3;
        friend bool operator==(const Breakpoint&, const Breakpoint&) = default;
    };
    std::vector<Breakpoint> breakpoints;

    [[nodiscard]] int degree_for(double omega, int base_degree) const;
    void validate() const;
    friend bool operator==(const DegreeSchedule&, const DegreeSchedule&) = default;
};

/// omega_start, omega_start + step, ... up to omega_end inclusive.
std::vector<double> sweep_frequencies(double omega_start, double omega_end, double step);

/// Unit-amplitude records of one source at every sweep frequency (a RecordSet
/// with a single source).
RecordSet greens_sweep(const Mesh& mesh, const OperatorSettings& settings, const ModelVector& model,
                       const Source& source, const std::vector<Receiver>& receivers, double omega_start,
                       double omega_end, double step, const DegreeSchedule& degrees = {});

}  // namespace tfwi
