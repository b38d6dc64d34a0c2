#pragma once

#include <vector>

#include "tfwi/forward.hpp"
#include "tfwi/material.hpp"
#include "tfwi/mesh.hpp"
#include "tfwi/solver.hpp"

namespace tfwi {

struct Misfit {
    double value = 0.0;
    /// Contribution of each (f, s), index f * N_s + s.
    std::vector<double> partial;
};

/// sum |u - u0|^2 over all records.
Misfit misfit(const RecordSet& synthetic, const RecordSet& observed);

/// Model gradient aligned with ModelVector (v_p block, then v_s block).
struct Gradient {
    /// d chi / d m_k.
    RealVector raw;
    /// Lumped node areas A_k = integral of phi_k.
    RealVector areas;
    /// raw / A_k, then multiplied by the mask once preconditioned.
    RealVector values;
    /// max |Im| / max |Re| of the accumulated bilinear sums.
    double imaginary_ratio = 0.0;
};

/// values = raw / A_k on both blocks.
RealVector normalize_gradient(const RealVector& raw, const RealVector& areas);

/// -conj(du) of every receiver and direction scattered through the receiver
/// shape values. residuals and receivers are receiver-major.
ComplexVector adjoint_source(const std::vector<Complex>& residuals, const std::vector<PointFunctional>& receivers,
                             Eigen::Index size);
ComplexVector adjoint_source(const ForwardModel& forward, const std::vector<Complex>& residuals,
                             const StationLayout& layout);

ComplexVector adjoint_field(const Factorization& factorization, const ComplexVector& rhs);

struct FieldPair {
    double omega = 0.0;
    ComplexVector forward;
    ComplexVector adjoint;
};

/// raw_k = 2 Re sum u^T (dL/dm_k) u_adj over all pairs, accumulated in list
/// order.
Gradient accumulate_gradient(const ForwardModel& forward, const ModelVector& model,
                             const std::vector<FieldPair>& pairs);

struct MisfitGradient {
    Misfit misfit;
    Gradient gradient;
    RecordSet synthetic;
};

/// Misfit of records simulated in `model` against `observed` (same omega list
/// and layout), with the adjoint gradient when requested. One factorization
/// per frequency serves forward and adjoint solves.
MisfitGradient evaluate_misfit(const ForwardModel& forward, const ModelVector& model, const RecordSet& observed,
                               const StationLayout& layout, const ComplexMatrix& amplitudes, bool with_gradient);

struct MaskSettings {
    double station_radius = 2.5;
    double station_transition = 2.5;
    double surface_distance = 1.75;
    double surface_transition = 1.75;

    void validate() const;
    friend bool operator==(const MaskSettings&, const MaskSettings&) = default;
};

/// Per-node gradient scale in [0, 1].
struct PreconditionMask {
    std::vector<double> factors;
};

/// 0 within the exclusion distance of a station or a free-surface edge,
/// linear up to 1 across the transition width, and 0 for nodes outside the
/// physical domain.
PreconditionMask build_mask(const StationLayout& layout, const Mesh& mesh, const MaskSettings& settings);

/// Entrywise product of the gradient values with the nodal mask on both
/// blocks.
Gradient precondition(const Gradient& gradient, const PreconditionMask& mask);

/// Distance from p to the segment [a, b].
double segment_distance(Point p, Point a, Point b);

}  // namespace tfwi
