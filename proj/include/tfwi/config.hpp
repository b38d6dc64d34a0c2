#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tfwi/adjoint.hpp"
#include "tfwi/assembly.hpp"
#include "tfwi/forward.hpp"
#include "tfwi/material.hpp"
#include "tfwi/mesh.hpp"
#include "tfwi/optimize.hpp"
#include "tfwi/pml.hpp"

namespace tfwi {

/// Circular velocity anomaly used to build reference models.
struct Inclusion {
    Point center{};
    double radius = 0.0;
    double vp = 0.0;
    double vs = 0.0;
    friend bool operator==(const Inclusion&, const Inclusion&) = default;
};

/// Source time function: a zero-phase Ricker wavelet sampled at
/// t0 + n dt. Its transform gives the source amplitude per frequency.
struct WaveletSettings {
    bool enabled = true;
    double peak_frequency = 500.0;  // Hz
    double dt = 1e-5;               // s
    double t0 = -0.005;             // s
    std::size_t samples = 1001;

    void validate() const;
    friend bool operator==(const WaveletSettings&, const WaveletSettings&) = default;
};

struct SweepSettings {
    double omega_start = 100.0;
    double omega_end = 9000.0;
    double step = 10.0;
    DegreeSchedule degrees;
    friend bool operator==(const SweepSettings&, const SweepSettings&) = default;
};

struct ValidationSettings {
    /// omega = 2 pi * 500 Hz.
    double omega = 3141.592653589793;
    /// Points closer than this to the source are left out of the error
    /// statistics (3 elements of 1 m).
    double exclusion_radius = 3.0;
    double sample_spacing = 0.25;
    friend bool operator==(const ValidationSettings&, const ValidationSettings&) = default;
};

struct PathSettings {
    std::string model;
    std::string initial_model;
    std::string reference_model;
    std::string observed_time_records;
    std::string observed_records;
    std::string output_dir = "tfwi-out";
    std::string cache_dir;
    friend bool operator==(const PathSettings&, const PathSettings&) = default;
};

struct RunConfig {
    TunnelGeometry geometry;
    AmbientProperties ambient;
    StationLayout stations;
    PmlProfile pml;
    DiscretizationConfig discretization;
    FrequencySchedule schedule = FrequencySchedule::blind_test();
    OptimizerSettings optimizer;
    /// First step of a group moves the model by this fraction of ambient v_s.
    double first_step_fraction = 0.01;
    MaskSettings mask;
    WaveletSettings wavelet;
    SweepSettings sweep;
    ValidationSettings validation;
    /// Frequencies of the forward command; empty means every schedule
    /// frequency.
    std::vector<double> forward_omegas;
    std::vector<Inclusion> reference_inclusions;
    PathSettings paths;

    /// Settings of the assembled operators (layer width from the geometry).
    [[nodiscard]] OperatorSettings operator_settings() const;
    /// Optimizer settings with the first step resolved.
    [[nodiscard]] OptimizerSettings resolved_optimizer() const;
    /// Cross-checks every section; errors name the offending key.
    void validate() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses YAML text. Unknown keys are rejected; parse errors carry the line
/// number. `source_name` prefixes messages.
RunConfig parse_config(const std::string& text, const std::string& source_name = "config");
RunConfig load_config(const std::string& path);

/// Normalized YAML with every setting spelled out.
std::string dump_config(const RunConfig& config);

/// Ambient model with inclusions painted onto the nodes inside each circle.
ModelVector build_model(const Mesh& mesh, const AmbientProperties& ambient, const std::vector<Inclusion>& inclusions);

/// Source amplitude per frequency and source: the wavelet transform when the
/// wavelet is enabled, else 1.
ComplexMatrix source_amplitudes(const WaveletSettings& wavelet, const std::vector<double>& omegas,
                                std::size_t sources);

}  // namespace tfwi
