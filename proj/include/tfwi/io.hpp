#pragma once

#include <string>
#include <vector>

#include "tfwi/forward.hpp"
#include "tfwi/material.hpp"
#include "tfwi/mesh.hpp"
#include "tfwi/optimize.hpp"
#include "tfwi/signal.hpp"

namespace tfwi {

struct TraceId {
    std::size_t source = 0;
    std::size_t receiver = 0;
    std::size_t direction = 0;
    friend bool operator==(const TraceId&, const TraceId&) = default;
};

/// Time-domain traces sharing one time axis.
struct TimeRecordTable {
    std::vector<TraceId> ids;
    std::vector<TimeSeries> traces;
};

/// Text format:
///   nt dt t0 ntraces
///   s:r:d s:r:d ...          (one id per trace)
///   nt rows, one column per trace
TimeRecordTable read_time_records(const std::string& path);
void write_time_records(const std::string& path, const TimeRecordTable& table);

/// Transforms every trace to the given frequencies. Missing traces are
/// reported by id.
RecordSet time_records_to_frequency(const TimeRecordTable& table, const std::vector<double>& omegas,
                                    std::size_t sources, std::size_t receivers, std::size_t directions);

/// Text format:
///   nf ns nr nd
///   nf omegas
///   one row "f s r d re im" per record (f is the frequency index)
RecordSet read_frequency_records(const std::string& path);
void write_frequency_records(const std::string& path, const RecordSet& records);

/// Text format:
///   nx ny h x0 y0            (grid nodes per axis, spacing, lower-left corner)
///   one row "x y vp vs" per mesh node, in node order
void write_model_grid(const std::string& path, const ModelVector& model, const Mesh& mesh);

struct ModelGrid {
    int nx = 0;
    int ny = 0;
    double h = 0.0;
    Point origin{};
    std::vector<Point> points;
    ModelVector model;
};

ModelGrid read_model_grid(const std::string& path);
/// Reads a grid and checks its header and node positions against the mesh.
ModelVector read_model_grid(const std::string& path, const Mesh& mesh);

/// Per-node scalar values (gradients, masks) in the model-grid layout with
/// one value column per block.
void write_node_values(const std::string& path, const Mesh& mesh, const std::vector<std::vector<double>>& columns,
                       const std::vector<std::string>& names);

/// "group iteration misfit step gradient_norm" rows.
void write_convergence_log(const std::string& path, const std::vector<IterationLog>& log);

/// Frequency-domain version of the observed time records, cached in
/// cache_dir under a name derived from the frequency list and the record
/// file contents. An empty cache_dir disables caching.
RecordSet observed_from_time_records(const std::string& records_path, const std::vector<double>& omegas,
                                     std::size_t sources, std::size_t receivers, std::size_t directions,
                                     const std::string& cache_dir);

}  // namespace tfwi
