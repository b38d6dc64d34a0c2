#include "tfwi/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "tfwi/error.hpp"

namespace tfwi {

namespace {

std::ifstream open_in(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::io_error, "cannot open " + path);
    }
    return in;
}

std::ofstream open_out(const std::string& path)
{
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::filesystem::create_directories(parent);
    }
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::io_error, "cannot write " + path);
    }
    out << std::setprecision(17);
    return out;
}

[[noreturn]] void malformed(const std::string& path, std::size_t line, const std::string& what)
{
    throw Error(ErrorCode::parse_error, path + ":" + std::to_string(line) + ": " + what);
}

/// Reads the next non-empty line; false at end of file.
bool next_line(std::istream& in, std::string& line, std::size_t& number)
{
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") != std::string::npos) {
            return true;
        }
    }
    return false;
}

std::string format_id(const TraceId& id)
{
    return std::to_string(id.source) + ":" + std::to_string(id.receiver) + ":" + std::to_string(id.direction);
}

}  // namespace

TimeRecordTable read_time_records(const std::string& path)
{
    auto in = open_in(path);
    std::string line;
    std::size_t number = 0;
    if (!next_line(in, line, number)) {
        malformed(path, number, "missing header");
    }
    std::istringstream header(line);
    long long nt = 0;
    long long ntraces = 0;
    double dt = 0.0;
    double t0 = 0.0;
    if (!(header >> nt >> dt >> t0 >> ntraces) || nt < 2 || ntraces < 0) {
        malformed(path, number, "header must be 'nt dt t0 ntraces' with nt >= 2");
    }
    if (!(dt > 0.0)) {
        malformed(path, number, "dt must be positive");
    }
    TimeRecordTable table;
    if (!next_line(in, line, number)) {
        malformed(path, number, "missing trace id line");
    }
    std::istringstream ids(line);
    std::string token;
    while (ids >> token) {
        TraceId id;
        char c1 = 0;
        char c2 = 0;
        std::istringstream parse(token);
        if (!(parse >> id.source >> c1 >> id.receiver >> c2 >> id.direction) || c1 != ':' || c2 != ':') {
            malformed(path, number, "trace id '" + token + "' is not s:r:d");
        }
        table.ids.push_back(id);
    }
    if (static_cast<long long>(table.ids.size()) != ntraces) {
        malformed(path, number, "expected " + std::to_string(ntraces) + " trace ids");
    }
    table.traces.assign(table.ids.size(), TimeSeries{std::vector<double>(static_cast<std::size_t>(nt)), dt, t0});
    for (long long n = 0; n < nt; ++n) {
        if (!next_line(in, line, number)) {
            malformed(path, number, "expected " + std::to_string(nt) + " sample rows, found " + std::to_string(n));
        }
        std::istringstream row(line);
        for (auto& trace : table.traces) {
            if (!(row >> trace.samples[static_cast<std::size_t>(n)])) {
                malformed(path, number, "row has fewer than " + std::to_string(ntraces) + " samples");
            }
        }
        double extra = 0.0;
        if (row >> extra) {
            malformed(path, number, "row has more than " + std::to_string(ntraces) + " samples");
        }
    }
    if (next_line(in, line, number)) {
        malformed(path, number, "more than nt = " + std::to_string(nt) + " sample rows");
    }
    return table;
}

void write_time_records(const std::string& path, const TimeRecordTable& table)
{
    if (table.ids.size() != table.traces.size() || table.traces.empty()) {
        throw Error(ErrorCode::invalid_argument, "time record table needs one id per trace");
    }
    const auto& first = table.traces.front();
    for (const auto& t : table.traces) {
        t.validate();
        if (t.samples.size() != first.samples.size() || t.dt != first.dt || t.t0 != first.t0) {
            throw Error(ErrorCode::invalid_argument, "all traces must share one time axis");
        }
    }
    auto out = open_out(path);
    out << first.samples.size() << ' ' << first.dt << ' ' << first.t0 << ' ' << table.traces.size() << '\n';
    for (std::size_t i = 0; i < table.ids.size(); ++i) {
        out << (i > 0 ? " " : "") << format_id(table.ids[i]);
    }
    out << '\n';
    for (std::size_t n = 0; n < first.samples.size(); ++n) {
        for (std::size_t i = 0; i < table.traces.size(); ++i) {
            out << (i > 0 ? " " : "") << table.traces[i].samples[n];
        }
        out << '\n';
    }
}

RecordSet time_records_to_frequency(const TimeRecordTable& table, const std::vector<double>& omegas,
                                    std::size_t sources, std::size_t receivers, std::size_t directions)
{
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::size_t> lookup;
    for (std::size_t i = 0; i < table.ids.size(); ++i) {
        const auto& id = table.ids[i];
        lookup[{id.source, id.receiver, id.direction}] = i;
    }
    std::vector<std::string> missing;
    for (std::size_t s = 0; s < sources; ++s) {
        for (std::size_t r = 0; r < receivers; ++r) {
            for (std::size_t d = 0; d < directions; ++d) {
                if (lookup.count({s, r, d}) == 0) {
                    missing.push_back(format_id({s, r, d}));
                }
            }
        }
    }
    if (!missing.empty()) {
        std::ostringstream msg;
        msg << "missing traces:";
        for (const auto& m : missing) {
            msg << ' ' << m;
        }
        throw Error(ErrorCode::not_found, msg.str());
    }
    RecordSet records(omegas, sources, receivers, directions);
    for (std::size_t s = 0; s < sources; ++s) {
        for (std::size_t r = 0; r < receivers; ++r) {
            for (std::size_t d = 0; d < directions; ++d) {
                const auto& trace = table.traces[lookup.at({s, r, d})];
                for (std::size_t f = 0; f < omegas.size(); ++f) {
                    records.at(f, s, r, d) = dft(trace, omegas[f]);
                }
            }
        }
    }
    return records;
}

RecordSet read_frequency_records(const std::string& path)
{
    auto in = open_in(path);
    std::string line;
    std::size_t number = 0;
    std::size_t nf = 0;
    std::size_t ns = 0;
    std::size_t nr = 0;
    std::size_t nd = 0;
    if (!next_line(in, line, number) || !(std::istringstream(line) >> nf >> ns >> nr >> nd)) {
        malformed(path, number, "header must be 'nf ns nr nd'");
    }
    if (!next_line(in, line, number)) {
        malformed(path, number, "missing frequency list");
    }
    std::vector<double> omegas;
    {
        std::istringstream row(line);
        double w = 0.0;
        while (row >> w) {
            omegas.push_back(w);
        }
    }
    if (omegas.size() != nf) {
        malformed(path, number, "expected " + std::to_string(nf) + " frequencies");
    }
    RecordSet records;
    try {
        records = RecordSet(omegas, ns, nr, nd);
    } catch (const Error& e) {
        malformed(path, number, e.what());
    }
    std::vector<char> seen(records.size(), 0);
    while (next_line(in, line, number)) {
        std::istringstream row(line);
        std::size_t f = 0;
        std::size_t s = 0;
        std::size_t r = 0;
        std::size_t d = 0;
        double re = 0.0;
        double im = 0.0;
        if (!(row >> f >> s >> r >> d >> re >> im)) {
            malformed(path, number, "record row must be 'f s r d re im'");
        }
        if (f >= nf || s >= ns || r >= nr || d >= nd) {
            malformed(path, number, "record index out of range");
        }
        const auto i = records.index(f, s, r, d);
        records.values()[i] = {re, im};
        seen[i] = 1;
    }
    const auto missing = static_cast<std::size_t>(std::count(seen.begin(), seen.end(), 0));
    if (missing > 0) {
        throw Error(ErrorCode::parse_error, path + ": " + std::to_string(missing) + " records missing");
    }
    return records;
}

void write_frequency_records(const std::string& path, const RecordSet& records)
{
    auto out = open_out(path);
    out << records.frequency_count() << ' ' << records.source_count() << ' ' << records.receiver_count() << ' '
        << records.direction_count() << '\n';
    for (std::size_t f = 0; f < records.frequency_count(); ++f) {
        out << (f > 0 ? " " : "") << records.omegas()[f];
    }
    out << '\n';
    for (std::size_t f = 0; f < records.frequency_count(); ++f) {
        for (std::size_t s = 0; s < records.source_count(); ++s) {
            for (std::size_t r = 0; r < records.receiver_count(); ++r) {
                for (std::size_t d = 0; d < records.direction_count(); ++d) {
                    const Complex v = records.at(f, s, r, d);
                    out << f << ' ' << s << ' ' << r << ' ' << d << ' ' << v.real() << ' ' << v.imag() << '\n';
                }
            }
        }
    }
}

void write_model_grid(const std::string& path, const ModelVector& model, const Mesh& mesh)
{
    if (model.node_count() != mesh.node_count()) {
        throw Error(ErrorCode::dimension_mismatch, "model does not match the mesh");
    }
    auto out = open_out(path);
    out << mesh.grid_nodes_x() << ' ' << mesh.grid_nodes_y() << ' ' << mesh.element_size() << ' ' << mesh.origin().x
        << ' ' << mesh.origin().y << '\n';
    for (std::size_t n = 0; n < mesh.node_count(); ++n) {
        const Point p = mesh.node(static_cast<int>(n));
        out << p.x << ' ' << p.y << ' ' << model.vp()[n] << ' ' << model.vs()[n] << '\n';
    }
}

ModelGrid read_model_grid(const std::string& path)
{
    auto in = open_in(path);
    std::string line;
    std::size_t number = 0;
    ModelGrid grid;
    if (!next_line(in, line, number) ||
        !(std::istringstream(line) >> grid.nx >> grid.ny >> grid.h >> grid.origin.x >> grid.origin.y)) {
        malformed(path, number, "header must be 'nx ny h x0 y0'");
    }
    if (grid.nx < 2 || grid.ny < 2 || !(grid.h > 0.0)) {
        malformed(path, number, "grid needs nx, ny >= 2 and h > 0");
    }
    std::vector<double> vp;
    std::vector<double> vs;
    while (next_line(in, line, number)) {
        std::istringstream row(line);
        Point p;
        double a = 0.0;
        double b = 0.0;
        if (!(row >> p.x >> p.y >> a >> b)) {
            malformed(path, number, "row must be 'x y vp vs'");
        }
        if (!(a > 0.0) || !(b > 0.0)) {
            malformed(path, number, "velocities must be positive");
        }
        grid.points.push_back(p);
        vp.push_back(a);
        vs.push_back(b);
    }
    grid.model = ModelVector(std::move(vp), std::move(vs));
    return grid;
}

ModelVector read_model_grid(const std::string& path, const Mesh& mesh)
{
    ModelGrid grid = read_model_grid(path);
    const double tol = 1e-9 * mesh.element_size();
    if (grid.nx != mesh.grid_nodes_x() || grid.ny != mesh.grid_nodes_y() ||
        std::abs(grid.h - mesh.element_size()) > tol || (grid.origin - mesh.origin()).norm() > tol) {
        std::ostringstream msg;
        msg << path << ": grid header " << grid.nx << " x " << grid.ny << ", h = " << grid.h
            << " does not match the mesh (" << mesh.grid_nodes_x() << " x " << mesh.grid_nodes_y()
            << ", h = " << mesh.element_size() << ")";
        throw Error(ErrorCode::dimension_mismatch, msg.str());
    }
    if (grid.points.size() != mesh.node_count()) {
        throw Error(ErrorCode::dimension_mismatch, path + ": " + std::to_string(grid.points.size()) +
                                                       " rows for " + std::to_string(mesh.node_count()) + " nodes");
    }
    for (std::size_t n = 0; n < grid.points.size(); ++n) {
        if ((grid.points[n] - mesh.node(static_cast<int>(n))).norm() > tol) {
            throw Error(ErrorCode::dimension_mismatch, path + ": row " + std::to_string(n + 2) +
                                                           " does not match node " + std::to_string(n));
        }
    }
    return grid.model;
}

void write_node_values(const std::string& path, const Mesh& mesh, const std::vector<std::vector<double>>& columns,
                       const std::vector<std::string>& names)
{
    if (columns.size() != names.size()) {
        throw Error(ErrorCode::invalid_argument, "one name per column required");
    }
    for (const auto& c : columns) {
        if (c.size() != mesh.node_count()) {
            throw Error(ErrorCode::dimension_mismatch, "node column does not match the mesh");
        }
    }
    auto out = open_out(path);
    out << "# x y";
    for (const auto& n : names) {
        out << ' ' << n;
    }
    out << '\n';
    for (std::size_t n = 0; n < mesh.node_count(); ++n) {
        const Point p = mesh.node(static_cast<int>(n));
        out << p.x << ' ' << p.y;
        for (const auto& c : columns) {
            out << ' ' << c[n];
        }
        out << '\n';
    }
}

void write_convergence_log(const std::string& path, const std::vector<IterationLog>& log)
{
    auto out = open_out(path);
    out << "group iteration misfit step gradient_norm\n";
    for (const auto& e : log) {
        out << e.group << ' ' << e.iteration << ' ' << e.misfit << ' ' << e.step << ' ' << e.gradient_norm << '\n';
    }
}

namespace {

/// FNV-1a over bytes, as 16 hex digits.
std::string fingerprint(const std::string& bytes)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

}  // namespace

RecordSet observed_from_time_records(const std::string& records_path, const std::vector<double>& omegas,
                                     std::size_t sources, std::size_t receivers, std::size_t directions,
                                     const std::string& cache_dir)
{
    std::string cache_file;
    if (!cache_dir.empty()) {
        auto in = open_in(records_path);
        std::stringstream content;
        content << in.rdbuf();
        std::ostringstream schedule;
        schedule << std::setprecision(17) << sources << ' ' << receivers << ' ' << directions;
        for (double w : omegas) {
            schedule << ' ' << w;
        }
        cache_file = (std::filesystem::path(cache_dir) /
                      ("dft_" + fingerprint(schedule.str()) + "_" + fingerprint(content.str()) + ".txt"))
                         .string();
        if (std::filesystem::exists(cache_file)) {
            return read_frequency_records(cache_file);
        }
    }
    RecordSet records =
        time_records_to_frequency(read_time_records(records_path), omegas, sources, receivers, directions);
    if (!cache_file.empty()) {
        write_frequency_records(cache_file, records);
    }
    return records;
}

}  // namespace tfwi
