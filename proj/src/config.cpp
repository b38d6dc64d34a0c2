#include "tfwi/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "tfwi/error.hpp"
#include "tfwi/signal.hpp"

namespace tfwi {

void WaveletSettings::validate() const
{
    if (!(peak_frequency > 0.0)) {
        throw Error(ErrorCode::validation_error, "wavelet.peak_frequency must be positive");
    }
    if (!(dt > 0.0)) {
        throw Error(ErrorCode::validation_error, "wavelet.dt must be positive");
    }
    if (samples < 2) {
        throw Error(ErrorCode::validation_error, "wavelet.samples must be at least 2");
    }
}

OperatorSettings RunConfig::operator_settings() const
{
    OperatorSettings s;
    s.density = ambient.density;
    s.pml = pml;
    s.pml.width = geometry.pml_width > 0.0 ? geometry.pml_width : pml.width;
    s.discretization = discretization;
    return s;
}

OptimizerSettings RunConfig::resolved_optimizer() const
{
    OptimizerSettings o = optimizer;
    o.first_step = first_step_fraction * ambient.vs;
    return o;
}

void RunConfig::validate() const
{
    geometry.validate();
    ambient.validate();
    operator_settings().pml.validate();
    discretization.validate();
    schedule.validate();
    optimizer.validate();
    if (!(first_step_fraction > 0.0)) {
        throw Error(ErrorCode::validation_error, "optimizer.first_step_fraction must be positive");
    }
    mask.validate();
    wavelet.validate();
    sweep.degrees.validate();
    if (!(sweep.omega_start > 0.0) || !(sweep.step > 0.0) || sweep.omega_end < sweep.omega_start) {
        throw Error(ErrorCode::validation_error, "sweep requires omega_start > 0, step > 0, omega_end >= omega_start");
    }
    if (!(validation.omega > 0.0)) {
        throw Error(ErrorCode::validation_error, "validation.omega must be positive");
    }
    if (!(validation.exclusion_radius >= 0.0)) {
        throw Error(ErrorCode::validation_error, "validation.exclusion_radius must be non-negative");
    }
    if (!(validation.sample_spacing > 0.0)) {
        throw Error(ErrorCode::validation_error, "validation.sample_spacing must be positive");
    }
    for (double w : forward_omegas) {
        if (!(w > 0.0)) {
            throw Error(ErrorCode::validation_error, "forward.omegas must be positive");
        }
    }
    for (const auto& inc : reference_inclusions) {
        if (!(inc.radius > 0.0) || !(inc.vs > 0.0) || !(inc.vp * inc.vp > 2.0 * inc.vs * inc.vs)) {
            throw Error(ErrorCode::validation_error,
                        "reference.inclusions need radius > 0, vs > 0 and vp > sqrt(2) vs");
        }
    }
    if (!stations.sources.empty() || !stations.receivers.empty()) {
        try {
            stations.validate(build_tunnel_mesh(geometry));
        } catch (const Error& e) {
            throw Error(ErrorCode::validation_error, std::string("stations: ") + e.what());
        }
    }
}

namespace {

/// Map node whose keys must all be consumed.
class Section {
public:
    Section(YAML::Node node, std::string path, const std::string& source)
        : node_(std::move(node)), path_(std::move(path)), source_(&source)
    {
        if (node_ && !node_.IsNull() && !node_.IsMap()) {
            fail(node_, "'" + path_ + "' must be a mapping");
        }
    }

    YAML::Node child(const std::string& key)
    {
        used_.insert(key);
        // Const lookups of absent keys give undefined (falsy) nodes.
        static const YAML::Node empty(YAML::NodeType::Map);
        const YAML::Node& from = node_ && node_.IsMap() ? node_ : empty;
        return from[key];
    }

    Section section(const std::string& key) { return item(child(key), qualified(key)); }
    [[nodiscard]] Section item(const YAML::Node& n, const std::string& path) const { return {n, path, *source_}; }

    template <class T>
    void get(const std::string& key, T& out)
    {
        const YAML::Node n = child(key);
        if (n) {
            out = convert<T>(n, qualified(key));
        }
    }

    template <class T>
    T convert(const YAML::Node& n, const std::string& name) const
    {
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            fail(n, "invalid value for '" + name + "'");
        }
    }

    [[nodiscard]] Vec2 pair(const YAML::Node& n, const std::string& name) const
    {
        if (!n.IsSequence() || n.size() != 2) {
            fail(n, "'" + name + "' must be a pair [x, y]");
        }
        return {convert<double>(n[0], name), convert<double>(n[1], name)};
    }

    [[nodiscard]] std::vector<double> numbers(const YAML::Node& n, const std::string& name) const
    {
        if (!n.IsSequence()) {
            fail(n, "'" + name + "' must be a list of numbers");
        }
        std::vector<double> out;
        for (const auto& v : n) {
            out.push_back(convert<double>(v, name));
        }
        return out;
    }

    void list(const std::string& key, const std::function<void(const YAML::Node&, const std::string&)>& each)
    {
        const YAML::Node n = child(key);
        if (!n) {
            return;
        }
        if (!n.IsSequence()) {
            fail(n, "'" + qualified(key) + "' must be a list");
        }
        for (std::size_t i = 0; i < n.size(); ++i) {
            each(n[i], qualified(key) + "[" + std::to_string(i) + "]");
        }
    }

    void finish() const
    {
        if (!node_ || !node_.IsMap()) {
            return;
        }
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (used_.count(key) == 0) {
                fail(kv.first, "unknown key '" + qualified(key) + "'");
            }
        }
    }

    [[noreturn]] void fail(const YAML::Node& n, const std::string& message) const
    {
        std::ostringstream msg;
        msg << *source_;
        if (n.Mark().line >= 0) {
            msg << ":" << n.Mark().line + 1;
        }
        msg << ": " << message;
        throw Error(ErrorCode::parse_error, msg.str());
    }

    [[nodiscard]] std::string qualified(const std::string& key) const
    {
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    YAML::Node node_;
    std::string path_;
    const std::string* source_;
    std::set<std::string> used_;
};

void read_geometry(Section s, TunnelGeometry& g)
{
    s.get("domain_width", g.domain_width);
    s.get("depth_above_tunnel", g.depth_above_tunnel);
    s.get("tunnel_height", g.tunnel_height);
    s.get("depth_below_tunnel", g.depth_below_tunnel);
    s.get("tunnel_length", g.tunnel_length);
    s.get("pml_width", g.pml_width);
    s.get("element_size", g.element_size);
    s.get("pml_on_top", g.pml_on_top);
    s.finish();
}

void read_stations(Section s, StationLayout& layout)
{
    s.list("sources", [&](const YAML::Node& n, const std::string& path) {
        Section item = s.item(n, path);
        Source src;
        if (const auto p = item.child("position")) {
            src.position = item.pair(p, path + ".position");
        } else {
            item.fail(n, "'" + path + ".position' is required");
        }
        if (const auto d = item.child("direction")) {
            src.direction = item.pair(d, path + ".direction");
        }
        item.finish();
        layout.sources.push_back(src);
    });
    s.list("receivers", [&](const YAML::Node& n, const std::string& path) {
        Section item = s.item(n, path);
        Receiver rec;
        if (const auto p = item.child("position")) {
            rec.position = item.pair(p, path + ".position");
        } else {
            item.fail(n, "'" + path + ".position' is required");
        }
        if (const auto d = item.child("directions")) {
            if (!d.IsSequence()) {
                item.fail(d, "'" + path + ".directions' must be a list of pairs");
            }
            rec.directions.clear();
            for (const auto& v : d) {
                rec.directions.push_back(item.pair(v, path + ".directions"));
            }
        }
        item.finish();
        layout.receivers.push_back(rec);
    });
    s.finish();
}

void read_schedule(Section& parent, FrequencySchedule& schedule)
{
    const YAML::Node n = parent.child("schedule");
    if (!n) {
        return;
    }
    if (n.IsScalar()) {
        if (n.as<std::string>() != "blind_test") {
            parent.fail(n, "'schedule' must be 'blind_test' or a list of frequency groups");
        }
        schedule = FrequencySchedule::blind_test();
        return;
    }
    if (!n.IsSequence()) {
        parent.fail(n, "'schedule' must be 'blind_test' or a list of frequency groups");
    }
    schedule.groups.clear();
    for (const auto& g : n) {
        schedule.groups.push_back(parent.numbers(g, "schedule"));
    }
}

void read_degrees(Section& parent, DegreeSchedule& degrees)
{
    parent.list("degrees", [&](const YAML::Node& n, const std::string& path) {
        Section item = parent.item(n, path);
        DegreeSchedule::Breakpoint b;
        item.get("omega_from", b.omega_from);
        item.get("degree", b.degree);
        item.finish();
        degrees.breakpoints.push_back(b);
    });
}

void read_config(Section root, RunConfig& c)
{
    if (!root.child("geometry")) {
        throw Error(ErrorCode::validation_error, "'geometry' section is required");
    }
    read_geometry(root.section("geometry"), c.geometry);
    {
        Section s = root.section("ambient");
        s.get("vp", c.ambient.vp);
        s.get("vs", c.ambient.vs);
        s.get("density", c.ambient.density);
        s.finish();
    }
    read_stations(root.section("stations"), c.stations);
    {
        Section s = root.section("pml");
        s.get("c_pml", c.pml.c_pml);
        s.get("omega_c_ratio", c.pml.omega_c_ratio);
        s.finish();
    }
    {
        Section s = root.section("discretization");
        s.get("degree", c.discretization.degree);
        s.get("quadrature_points", c.discretization.quadrature_points);
        s.get("pml_extra_points", c.discretization.pml_extra_points);
        s.finish();
    }
    read_schedule(root, c.schedule);
    {
        Section s = root.section("optimizer");
        s.get("max_iterations", c.optimizer.max_iterations);
        s.get("stop_threshold", c.optimizer.stop_threshold);
        s.get("history", c.optimizer.history);
        s.get("line_search_rounds", c.optimizer.line_search_rounds);
        s.get("max_backtracks", c.optimizer.max_backtracks);
        s.get("first_step_fraction", c.first_step_fraction);
        s.get("strict", c.optimizer.strict);
        s.finish();
    }
    {
        Section s = root.section("mask");
        s.get("station_radius", c.mask.station_radius);
        s.get("station_transition", c.mask.station_transition);
        s.get("surface_distance", c.mask.surface_distance);
        s.get("surface_transition", c.mask.surface_transition);
        s.finish();
    }
    {
        Section s = root.section("wavelet");
        s.get("enabled", c.wavelet.enabled);
        s.get("peak_frequency", c.wavelet.peak_frequency);
        s.get("dt", c.wavelet.dt);
        s.get("t0", c.wavelet.t0);
        s.get("samples", c.wavelet.samples);
        s.finish();
    }
    {
        Section s = root.section("sweep");
        s.get("omega_start", c.sweep.omega_start);
        s.get("omega_end", c.sweep.omega_end);
        s.get("step", c.sweep.step);
        read_degrees(s, c.sweep.degrees);
        s.finish();
    }
    {
        Section s = root.section("validation");
        s.get("omega", c.validation.omega);
        s.get("exclusion_radius", c.validation.exclusion_radius);
        s.get("sample_spacing", c.validation.sample_spacing);
        s.finish();
    }
    {
        Section s = root.section("forward");
        if (const auto n = s.child("omegas")) {
            c.forward_omegas = s.numbers(n, "forward.omegas");
        }
        s.finish();
    }
    {
        Section s = root.section("reference");
        s.list("inclusions", [&](const YAML::Node& n, const std::string& path) {
            Section item = s.item(n, path);
            Inclusion inc;
            if (const auto p = item.child("center")) {
                inc.center = item.pair(p, path + ".center");
            }
            item.get("radius", inc.radius);
            inc.vp = c.ambient.vp;
            inc.vs = c.ambient.vs;
            item.get("vp", inc.vp);
            item.get("vs", inc.vs);
            item.finish();
            c.reference_inclusions.push_back(inc);
        });
        s.finish();
    }
    {
        Section s = root.section("paths");
        s.get("model", c.paths.model);
        s.get("initial_model", c.paths.initial_model);
        s.get("reference_model", c.paths.reference_model);
        s.get("observed_time_records", c.paths.observed_time_records);
        s.get("observed_records", c.paths.observed_records);
        s.get("output_dir", c.paths.output_dir);
        s.get("cache_dir", c.paths.cache_dir);
        s.finish();
    }
    root.finish();
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source_name)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        std::ostringstream msg;
        msg << source_name << ":" << e.mark.line + 1 << ": " << e.msg;
        throw Error(ErrorCode::parse_error, msg.str());
    }
    if (!root.IsMap()) {
        throw Error(ErrorCode::parse_error, source_name + ": configuration must be a mapping");
    }
    RunConfig config;
    read_config(Section(root, "", source_name), config);
    config.validate();
    return config;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::io_error, "cannot open config file " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path);
}

namespace {

void emit_pair(YAML::Emitter& out, Vec2 v)
{
    out << YAML::Flow << YAML::BeginSeq << v.x << v.y << YAML::EndSeq;
}

}  // namespace

std::string dump_config(const RunConfig& c)
{
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;

    const auto& g = c.geometry;
    out << YAML::Key << "geometry" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "domain_width" << YAML::Value << g.domain_width;
    out << YAML::Key << "depth_above_tunnel" << YAML::Value << g.depth_above_tunnel;
    out << YAML::Key << "tunnel_height" << YAML::Value << g.tunnel_height;
    out << YAML::Key << "depth_below_tunnel" << YAML::Value << g.depth_below_tunnel;
    out << YAML::Key << "tunnel_length" << YAML::Value << g.tunnel_length;
    out << YAML::Key << "pml_width" << YAML::Value << g.pml_width;
    out << YAML::Key << "element_size" << YAML::Value << g.element_size;
    out << YAML::Key << "pml_on_top" << YAML::Value << g.pml_on_top;
    out << YAML::EndMap;

    out << YAML::Key << "ambient" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "vp" << YAML::Value << c.ambient.vp;
    out << YAML::Key << "vs" << YAML::Value << c.ambient.vs;
    out << YAML::Key << "density" << YAML::Value << c.ambient.density;
    out << YAML::EndMap;

    out << YAML::Key << "stations" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "sources" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : c.stations.sources) {
        out << YAML::BeginMap << YAML::Key << "position" << YAML::Value;
        emit_pair(out, s.position);
        out << YAML::Key << "direction" << YAML::Value;
        emit_pair(out, s.direction);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "receivers" << YAML::Value << YAML::BeginSeq;
    for (const auto& r : c.stations.receivers) {
        out << YAML::BeginMap << YAML::Key << "position" << YAML::Value;
        emit_pair(out, r.position);
        out << YAML::Key << "directions" << YAML::Value << YAML::BeginSeq;
        for (const auto& d : r.directions) {
            emit_pair(out, d);
        }
        out << YAML::EndSeq << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;

    out << YAML::Key << "pml" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "c_pml" << YAML::Value << c.pml.c_pml;
    out << YAML::Key << "omega_c_ratio" << YAML::Value << c.pml.omega_c_ratio;
    out << YAML::EndMap;

    out << YAML::Key << "discretization" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "degree" << YAML::Value << c.discretization.degree;
    out << YAML::Key << "quadrature_points" << YAML::Value << c.discretization.quadrature_points;
    out << YAML::Key << "pml_extra_points" << YAML::Value << c.discretization.pml_extra_points;
    out << YAML::EndMap;

    out << YAML::Key << "schedule" << YAML::Value << YAML::BeginSeq;
    for (const auto& group : c.schedule.groups) {
        out << YAML::Flow << group;
    }
    out << YAML::EndSeq;

    const auto& o = c.optimizer;
    out << YAML::Key << "optimizer" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "max_iterations" << YAML::Value << o.max_iterations;
    out << YAML::Key << "stop_threshold" << YAML::Value << o.stop_threshold;
    out << YAML::Key << "history" << YAML::Value << o.history;
    out << YAML::Key << "line_search_rounds" << YAML::Value << o.line_search_rounds;
    out << YAML::Key << "max_backtracks" << YAML::Value << o.max_backtracks;
    out << YAML::Key << "first_step_fraction" << YAML::Value << c.first_step_fraction;
    out << YAML::Key << "strict" << YAML::Value << o.strict;
    out << YAML::EndMap;

    out << YAML::Key << "mask" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "station_radius" << YAML::Value << c.mask.station_radius;
    out << YAML::Key << "station_transition" << YAML::Value << c.mask.station_transition;
    out << YAML::Key << "surface_distance" << YAML::Value << c.mask.surface_distance;
    out << YAML::Key << "surface_transition" << YAML::Value << c.mask.surface_transition;
    out << YAML::EndMap;

    out << YAML::Key << "wavelet" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "enabled" << YAML::Value << c.wavelet.enabled;
    out << YAML::Key << "peak_frequency" << YAML::Value << c.wavelet.peak_frequency;
    out << YAML::Key << "dt" << YAML::Value << c.wavelet.dt;
    out << YAML::Key << "t0" << YAML::Value << c.wavelet.t0;
    out << YAML::Key << "samples" << YAML::Value << c.wavelet.samples;
    out << YAML::EndMap;

    out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "omega_start" << YAML::Value << c.sweep.omega_start;
    out << YAML::Key << "omega_end" << YAML::Value << c.sweep.omega_end;
    out << YAML::Key << "step" << YAML::Value << c.sweep.step;
    out << YAML::Key << "degrees" << YAML::Value << YAML::BeginSeq;
    for (const auto& b : c.sweep.degrees.breakpoints) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "omega_from" << YAML::Value << b.omega_from
            << YAML::Key << "degree" << YAML::Value << b.degree << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;

    out << YAML::Key << "validation" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "omega" << YAML::Value << c.validation.omega;
    out << YAML::Key << "exclusion_radius" << YAML::Value << c.validation.exclusion_radius;
    out << YAML::Key << "sample_spacing" << YAML::Value << c.validation.sample_spacing;
    out << YAML::EndMap;

    out << YAML::Key << "forward" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "omegas" << YAML::Value << YAML::Flow << c.forward_omegas;
    out << YAML::EndMap;

    out << YAML::Key << "reference" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "inclusions" << YAML::Value << YAML::BeginSeq;
    for (const auto& inc : c.reference_inclusions) {
        out << YAML::BeginMap << YAML::Key << "center" << YAML::Value;
        emit_pair(out, inc.center);
        out << YAML::Key << "radius" << YAML::Value << inc.radius;
        out << YAML::Key << "vp" << YAML::Value << inc.vp;
        out << YAML::Key << "vs" << YAML::Value << inc.vs;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;

    const auto& p = c.paths;
    out << YAML::Key << "paths" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "model" << YAML::Value << p.model;
    out << YAML::Key << "initial_model" << YAML::Value << p.initial_model;
    out << YAML::Key << "reference_model" << YAML::Value << p.reference_model;
    out << YAML::Key << "observed_time_records" << YAML::Value << p.observed_time_records;
    out << YAML::Key << "observed_records" << YAML::Value << p.observed_records;
    out << YAML::Key << "output_dir" << YAML::Value << p.output_dir;
    out << YAML::Key << "cache_dir" << YAML::Value << p.cache_dir;
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

ModelVector build_model(const Mesh& mesh, const AmbientProperties& ambient, const std::vector<Inclusion>& inclusions)
{
    ModelVector model = ModelVector::homogeneous(mesh.node_count(), ambient.vp, ambient.vs);
    for (std::size_t n = 0; n < mesh.node_count(); ++n) {
        const Point p = mesh.node(static_cast<int>(n));
        for (const auto& inc : inclusions) {
            if ((p - inc.center).norm() <= inc.radius) {
                model.vp()[n] = inc.vp;
                model.vs()[n] = inc.vs;
            }
        }
    }
    return model;
}

ComplexMatrix source_amplitudes(const WaveletSettings& wavelet, const std::vector<double>& omegas,
                                std::size_t sources)
{
    const auto nf = static_cast<Eigen::Index>(omegas.size());
    const auto ns = static_cast<Eigen::Index>(sources);
    ComplexMatrix out = ComplexMatrix::Ones(nf, ns);
    if (!wavelet.enabled) {
        return out;
    }
    wavelet.validate();
    const TimeSeries w = ricker_series(wavelet.peak_frequency, wavelet.samples, wavelet.dt, wavelet.t0);
    for (Eigen::Index f = 0; f < nf; ++f) {
        out.row(f).setConstant(dft(w, omegas[static_cast<std::size_t>(f)]));
    }
    return out;
}

}  // namespace tfwi
