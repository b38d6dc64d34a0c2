#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tfwi/config.hpp"
#include "tfwi/error.hpp"
#include "tfwi/forward.hpp"
#include "tfwi/io.hpp"
#include "tfwi/pipeline.hpp"

namespace fs = std::filesystem;
using namespace tfwi;

namespace {

struct Options {
    std::string config;
    std::string output_dir;
};

fs::path output_dir(const RunConfig& config, const Options& opt)
{
    const fs::path dir = opt.output_dir.empty() ? fs::path(config.paths.output_dir) : fs::path(opt.output_dir);
    fs::create_directories(dir);
    return dir;
}

std::string group_name(std::size_t g)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "model_group_%02zu.txt", g + 1);
    return buf;
}

ModelVector model_or_inclusions(const std::string& path, const RunConfig& config, const Mesh& mesh)
{
    if (!path.empty()) {
        return read_model_grid(path, mesh);
    }
    return build_model(mesh, config.ambient, config.reference_inclusions);
}

std::vector<double> forward_omegas(const RunConfig& config)
{
    return config.forward_omegas.empty() ? config.schedule.all_frequencies() : config.forward_omegas;
}

int run_forward(const Options& opt)
{
    const RunConfig config = load_config(opt.config);
    const Mesh mesh = build_tunnel_mesh(config.geometry);
    const ModelVector model = model_or_inclusions(config.paths.model, config, mesh);
    const ForwardModel forward(mesh, config.operator_settings());
    const auto omegas = forward_omegas(config);
    const ComplexMatrix amplitudes = source_amplitudes(config.wavelet, omegas, config.stations.sources.size());
    const fs::path dir = output_dir(config, opt);

    RecordSet records(omegas, config.stations.sources.size(), config.stations.receivers.size(),
                      config.stations.directions_per_receiver());
    for (std::size_t f = 0; f < omegas.size(); ++f) {
        std::vector<Complex> amp(static_cast<std::size_t>(amplitudes.cols()));
        for (std::size_t s = 0; s < amp.size(); ++s) {
            amp[s] = amplitudes(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(s));
        }
        const auto fields = forward_solve(forward, model, omegas[f], config.stations, amp);
        for (std::size_t s = 0; s < fields.size(); ++s) {
            records.set_slice(f, s, sample_receivers(forward, fields[s], config.stations));
            std::vector<std::vector<double>> columns(4, std::vector<double>(mesh.node_count()));
            for (std::size_t n = 0; n < mesh.node_count(); ++n) {
                for (int c = 0; c < 2; ++c) {
                    const Complex u = fields[s].values[DofMap::node_dof(static_cast<int>(n), c)];
                    columns[static_cast<std::size_t>(2 * c)][n] = u.real();
                    columns[static_cast<std::size_t>(2 * c + 1)][n] = u.imag();
                }
            }
            char name[64];
            std::snprintf(name, sizeof name, "field_f%03zu_s%02zu.txt", f, s);
            write_node_values((dir / name).string(), mesh, columns, {"ux_re", "ux_im", "uy_re", "uy_im"});
        }
    }
    write_frequency_records((dir / "records.txt").string(), records);
    std::cout << "forward: " << omegas.size() << " frequencies, " << records.source_count() << " sources -> "
              << dir.string() << "\n";
    return 0;
}

int run_greens(const Options& opt, std::size_t source_index)
{
    const RunConfig config = load_config(opt.config);
    const Mesh mesh = build_tunnel_mesh(config.geometry);
    if (source_index >= config.stations.sources.size()) {
        throw Error(ErrorCode::out_of_range, "source index " + std::to_string(source_index) + " out of range");
    }
    const ModelVector model = model_or_inclusions(config.paths.model, config, mesh);
    const auto& sw = config.sweep;
    const RecordSet spectra = greens_sweep(mesh, config.operator_settings(), model, config.stations.sources[source_index],
                                           config.stations.receivers, sw.omega_start, sw.omega_end, sw.step,
                                           sw.degrees);
    const fs::path dir = output_dir(config, opt);
    write_frequency_records((dir / "greens.txt").string(), spectra);
    std::cout << "greens: " << spectra.frequency_count() << " frequencies -> " << (dir / "greens.txt").string()
              << "\n";
    return 0;
}

int run_invert(const Options& opt)
{
    const RunConfig config = load_config(opt.config);
    const Mesh mesh = build_tunnel_mesh(config.geometry);
    const ModelVector initial =
        config.paths.initial_model.empty()
            ? ModelVector::homogeneous(mesh.node_count(), config.ambient.vp, config.ambient.vs)
            : read_model_grid(config.paths.initial_model, mesh);

    RecordSet observed;
    if (!config.paths.observed_records.empty()) {
        observed = read_frequency_records(config.paths.observed_records);
    } else if (!config.paths.observed_time_records.empty()) {
        observed = observed_from_time_records(config.paths.observed_time_records, config.schedule.all_frequencies(),
                                              config.stations.sources.size(), config.stations.receivers.size(),
                                              config.stations.directions_per_receiver(), config.paths.cache_dir);
    } else {
        throw Error(ErrorCode::validation_error, "invert needs paths.observed_records or paths.observed_time_records");
    }

    const fs::path dir = output_dir(config, opt);
    const auto on_group = [&](std::size_t g, const GroupResult& r) {
        write_model_grid((dir / group_name(g)).string(), ModelVector::from_eigen(r.model), mesh);
        std::cout << "group " << g + 1 << ": chi " << r.initial_misfit << " -> " << r.final_misfit << " in "
                  << r.iterations << " iterations" << (r.failed ? " (failed: " + r.diagnostics + ")" : "") << "\n";
    };
    const InversionResult result = run_fwi(config, mesh, initial, observed, on_group);
    write_model_grid((dir / "final_model.txt").string(), ModelVector::from_eigen(result.model), mesh);
    write_convergence_log((dir / "convergence.txt").string(), result.log);
    for (const auto& f : result.failures) {
        std::cerr << "warning: " << f << "\n";
    }
    return 0;
}

int run_validate_pml(const Options& opt)
{
    const RunConfig config = load_config(opt.config);
    const PmlValidation v = validate_pml(config);
    const fs::path dir = output_dir(config, opt);

    std::ofstream table(dir / "validation.txt");
    table << std::setprecision(17) << "distance x y numeric_re numeric_im analytic_re analytic_im rel_error counted\n";
    for (const auto& r : v.comparison.rows) {
        table << r.distance << ' ' << r.point.x << ' ' << r.point.y << ' ' << r.numeric.real() << ' '
              << r.numeric.imag() << ' ' << r.analytic.real() << ' ' << r.analytic.imag() << ' ' << r.relative_error
              << ' ' << (r.counted ? 1 : 0) << '\n';
    }
    std::ofstream decay(dir / "pml_decay.txt");
    decay << std::setprecision(17) << "angle inner_x inner_y outer_x outer_y inner outer ratio\n";
    double worst = 0.0;
    for (const auto& r : v.decay) {
        decay << r.angle << ' ' << r.inner.x << ' ' << r.inner.y << ' ' << r.outer.x << ' ' << r.outer.y << ' '
              << r.inner_amplitude << ' ' << r.outer_amplitude << ' ' << r.ratio() << '\n';
        worst = std::max(worst, r.ratio());
    }
    std::cout << "validate-pml: " << v.dofs << " dofs, median rel. error " << v.comparison.median_error
              << ", max " << v.comparison.max_error << ", worst layer decay " << worst << "\n";
    return 0;
}

int run_dft(const Options& opt, const std::string& output)
{
    const RunConfig config = load_config(opt.config);
    if (config.paths.observed_time_records.empty()) {
        throw Error(ErrorCode::validation_error, "dft needs paths.observed_time_records");
    }
    const RecordSet records =
        time_records_to_frequency(read_time_records(config.paths.observed_time_records),
                                  config.schedule.all_frequencies(), config.stations.sources.size(),
                                  config.stations.receivers.size(), config.stations.directions_per_receiver());
    const fs::path path = output.empty() ? output_dir(config, opt) / "observed.txt" : fs::path(output);
    write_frequency_records(path.string(), records);
    std::cout << "dft: " << records.frequency_count() << " frequencies -> " << path.string() << "\n";
    return 0;
}

int run_make_synthetic(const Options& opt, double element_size, const std::string& output)
{
    const RunConfig config = load_config(opt.config);
    TunnelGeometry geometry = config.geometry;
    if (element_size > 0.0) {
        geometry.element_size = element_size;
    }
    const Mesh mesh = build_tunnel_mesh(geometry);
    const ModelVector reference = model_or_inclusions(config.paths.reference_model, config, mesh);
    const RecordSet records = make_synthetic(config, mesh, reference, config.schedule.all_frequencies());
    const fs::path path = output.empty() ? output_dir(config, opt) / "observed.txt" : fs::path(output);
    write_frequency_records(path.string(), records);
    std::cout << "make-synthetic: " << records.size() << " records on " << mesh.element_count() << " elements -> "
              << path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Frequency-domain elastic full waveform inversion for tunnel reconnaissance"};
    app.require_subcommand(1);

    Options opt;
    std::size_t source_index = 0;
    double element_size = 0.0;
    std::string output;

    const auto add = [&](const char* name, const char* help) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("config", opt.config, "YAML run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("-d,--output-dir", opt.output_dir, "Overrides paths.output_dir");
        return sub;
    };
    CLI::App* forward = add("forward", "Fields and receiver records at the configured frequencies");
    CLI::App* greens = add("greens", "Green's function spectra over the configured sweep");
    greens->add_option("-s,--source", source_index, "Source index");
    CLI::App* invert = add("invert", "Full inversion over the frequency schedule");
    CLI::App* validate = add("validate-pml", "Unbounded homogeneous run against the analytic solution");
    CLI::App* dft = add("dft", "Time records to frequency records at the schedule frequencies");
    dft->add_option("-o,--output", output, "Output file");
    CLI::App* synthetic = add("make-synthetic", "Observed records from a reference model");
    synthetic->add_option("-o,--output", output, "Output file");
    synthetic->add_option("--element-size", element_size, "Mesh spacing of the reference simulation");

    CLI11_PARSE(app, argc, argv);

    try {
        if (forward->parsed()) return run_forward(opt);
        if (greens->parsed()) return run_greens(opt, source_index);
        if (invert->parsed()) return run_invert(opt);
        if (validate->parsed()) return run_validate_pml(opt);
        if (dft->parsed()) return run_dft(opt, output);
        if (synthetic->parsed()) return run_make_synthetic(opt, element_size, output);
    } catch (const Error& e) {
        std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
