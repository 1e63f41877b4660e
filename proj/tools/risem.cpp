// risem: command-line front end for the RIS scattering models.
//
// Exit codes: 0 success, 2 parse or validation error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "risem/reproduce.hpp"
#include "risem/scenario.hpp"

namespace {

using namespace risem;

constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

struct OutputFlags {
    std::string out;
    std::string format;
};

void add_output_flags(CLI::App* cmd, OutputFlags& flags) {
    cmd->add_option("--out", flags.out, "Output file (default: stdout)");
    cmd->add_option("--format", flags.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

/// Flags override the scenario's own output section.
void emit(const OutputSpec& output, const OutputFlags& flags, const std::function<void(std::ostream&, bool)>& body) {
    const std::string format = flags.format.empty() ? output.format : flags.format;
    const std::string path = flags.out.empty() ? output.path : flags.out;
    const bool json = format == "json";
    if (path.empty()) {
        body(std::cout, json);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    body(out, json);
}

void emit_sweep(const SweepResult& result, const Scenario& scn, const OutputFlags& flags) {
    emit(scn.output, flags, [&](std::ostream& out, bool json) {
        if (!json) return write_sweep_csv(result, out);
        nlohmann::json doc = sweep_to_json(result);
        doc["scenario_hash"] = scenario_hash(scn);
        out << doc.dump(2) << '\n';
    });
}

AngleGrid parse_grid_flag(const std::string& text) {
    std::istringstream in(text);
    AngleGrid g;
    char c1 = 0, c2 = 0;
    if (!(in >> g.start_deg >> c1 >> g.stop_deg >> c2 >> g.count) || c1 != ',' || c2 != ',')
        throw ValidationError("--grid expects start,stop,count");
    if (g.count == 0 || (g.count > 1 && !(g.stop_deg > g.start_deg)) || (g.count == 1 && g.stop_deg != g.start_deg))
        throw ValidationError("--grid must be increasing with at least one point");
    return g;
}

std::vector<CellSpec> read_cells_csv(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ValidationError("cannot open cell file " + file);
    std::vector<CellSpec> cells;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || (lineno == 1 && line.rfind("x,", 0) == 0)) continue;
        std::istringstream row(line);
        std::vector<double> v;
        std::string field;
        while (std::getline(row, field, ',')) {
            try {
                v.push_back(std::stod(field));
            } catch (const std::exception&) {
                throw ScenarioError(file + ": unreadable number '" + field + "'", lineno, 1);
            }
        }
        if (v.size() != 7) throw ScenarioError(file + ": expected x,y,z,a,b,area,phase_deg", lineno, 1);
        cells.push_back({{v[0], v[1], v[2]}, v[3], v[4], v[5], v[6]});
    }
    if (cells.empty()) throw ValidationError(file + ": no cells");
    return cells;
}

/// Flag-built scenarios go through the same parser as files, so every range
/// check applies.
Scenario checked(const Scenario& draft) { return parse_scenario(scenario_to_json(draft).dump()); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Physical-optics scattering and configuration of reconfigurable intelligent surfaces"};
    app.require_subcommand(1);
    app.set_version_flag("--version", library_version());

    unsigned threads = 1;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    app.add_option("--threads", threads, "Worker threads for sweeps and Monte Carlo")->check(CLI::PositiveNumber);

    OutputFlags out_flags;
    double wavelength = 1.0, radius = 100.0;
    std::string grid_text = "-90,90,181";

    // patch-rcs
    auto* patch_cmd = app.add_subcommand("patch-rcs", "Bistatic RCS cut of a single rectangular patch");
    double pa = 5.0, pb = 5.0, theta_i = 0.0, phi_i = 0.0, phi_s = 0.0;
    std::optional<double> parea;
    patch_cmd->add_option("--a", pa, "Edge along x (wavelengths)");
    patch_cmd->add_option("--b", pb, "Edge along y (wavelengths)");
    patch_cmd->add_option("--area", parea, "Collecting area (default a*b)");
    patch_cmd->add_option("--theta-i", theta_i, "Incident elevation (deg)");
    patch_cmd->add_option("--phi-i", phi_i, "Incident azimuth (deg)");
    patch_cmd->add_option("--phi-s", phi_s, "Observation plane azimuth (deg)");
    patch_cmd->add_option("--grid", grid_text, "Observation theta grid start,stop,count (deg)");
    patch_cmd->add_option("--wavelength", wavelength);
    add_output_flags(patch_cmd, out_flags);

    // array-field
    auto* array_cmd = app.add_subcommand("array-field", "Scattered field of a planar array read from CSV");
    std::string cells_file;
    double amplitude = 1.0;
    array_cmd->add_option("--cells", cells_file, "CSV with x,y,z,a,b,area,phase_deg per row")->required();
    array_cmd->add_option("--theta-i", theta_i);
    array_cmd->add_option("--phi-i", phi_i);
    array_cmd->add_option("--amplitude", amplitude);
    array_cmd->add_option("--phi-s", phi_s);
    array_cmd->add_option("--grid", grid_text);
    array_cmd->add_option("--radius", radius);
    array_cmd->add_option("--wavelength", wavelength);
    add_output_flags(array_cmd, out_flags);

    // linear-field
    auto* linear_cmd = app.add_subcommand("linear-field", "Scattered field of a uniform linear RIS");
    LinearSpec lin;
    std::string sampling = "finite";
    std::vector<double> lin_theta{30.0}, lin_amp;
    std::vector<double> steer;
    linear_cmd->add_option("--cells", lin.cells);
    linear_cmd->add_option("--spacing", lin.spacing);
    linear_cmd->add_option("--b", lin.b);
    linear_cmd->add_option("--area", lin.area);
    linear_cmd->add_option("--sampling", sampling)->check(CLI::IsMember({"finite", "unit"}));
    linear_cmd->add_option("--theta-i", lin_theta, "Incident angles (deg), repeatable");
    linear_cmd->add_option("--amplitude", lin_amp, "Amplitudes, one per --theta-i");
    linear_cmd->add_option("--compensate", steer, "Steer theta_i,theta_s (deg)")->expected(2)->delimiter(',');
    linear_cmd->add_option("--seed", seed, "Draw random binary phases with this seed");
    linear_cmd->add_option("--grid", grid_text);
    linear_cmd->add_option("--radius", radius);
    linear_cmd->add_option("--wavelength", wavelength);
    add_output_flags(linear_cmd, out_flags);

    // scenario-driven commands
    std::string scenario_file;
    auto* mimo_cmd = app.add_subcommand("mimo", "Emit the MIMO system of a linear scenario as JSON");
    mimo_cmd->add_option("scenario", scenario_file)->required()->check(CLI::ExistingFile);
    mimo_cmd->add_option("--out", out_flags.out);

    auto* configure_cmd = app.add_subcommand("configure", "Emit the configured cell weights of a linear scenario");
    configure_cmd->add_option("scenario", scenario_file)->required()->check(CLI::ExistingFile);
    configure_cmd->add_option("--seed", seed, "Override the random seed");
    add_output_flags(configure_cmd, out_flags);

    auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate a scenario over its observation grid");
    sweep_cmd->add_option("scenario", scenario_file)->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--seed", seed, "Override the random seed");
    sweep_cmd->add_option("--trials", trials, "Override the Monte Carlo trial count")->check(CLI::Range(2, 100000000));
    add_output_flags(sweep_cmd, out_flags);

    auto* reproduce_cmd = app.add_subcommand("reproduce", "Regenerate the data behind a figure");
    std::string figure, out_dir = "out";
    reproduce_cmd->add_option("figure", figure)->required()->check(CLI::IsMember(figure_ids()));
    reproduce_cmd->add_option("--out", out_dir, "Output directory");

    auto* preset_cmd = app.add_subcommand("preset", "Print the scenario documents behind a figure");
    preset_cmd->add_option("figure", figure)->required()->check(CLI::IsMember(figure_ids()));
    std::string preset_dir;
    preset_cmd->add_option("--out", preset_dir, "Write one <name>.yaml per document into this directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInvalid;
    }

    auto apply_overrides = [&](Scenario& scn) {
        if (auto* r = std::get_if<RandomScheme>(&scn.scheme)) {
            if (seed) r->seed = *seed;
            if (trials) r->trials = *trials;
        }
    };

    try {
        if (*patch_cmd) {
            Scenario scn;
            scn.wavelength = wavelength;
            scn.geometry = PatchSpec{pa, pb, parea};
            scn.incident = {{theta_i, phi_i, 1.0}};
            scn.observation.grid = parse_grid_flag(grid_text);
            scn.observation.phi_deg = phi_s;
            scn = checked(scn);
            emit_sweep(run_sweep(scn, threads), scn, out_flags);
        } else if (*array_cmd) {
            Scenario scn;
            scn.wavelength = wavelength;
            scn.geometry = read_cells_csv(cells_file);
            scn.incident = {{theta_i, phi_i, amplitude}};
            scn.observation.radius = radius;
            scn.observation.grid = parse_grid_flag(grid_text);
            scn.observation.phi_deg = phi_s;
            scn = checked(scn);
            emit_sweep(run_sweep(scn, threads), scn, out_flags);
        } else if (*linear_cmd) {
            if (!lin_amp.empty() && lin_amp.size() != lin_theta.size())
                throw ValidationError("give one --amplitude per --theta-i");
            if (!steer.empty() && seed) throw ValidationError("--compensate and --seed are exclusive");
            Scenario scn;
            scn.wavelength = wavelength;
            lin.unit_sampling = sampling == "unit";
            scn.geometry = lin;
            for (std::size_t m = 0; m < lin_theta.size(); ++m)
                scn.incident.push_back({lin_theta[m], 0.0, lin_amp.empty() ? 1.0 : lin_amp[m]});
            scn.observation.radius = radius;
            scn.observation.grid = parse_grid_flag(grid_text);
            if (!steer.empty()) scn.scheme = CompensateScheme{steer[0], steer[1]};
            if (seed) scn.scheme = RandomScheme{*seed, RandomScheme::Mode::draw};
            scn = checked(scn);
            emit_sweep(run_sweep(scn, threads), scn, out_flags);
        } else if (*mimo_cmd) {
            const Scenario scn = load_scenario(scenario_file);
            nlohmann::json doc = scenario_mimo(scn).to_json();
            auto amps = nlohmann::json::array();
            for (const auto& w : scn.incident) amps.push_back(w.amplitude);
            doc["incident_amplitudes"] = amps;
            doc["diagnostics"] = {{"sampling_discrepancy", mimo_sampling_discrepancy(scn)}};
            emit(OutputSpec{"json", ""}, out_flags, [&](std::ostream& out, bool) { out << doc.dump(2) << '\n'; });
        } else if (*configure_cmd) {
            Scenario scn = load_scenario(scenario_file);
            apply_overrides(scn);
            if (!scn.is_linear()) throw ValidationError("configure needs a linear geometry");
            std::optional<ReshapeRun> run;
            if (std::holds_alternative<ReshapeScheme>(scn.scheme)) run = run_reshape(scn);
            const LinearRis ris = configured_linear_ris(scn);
            emit(scn.output, out_flags, [&](std::ostream& out, bool json) {
                if (!json) return write_weights_csv(ris, out);
                nlohmann::json doc = weights_to_json(ris);
                doc["scenario_hash"] = scenario_hash(scn);
                if (run) {
                    doc["residual_norm"] = run->solution.residual_norm;
                    doc["rank"] = run->solution.rank;
                    doc["zeroed_cells"] = run->solution.zeroed_cells;
                    doc["discarded_fraction"] = run->solution.discarded_fraction;
                }
                out << doc.dump(2) << '\n';
            });
        } else if (*sweep_cmd) {
            Scenario scn = load_scenario(scenario_file);
            apply_overrides(scn);
            emit_sweep(run_sweep(scn, threads), scn, out_flags);
        } else if (*reproduce_cmd) {
            const ReproduceReport report = reproduce(figure, out_dir, threads);
            for (const auto& c : report.checks)
                std::printf("%-4s %s = %s\n", c.pass ? "ok" : "FAIL", c.name.c_str(), format_number(c.value).c_str());
            for (const auto& f : report.files) std::printf("wrote %s\n", f.string().c_str());
            return report.all_passed() ? 0 : kExitNumerical;
        } else if (*preset_cmd) {
            for (const Preset& p : figure_presets(figure)) {
                if (preset_dir.empty()) {
                    std::printf("# %s\n%s\n", p.name.c_str(), p.yaml.c_str());
                    continue;
                }
                const std::string path = preset_dir + "/" + p.name + ".yaml";
                std::ofstream out(path, std::ios::binary);
                if (!out) throw ValidationError("cannot write " + path);
                out << p.yaml;
            }
        }
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "risem: numerical failure: %s\n", e.what());
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "risem: %s\n", e.what());
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "risem: %s\n", e.what());
        return kExitNumerical;
    }
    return 0;
}
