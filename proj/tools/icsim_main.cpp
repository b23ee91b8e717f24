// icsim: trapped-ion Coulomb crystal simulator, command-line front end.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "icsim/acceptance.hpp"
#include "icsim/config.hpp"
#include "icsim/constants.hpp"
#include "icsim/dynamics.hpp"
#include "icsim/equilibrium.hpp"
#include "icsim/errors.hpp"
#include "icsim/modes.hpp"
#include "icsim/phases.hpp"
#include "icsim/report.hpp"
#include "icsim/stats.hpp"
#include "icsim/thermometry.hpp"
#include "icsim/trap.hpp"

namespace fs = std::filesystem;
using namespace icsim;

namespace {

constexpr double two_pi = 2.0 * constants::pi;

// documented exit codes
enum ExitCode : int {
    kOk = 0,
    kConfigParse = 2,
    kValidation = 3,
    kNumerical = 4,
};

struct CommonOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    std::string format = "both"; // csv|json|both
    bool svg = false;
    int threads = 0;
};

struct Context {
    ConfigFile file;
    IonSpecies species;
    TrapConfig trap;
    CommonOptions opts;
    std::string subcommand;

    fs::path out(const std::string& name) const {
        return fs::path(opts.out_dir) / name;
    }
    bool want_csv() const {
        return opts.format == "csv" || opts.format == "both";
    }
    bool want_json() const {
        return opts.format == "json" || opts.format == "both";
    }
    void write_sidecar() const {
        write_text_file(out(subcommand + ".config.json").string(),
                        config_sidecar(file, subcommand, opts.seed).dump(2) +
                            "\n");
    }
};

Context load_context(const CommonOptions& opts, const std::string& subcommand) {
    Context ctx{ConfigFile::parse_file(opts.config_path),
                IonSpecies{},
                TrapConfig{},
                opts,
                subcommand};
    ctx.species = species_from_config(ctx.file);
    ctx.trap = trap_from_config(ctx.file, ctx.species);
    if (!ctx.file.has_section("experiment") ||
        ctx.file.section("experiment").empty())
        throw ValidationError("configuration lacks a populated [experiment] section");
    fs::create_directories(opts.out_dir);
    return ctx;
}

// aspect-ratio override: U0 solved at the configured rod voltage
TrapConfig trap_at_alpha(const Context& ctx, double alpha) {
    TrapConfig t = ctx.trap;
    if (alpha > 0.0)
        t.dc_voltage = dc_voltage_for_alpha(alpha, t, ctx.species);
    return t;
}

int run_equilibrium(const Context& ctx) {
    SectionReader exp(ctx.file, "experiment");
    const int n_ions = static_cast<int>(exp.integer("n_ions"));
    const double alpha = exp.number_or("alpha", 0.0);
    const double tol = exp.number_or("classification_tol", 1e-3);
    const int multistart = static_cast<int>(exp.integer_or("multistart", 24));
    exp.finish();

    const TrapConfig trap = trap_at_alpha(ctx, alpha);
    const PotentialModel model = pseudo_model(trap, ctx.species, n_ions);
    EquilibriumOptions eq_opt;
    eq_opt.multistart = multistart;
    eq_opt.threads = ctx.opts.threads;
    const auto config = find_equilibrium(model, ctx.opts.seed, eq_opt);
    if (!config.converged)
        throw NotConverged("equilibrium search did not converge");
    const auto label = classify(config, model, tol);

    if (ctx.want_csv())
        write_text_file(ctx.out("equilibrium.csv").string(),
                        equilibrium_csv(config));
    if (ctx.want_json())
        write_text_file(ctx.out("equilibrium.json").string(),
                        equilibrium_json(config, model, label).dump(2) + "\n");
    ctx.write_sidecar();
    std::cout << "N=" << n_ions << " phase=" << to_string(label.phase)
              << " energy=" << format_double(config.energy) << " J\n";
    return kOk;
}

int run_phase_diagram(const Context& ctx) {
    SectionReader exp(ctx.file, "experiment");
    const int n_lo = static_cast<int>(exp.integer_or("n_min", 3));
    const int n_hi = static_cast<int>(exp.integer_or("n_max", 19));
    const std::string method_name = exp.text_or("method", "both");
    PhaseScanOptions scan;
    scan.tol_alpha = exp.number_or("tol_alpha", 1e-3);
    scan.epsilon = exp.number_or("epsilon", ctx.trap.radial_asymmetry);
    scan.species = ctx.species;
    scan.seed = ctx.opts.seed;
    scan.threads = ctx.opts.threads;
    scan.drive_frequency = ctx.trap.drive_frequency;
    const SecularFrequencies f = secular_frequencies(ctx.trap, ctx.species);
    scan.omega_r = two_pi * 1e3 * exp.number_or("omega_r_khz",
                                                f.omega_r / (two_pi * 1e3));
    exp.finish();

    std::vector<Method> methods;
    if (method_name == "both")
        methods = {Method::Pseudopotential, Method::Floquet};
    else if (method_name == "pseudopotential" || method_name == "pseudo")
        methods = {Method::Pseudopotential};
    else if (method_name == "floquet")
        methods = {Method::Floquet};
    else
        throw ValidationError("method must be pseudo, floquet or both");

    std::vector<PhaseBoundaryPoint> all;
    for (Method m : methods) {
        const auto diagram = phase_diagram(n_lo, n_hi, m, scan);
        for (const auto& msg : diagram.failures)
            std::cerr << "warning: " << msg << "\n";
        all.insert(all.end(), diagram.points.begin(), diagram.points.end());
    }
    if (ctx.want_csv())
        write_text_file(ctx.out("phase_diagram.csv").string(),
                        phase_boundary_csv(all));
    if (ctx.want_json()) {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& p : all) {
            j.push_back({{"n_ions", p.n_ions},
                         {"boundary", to_string(p.boundary)},
                         {"method", to_string(p.method)},
                         {"alpha_critical", p.alpha_critical},
                         {"bracket_width", p.bracket_width}});
        }
        write_text_file(ctx.out("phase_diagram.json").string(),
                        j.dump(2) + "\n");
    }
    if (ctx.opts.svg) {
        std::vector<PlotSeries> series;
        for (Method m : methods) {
            for (Boundary b :
                 {Boundary::LinearToZigZag, Boundary::ThreeDToRadial2D}) {
                PlotSeries s;
                s.label = std::string(to_string(b)) + " (" + to_string(m) + ")";
                for (const auto& p : all)
                    if (p.method == m && p.boundary == b) {
                        s.x.push_back(p.n_ions);
                        s.y.push_back(p.alpha_critical);
                    }
                series.push_back(std::move(s));
            }
        }
        write_text_file(ctx.out("phase_diagram.svg").string(),
                        svg_plot(series, "ion number N", "critical alpha",
                                 "structural phase boundaries"));
    }
    ctx.write_sidecar();
    std::cout << "phase diagram: " << all.size() << " boundary points\n";
    return kOk;
}

int run_modes(const Context& ctx) {
    SectionReader exp(ctx.file, "experiment");
    const int n_ions = static_cast<int>(exp.integer_or("n_ions", 7));
    const double alpha = exp.number_or("alpha", 2.0);
    const std::string subspace_name = exp.text_or("subspace", "axial");
    const bool couplings = exp.flag_or("spin_couplings", false);
    const double mu_offset_khz = exp.number_or("detuning_offset_khz", 20.0);
    const double rabi_khz = exp.number_or("rabi_khz", 100.0);
    const double beam_deg = exp.number_or("beam_half_angle_deg", 53.0);
    exp.finish();

    ModeSubspace subspace = ModeSubspace::Axial;
    if (subspace_name == "full") subspace = ModeSubspace::Full;
    else if (subspace_name == "inplane") subspace = ModeSubspace::InPlane;
    else if (subspace_name != "axial")
        throw ValidationError("subspace must be axial, inplane or full");

    const TrapConfig trap = trap_at_alpha(ctx, alpha);
    const RfModel rf = rf_model(trap, ctx.species);
    const PotentialModel model = rf.pseudo(n_ions);
    const auto eq = find_equilibrium(model, ctx.opts.seed);
    if (!eq.converged)
        throw NotConverged("equilibrium search did not converge");

    const auto pseudo = pseudopotential_modes(eq, model, subspace);
    const auto orbit = find_periodic_orbit(rf, eq);
    const auto floquet = floquet_modes(orbit, subspace);

    if (ctx.want_csv())
        write_text_file(ctx.out("modes.csv").string(),
                        mode_spectrum_csv({pseudo, floquet}));
    if (ctx.want_json()) {
        nlohmann::ordered_json j;
        j["pseudopotential"] = mode_spectrum_json(pseudo);
        j["floquet"] = mode_spectrum_json(floquet);
        if (couplings) {
            const double theta = beam_deg * constants::pi / 180.0;
            Eigen::VectorXd eta(pseudo.frequencies.size());
            for (int k = 0; k < eta.size(); ++k)
                eta[k] = lamb_dicke(ctx.species, theta, pseudo.frequencies[k]);
            const double mu =
                pseudo.frequencies[pseudo.frequencies.size() - 1] +
                two_pi * 1e3 * mu_offset_khz;
            for (const auto* spec : {&pseudo, &floquet}) {
                const auto sc = spin_spin_couplings(
                    *spec, eta, eq.positions, mu, two_pi * 1e3 * rabi_khz);
                j[spec == &pseudo ? "couplings_pseudopotential"
                                  : "couplings_floquet"] = {
                    {"range_exponent", sc.range_exponent},
                    {"fit_r_squared", sc.fit_r_squared}};
            }
        }
        write_text_file(ctx.out("modes.json").string(), j.dump(2) + "\n");
    }
    ctx.write_sidecar();

    // per-mode comparison table (the vertical-line pairs of the spectrum plot)
    std::cout << "mode  pseudo/kHz  floquet/kHz  delta/kHz\n";
    for (int k = 0; k < pseudo.frequencies.size(); ++k) {
        std::printf("%4d  %10.3f  %11.3f  %9.3f\n", k,
                    pseudo.frequencies[k] / two_pi / 1e3,
                    floquet.frequencies[k] / two_pi / 1e3,
                    (floquet.frequencies[k] - pseudo.frequencies[k]) / two_pi /
                        1e3);
    }
    return kOk;
}

int run_md(const Context& ctx) {
    SectionReader exp(ctx.file, "experiment");
    const std::string task = exp.text_or("task", "heating");
    const int n_ions = static_cast<int>(exp.integer_or("n_ions", 7));
    const double alpha = exp.number_or("alpha", 2.0);
    const double duration_ms = exp.number_or("duration_ms", 4.0);
    const double t0_mk = exp.number_or("initial_temperature_mk", 3.0);
    const double steps_per_period = exp.number_or("timestep_fraction", 100.0);
    const int seeds = static_cast<int>(exp.integer_or("seeds", 8));
    const double window_us = exp.number_or("window_us", 200.0);
    const double burn_in_ms = exp.number_or("burn_in_ms", 0.5);
    const double noise_se = exp.number_or("field_noise_se", 0.0);
    const bool cool = exp.flag_or("cooling", false);
    const double saturation = exp.number_or("saturation", 1.0);
    const double detuning_mhz =
        exp.number_or("detuning_mhz", -0.5 * ctx.species.natural_linewidth /
                                          (two_pi * 1e6));
    const std::string force_name = exp.text_or("force_model", "full_rf");
    const int record_stride = static_cast<int>(
        exp.integer_or("record_stride", static_cast<long>(steps_per_period)));
    exp.finish();

    const TrapConfig trap = trap_at_alpha(ctx, alpha);
    const auto system = MdSystem::from_trap(trap, ctx.species, n_ions);

    if (task == "heating") {
        HeatingOptions opt;
        opt.n_seeds = seeds;
        opt.initial_temperature = t0_mk * 1e-3;
        opt.duration = duration_ms * 1e-3;
        opt.window = window_us * 1e-6;
        opt.burn_in = burn_in_ms * 1e-3;
        opt.timestep_fraction = steps_per_period;
        opt.seed = ctx.opts.seed;
        opt.threads = ctx.opts.threads;
        opt.noise.field_noise_density = noise_se;
        const auto result = rf_heating_experiment(system, opt);
        if (ctx.want_csv())
            write_text_file(ctx.out("temperatures.csv").string(),
                            temperature_csv(result.ensemble_mean));
        if (ctx.want_json())
            write_text_file(ctx.out("heating.json").string(),
                            heating_json(result).dump(2) + "\n");
        if (ctx.opts.svg) {
            PlotSeries tr, tz, fitline;
            tr.label = "T_r";
            tz.label = "T_z";
            fitline.label = "linear fit";
            const LinearFit lf = fit_line(result.ensemble_mean.times,
                                          result.ensemble_mean.radial);
            for (std::size_t i = 0; i < result.ensemble_mean.times.size();
                 ++i) {
                const double t = result.ensemble_mean.times[i];
                tr.x.push_back(t * 1e3);
                tr.y.push_back(result.ensemble_mean.radial[i] * 1e3);
                tz.x.push_back(t * 1e3);
                tz.y.push_back(result.ensemble_mean.axial[i] * 1e3);
                fitline.x.push_back(t * 1e3);
                fitline.y.push_back((lf.intercept + lf.slope * t) * 1e3);
            }
            tr.points_only = true;
            tz.points_only = true;
            write_text_file(
                ctx.out("heating.svg").string(),
                svg_plot({tr, tz, fitline}, "t (ms)", "T (mK)", "rf heating"));
        }
        ctx.write_sidecar();
        std::cout << "Tr_rate=" << format_double(result.radial_rate)
                  << " K/s  Tz_rate=" << format_double(result.axial_rate)
                  << " K/s  melted=" << result.melted_count << "\n";
        return kOk;
    }
    if (task != "trajectory")
        throw ValidationError("task must be trajectory or heating");

    const auto eq = find_equilibrium(system.pseudo, ctx.opts.seed);
    if (!eq.converged)
        throw NotConverged("equilibrium search did not converge");
    std::mt19937_64 rng(ctx.opts.seed);
    auto [x0, v0] = thermal_state(system.pseudo, eq, t0_mk * 1e-3, rng);

    SimulationParams params;
    params.timestep = system.rf.rf_period() / steps_per_period;
    params.duration = duration_ms * 1e-3;
    params.force_model = force_name == "pseudopotential"
                             ? ForceModel::Pseudopotential
                             : ForceModel::FullRf;
    params.seed = ctx.opts.seed;
    params.record_stride = record_stride;
    params.noise.field_noise_density = noise_se;

    std::vector<CoolingLaser> lasers;
    if (cool)
        lasers.push_back(CoolingLaser::standard_beam(
            ctx.species, saturation, two_pi * 1e6 * detuning_mhz));
    const auto traj = integrate(system, x0, v0, lasers, params);
    const auto record = secular_temperature(
        traj, std::max(window_us * 1e-6, 2.0 * system.rf.rf_period()));
    if (ctx.want_csv()) {
        write_text_file(ctx.out("trajectory.csv").string(),
                        trajectory_csv(traj));
        write_text_file(ctx.out("temperatures.csv").string(),
                        temperature_csv(record));
    }
    ctx.write_sidecar();
    std::cout << "trajectory with " << traj.times.size() << " samples\n";
    return kOk;
}

int run_thermometry(const Context& ctx) {
    SectionReader exp(ctx.file, "experiment");
    const std::string task = exp.text_or("task", "voigt_synth");
    const double theta_deg = exp.number_or("theta_deg", 45.0);
    const double saturation = exp.number_or("saturation", 0.3);
    const double tz_mk = exp.number_or("t_axial_mk", 3.0);
    const double theta = theta_deg * constants::pi / 180.0;

    if (task == "voigt_synth" || task == "voigt_fit") {
        LineProfile profile;
        if (task == "voigt_fit") {
            const std::string path = exp.text("input_csv");
            exp.finish();
            std::ifstream in(path);
            if (!in) throw ValidationError("cannot open input csv: " + path);
            std::string line;
            std::getline(in, line);
            if (line.rfind("detuning_mhz", 0) != 0 &&
                line.rfind("detuning_MHz", 0) != 0)
                throw ValidationError("expected header detuning_mhz,counts in " +
                                      path);
            std::vector<double> det, cnt;
            while (std::getline(in, line)) {
                const auto comma = line.find(',');
                if (comma == std::string::npos) continue;
                det.push_back(std::stod(line.substr(0, comma)) * two_pi * 1e6);
                cnt.push_back(std::stod(line.substr(comma + 1)));
            }
            profile.detunings =
                Eigen::Map<Eigen::VectorXd>(det.data(), det.size());
            profile.intensities =
                Eigen::Map<Eigen::VectorXd>(cnt.data(), cnt.size());
        } else {
            const double tr_mk = exp.number_or("t_radial_mk", 3.0);
            const double span_mhz = exp.number_or("span_mhz", 120.0);
            const int points = static_cast<int>(exp.integer_or("points", 401));
            exp.finish();
            Eigen::VectorXd grid(points);
            for (int i = 0; i < points; ++i)
                grid[i] = two_pi * 1e6 *
                          (-span_mhz + 2.0 * span_mhz * i / (points - 1));
            profile = voigt_profile(grid, tr_mk * 1e-3, tz_mk * 1e-3, theta,
                                    ctx.species, saturation, 1000.0, 0.0);
        }
        const auto fit =
            fit_voigt(profile, lorentz_fwhm(ctx.species, saturation), theta,
                      tz_mk * 1e-3, ctx.species);
        if (ctx.want_json())
            write_text_file(ctx.out("voigt_fit.json").string(),
                            voigt_fit_json(fit).dump(2) + "\n");
        if (ctx.opts.svg) {
            PlotSeries data;
            data.label = "profile";
            for (int i = 0; i < profile.detunings.size(); ++i) {
                data.x.push_back(profile.detunings[i] / (two_pi * 1e6));
                data.y.push_back(profile.intensities[i]);
            }
            write_text_file(ctx.out("lineshape.svg").string(),
                            svg_plot({data}, "detuning (MHz)", "counts",
                                     "Voigt lineshape"));
        }
        ctx.write_sidecar();
        std::cout << "T_r = " << format_double(fit.t_radial) << " K +- "
                  << format_double(fit.t_radial_uncertainty) << "\n";
        return kOk;
    }
    if (task != "sideband")
        throw ValidationError("task must be voigt_synth, voigt_fit or sideband");

    const double nbar = exp.number_or("nbar", 2.5);
    const double eta = exp.number_or("eta", 0.16);
    const double rabi_khz = exp.number_or("rabi_khz", 50.0);
    exp.finish();
    std::vector<double> times;
    const double rabi = two_pi * 1e3 * rabi_khz;
    for (int i = 0; i <= 60; ++i) times.push_back(i * 0.4 / (eta * rabi));
    const auto scan = sideband_flops(nbar, eta, rabi, times);
    nlohmann::ordered_json j;
    j["ratio"] = scan.ratio;
    j["nbar"] = scan.nbar;
    if (ctx.want_json())
        write_text_file(ctx.out("sideband.json").string(), j.dump(2) + "\n");
    if (ctx.want_csv()) {
        std::ostringstream csv;
        csv << "time_us,P_flip,sideband\n";
        for (std::size_t i = 0; i < scan.times.size(); ++i) {
            csv << format_double(scan.times[i] * 1e6) << ','
                << format_double(scan.red[i]) << ",red\n";
            csv << format_double(scan.times[i] * 1e6) << ','
                << format_double(scan.blue[i]) << ",blue\n";
        }
        write_text_file(ctx.out("sideband.csv").string(), csv.str());
    }
    ctx.write_sidecar();
    std::cout << "r = " << format_double(scan.ratio)
              << "  nbar = " << format_double(scan.nbar) << "\n";
    return kOk;
}

int run_validate(const std::string& only, int threads,
                 const std::string& out_dir) {
    AcceptanceOptions opt;
    opt.threads = threads;
    if (!only.empty()) {
        std::istringstream in(only);
        std::string token;
        while (std::getline(in, token, ','))
            opt.only.push_back(std::stoi(token));
    }
    const auto results = run_acceptance(opt, std::cout);
    bool all_ok = true;
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        all_ok = all_ok && r.passed;
        j.push_back({{"criterion", r.id},
                     {"name", r.name},
                     {"passed", r.passed},
                     {"detail", r.detail},
                     {"seconds", r.seconds}});
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text_file((fs::path(out_dir) / "acceptance.json").string(),
                        j.dump(2) + "\n");
    }
    return all_ok ? kOk : kNumerical;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"trapped-ion Coulomb crystal simulator"};
    app.require_subcommand(1);

    CommonOptions opts;
    app.add_option("--config", opts.config_path, "configuration file");
    app.add_option("--seed", opts.seed, "master RNG seed");
    app.add_option("--out", opts.out_dir, "output directory");
    app.add_option("--format", opts.format, "csv|json|both")
        ->check(CLI::IsMember({"csv", "json", "both"}));
    app.add_flag("--svg", opts.svg, "emit SVG plots");
    app.add_option("--threads", opts.threads, "worker threads (0 = auto)");

    auto* cmd_eq =
        app.add_subcommand("equilibrium", "crystal positions and phase label");
    auto* cmd_phase = app.add_subcommand("phase-diagram",
                                         "structural boundaries vs ion number");
    auto* cmd_modes =
        app.add_subcommand("modes", "pseudopotential vs Floquet spectra");
    auto* cmd_md = app.add_subcommand("md", "molecular dynamics experiments");
    auto* cmd_thermo =
        app.add_subcommand("thermometry", "lineshape and sideband analysis");
    auto* cmd_validate =
        app.add_subcommand("validate", "run the acceptance suite");
    std::string only;
    cmd_validate->add_option("--only", only, "comma-separated criterion numbers");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help and friends
        std::cerr << error_json("ConfigParse", e.what()).dump() << "\n";
        return kConfigParse;
    }

    try {
        if (cmd_validate->parsed())
            return run_validate(only, opts.threads, opts.out_dir);
        if (opts.config_path.empty())
            throw ValidationError("--config is required");
        if (cmd_eq->parsed())
            return run_equilibrium(load_context(opts, "equilibrium"));
        if (cmd_phase->parsed())
            return run_phase_diagram(load_context(opts, "phase-diagram"));
        if (cmd_modes->parsed()) return run_modes(load_context(opts, "modes"));
        if (cmd_md->parsed()) return run_md(load_context(opts, "md"));
        if (cmd_thermo->parsed())
            return run_thermometry(load_context(opts, "thermometry"));
        throw ValidationError("no subcommand selected");
    } catch (const ConfigParseError& e) {
        std::cerr << error_json("ConfigParse", e.what()).dump() << "\n";
        return kConfigParse;
    } catch (const ValidationError& e) {
        std::cerr << error_json("Validation", e.what()).dump() << "\n";
        return kValidation;
    } catch (const Error& e) {
        std::cerr << error_json("NumericalFailure", e.what()).dump() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << error_json("NumericalFailure", e.what()).dump() << "\n";
        return kNumerical;
    }
}
