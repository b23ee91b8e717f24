#include "icsim/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "icsim/constants.hpp"
#include "icsim/errors.hpp"

namespace icsim {

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write output file: " + path);
    out << content;
}

std::string equilibrium_csv(const CrystalConfiguration& config) {
    std::ostringstream out;
    out << "ion_index,x_um,y_um,z_um\n";
    for (int i = 0; i < config.positions.rows(); ++i) {
        out << i << ',' << format_double(config.positions(i, 0) * 1e6) << ','
            << format_double(config.positions(i, 1) * 1e6) << ','
            << format_double(config.positions(i, 2) * 1e6) << '\n';
    }
    return out.str();
}

std::string phase_boundary_csv(const std::vector<PhaseBoundaryPoint>& points) {
    std::ostringstream out;
    out << "n_ions,boundary,method,alpha_critical,bracket_width\n";
    for (const auto& p : points) {
        out << p.n_ions << ',' << to_string(p.boundary) << ','
            << to_string(p.method) << ',' << format_double(p.alpha_critical)
            << ',' << format_double(p.bracket_width) << '\n';
    }
    return out.str();
}

std::string mode_spectrum_csv(const std::vector<ModeSpectrum>& spectra) {
    std::ostringstream out;
    out << "mode_index,frequency_hz,method\n";
    for (const auto& s : spectra) {
        for (int k = 0; k < s.frequencies.size(); ++k) {
            out << k << ','
                << format_double(s.frequencies[k] / (2.0 * constants::pi))
                << ',' << to_string(s.method) << '\n';
        }
    }
    return out.str();
}

std::string temperature_csv(const TemperatureRecord& record) {
    std::ostringstream out;
    out << "t_ms,Tr_K,Tz_K\n";
    for (std::size_t i = 0; i < record.times.size(); ++i) {
        out << format_double(record.times[i] * 1e3) << ','
            << format_double(record.radial[i]) << ','
            << format_double(record.axial[i]) << '\n';
    }
    return out.str();
}

std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream out;
    out << "t_s,ion_index,x_m,y_m,z_m,vx_mps,vy_mps,vz_mps,rf_phase_rad\n";
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        for (int i = 0; i < traj.positions[s].rows(); ++i) {
            out << format_double(traj.times[s]) << ',' << i;
            for (int k = 0; k < 3; ++k)
                out << ',' << format_double(traj.positions[s](i, k));
            for (int k = 0; k < 3; ++k)
                out << ',' << format_double(traj.velocities[s](i, k));
            out << ',' << format_double(traj.rf_phase[s]) << '\n';
        }
    }
    return out.str();
}

nlohmann::ordered_json equilibrium_json(const CrystalConfiguration& config,
                                        const PotentialModel& model,
                                        const PhaseLabel& label) {
    nlohmann::ordered_json j;
    j["n_ions"] = config.positions.rows();
    j["energy_j"] = config.energy;
    j["converged"] = config.converged;
    j["gradient_norm_j_per_m"] = config.gradient_norm;
    j["phase"] = to_string(label.phase);
    j["extents_l"] = {label.radial_major, label.radial_minor, label.axial};
    j["length_scale_m"] = length_scale(model);
    auto positions = nlohmann::ordered_json::array();
    for (int i = 0; i < config.positions.rows(); ++i)
        positions.push_back({config.positions(i, 0), config.positions(i, 1),
                             config.positions(i, 2)});
    j["positions_m"] = positions;
    return j;
}

nlohmann::ordered_json mode_spectrum_json(const ModeSpectrum& spectrum) {
    nlohmann::ordered_json j;
    j["method"] = to_string(spectrum.method);
    j["subspace"] = to_string(spectrum.subspace);
    j["stable"] = spectrum.stable;
    auto freqs = nlohmann::ordered_json::array();
    for (int k = 0; k < spectrum.frequencies.size(); ++k)
        freqs.push_back(spectrum.frequencies[k] / (2.0 * constants::pi));
    j["frequencies_hz"] = freqs;
    auto vectors = nlohmann::ordered_json::array();
    for (int c = 0; c < spectrum.eigenvectors.cols(); ++c) {
        auto col = nlohmann::ordered_json::array();
        for (int r = 0; r < spectrum.eigenvectors.rows(); ++r)
            col.push_back(spectrum.eigenvectors(r, c));
        vectors.push_back(col);
    }
    j["eigenvectors"] = vectors;
    j["unstable_modes"] = spectrum.unstable_modes;
    j["zone_edge_modes"] = spectrum.zone_edge_modes;
    return j;
}

nlohmann::ordered_json heating_json(const HeatingResult& result) {
    nlohmann::ordered_json j;
    j["radial_rate_k_per_s"] = result.radial_rate;
    j["radial_rate_stderr"] = result.radial_rate_stderr;
    j["radial_r_squared"] = result.radial_r_squared;
    j["axial_rate_k_per_s"] = result.axial_rate;
    j["axial_rate_stderr"] = result.axial_rate_stderr;
    j["melted_count"] = result.melted_count;
    return j;
}

nlohmann::ordered_json voigt_fit_json(const VoigtFit& fit) {
    nlohmann::ordered_json j;
    j["t_radial_k"] = fit.t_radial;
    j["t_radial_uncertainty_k"] = fit.t_radial_uncertainty;
    j["center_rad_per_s"] = fit.center;
    j["amplitude"] = fit.amplitude;
    j["background"] = fit.background;
    j["gauss_fwhm_hz"] = fit.gauss_fwhm / (2.0 * constants::pi);
    j["degenerate"] = fit.degenerate;
    j["rms_residual"] = fit.rms_residual;
    j["iterations"] = fit.iterations;
    return j;
}

nlohmann::ordered_json config_sidecar(const ConfigFile& file,
                                      const std::string& subcommand,
                                      std::uint64_t seed) {
    nlohmann::ordered_json j;
    j["subcommand"] = subcommand;
    j["seed"] = seed;
    nlohmann::ordered_json sections;
    for (const auto& name : file.section_names()) {
        nlohmann::ordered_json section;
        for (const auto& [key, value] : file.section(name))
            section[key] = value;
        sections[name] = section;
    }
    j["config"] = sections;
    return j;
}

nlohmann::ordered_json error_json(const std::string& type,
                                  const std::string& message) {
    nlohmann::ordered_json j;
    j["error"]["type"] = type;
    j["error"]["message"] = message;
    return j;
}

std::string svg_plot(const std::vector<PlotSeries>& series,
                     const std::string& x_label, const std::string& y_label,
                     const std::string& title) {
    const int width = 720, height = 480;
    const int ml = 70, mr = 20, mt = 40, mb = 50;
    double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
    for (const auto& s : series) {
        for (double v : s.x) {
            x_lo = std::min(x_lo, v);
            x_hi = std::max(x_hi, v);
        }
        for (double v : s.y) {
            y_lo = std::min(y_lo, v);
            y_hi = std::max(y_hi, v);
        }
    }
    if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;
    if (!(y_hi > y_lo)) y_hi = y_lo + 1.0;
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    auto px = [&](double x) {
        return ml + (x - x_lo) / (x_hi - x_lo) * (width - ml - mr);
    };
    auto py = [&](double y) {
        return height - mb - (y - y_lo) / (y_hi - y_lo) * (height - mt - mb);
    };
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                            "#9467bd", "#8c564b"};

    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
        << "' height='" << height << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << width / 2 << "' y='24' text-anchor='middle' "
        << "font-size='16'>" << title << "</text>\n";
    // axes
    out << "<line x1='" << ml << "' y1='" << height - mb << "' x2='"
        << width - mr << "' y2='" << height - mb
        << "' stroke='black'/>\n<line x1='" << ml << "' y1='" << mt
        << "' x2='" << ml << "' y2='" << height - mb << "' stroke='black'/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double xv = x_lo + k * (x_hi - x_lo) / 5;
        const double yv = y_lo + k * (y_hi - y_lo) / 5;
        out << "<text x='" << px(xv) << "' y='" << height - mb + 18
            << "' text-anchor='middle' font-size='11'>" << xv << "</text>\n";
        out << "<text x='" << ml - 8 << "' y='" << py(yv) + 4
            << "' text-anchor='end' font-size='11'>" << yv << "</text>\n";
    }
    out << "<text x='" << (ml + width - mr) / 2 << "' y='" << height - 12
        << "' text-anchor='middle' font-size='13'>" << x_label << "</text>\n";
    out << "<text x='18' y='" << (mt + height - mb) / 2
        << "' text-anchor='middle' font-size='13' transform='rotate(-90 18 "
        << (mt + height - mb) / 2 << ")'>" << y_label << "</text>\n";

    int color = 0;
    int legend_y = mt + 8;
    for (const auto& s : series) {
        const char* c = colors[color % 6];
        if (s.points_only) {
            for (std::size_t i = 0; i < s.x.size(); ++i)
                out << "<circle cx='" << px(s.x[i]) << "' cy='" << py(s.y[i])
                    << "' r='3' fill='" << c << "'/>\n";
        } else {
            out << "<polyline fill='none' stroke='" << c
                << "' stroke-width='1.5' points='";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
            out << "'/>\n";
        }
        out << "<text x='" << width - mr - 8 << "' y='" << legend_y
            << "' text-anchor='end' font-size='12' fill='" << c << "'>"
            << s.label << "</text>\n";
        legend_y += 16;
        ++color;
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace icsim
