#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "icsim/config.hpp"
#include "icsim/dynamics.hpp"
#include "icsim/equilibrium.hpp"
#include "icsim/modes.hpp"
#include "icsim/phases.hpp"
#include "icsim/thermometry.hpp"

namespace icsim {

// Deterministic shortest-roundtrip formatting used in every artifact.
std::string format_double(double value);

void write_text_file(const std::string& path, const std::string& content);

// CSV emitters (schemas documented in the README)
std::string equilibrium_csv(const CrystalConfiguration& config);
std::string phase_boundary_csv(const std::vector<PhaseBoundaryPoint>& points);
std::string mode_spectrum_csv(const std::vector<ModeSpectrum>& spectra);
std::string temperature_csv(const TemperatureRecord& record);
std::string trajectory_csv(const Trajectory& traj);

// JSON emitters
nlohmann::ordered_json equilibrium_json(const CrystalConfiguration& config,
                                        const PotentialModel& model,
                                        const PhaseLabel& label);
nlohmann::ordered_json mode_spectrum_json(const ModeSpectrum& spectrum);
nlohmann::ordered_json heating_json(const HeatingResult& result);
nlohmann::ordered_json voigt_fit_json(const VoigtFit& fit);
nlohmann::ordered_json config_sidecar(const ConfigFile& file,
                                      const std::string& subcommand,
                                      std::uint64_t seed);
nlohmann::ordered_json error_json(const std::string& type,
                                  const std::string& message);

// Minimal SVG line/scatter plot: one polyline per series over shared axes.
struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool points_only = false;
};

std::string svg_plot(const std::vector<PlotSeries>& series,
                     const std::string& x_label, const std::string& y_label,
                     const std::string& title);

} // namespace icsim
