// Python bindings for the main simulator operations.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "icsim/constants.hpp"
#include "icsim/dynamics.hpp"
#include "icsim/equilibrium.hpp"
#include "icsim/errors.hpp"
#include "icsim/modes.hpp"
#include "icsim/phases.hpp"
#include "icsim/thermometry.hpp"
#include "icsim/trap.hpp"

namespace py = pybind11;
using namespace icsim;

PYBIND11_MODULE(icsim, m) {
    m.doc() = "trapped-ion Coulomb crystal simulator";

    py::register_exception<Error>(m, "IcsimError");

    py::class_<IonSpecies>(m, "IonSpecies")
        .def_readwrite("mass", &IonSpecies::mass)
        .def_readwrite("charge", &IonSpecies::charge)
        .def_readwrite("transition_wavelength",
                       &IonSpecies::transition_wavelength)
        .def_readwrite("raman_wavelength", &IonSpecies::raman_wavelength)
        .def_readwrite("natural_linewidth", &IonSpecies::natural_linewidth)
        .def_static("ytterbium_171", &IonSpecies::ytterbium_171);

    py::class_<TrapConfig>(m, "TrapConfig")
        .def(py::init<>())
        .def_readwrite("rf_voltage", &TrapConfig::rf_voltage)
        .def_readwrite("dc_voltage", &TrapConfig::dc_voltage)
        .def_readwrite("radial_extent", &TrapConfig::radial_extent)
        .def_readwrite("axial_extent", &TrapConfig::axial_extent)
        .def_readwrite("drive_frequency", &TrapConfig::drive_frequency)
        .def_readwrite("geometric_factor", &TrapConfig::geometric_factor)
        .def_readwrite("radial_asymmetry", &TrapConfig::radial_asymmetry);

    py::class_<MathieuCoefficients>(m, "MathieuCoefficients")
        .def_readonly("a_x", &MathieuCoefficients::a_x)
        .def_readonly("a_y", &MathieuCoefficients::a_y)
        .def_readonly("a_z", &MathieuCoefficients::a_z)
        .def_readonly("q_x", &MathieuCoefficients::q_x)
        .def_readonly("q_y", &MathieuCoefficients::q_y);

    py::class_<SecularFrequencies>(m, "SecularFrequencies")
        .def_readonly("omega_x", &SecularFrequencies::omega_x)
        .def_readonly("omega_y", &SecularFrequencies::omega_y)
        .def_readonly("omega_z", &SecularFrequencies::omega_z)
        .def_readonly("omega_r", &SecularFrequencies::omega_r)
        .def_readonly("alpha", &SecularFrequencies::alpha);

    m.def("mathieu_coefficients", &mathieu_coefficients);
    m.def("secular_frequencies", &secular_frequencies);
    m.def("dc_voltage_for_alpha", &dc_voltage_for_alpha);
    m.def("dc_voltage_for_axial_frequency", &dc_voltage_for_axial_frequency);
    m.def("lamb_dicke", &lamb_dicke);
    m.def("micromotion_amplitude", [](double q, double r) {
        const auto mm = micromotion_amplitude(q, r);
        return py::make_tuple(mm.first_harmonic, mm.second_harmonic);
    });
    m.def("mathieu_exponent", &mathieu_exponent, py::arg("a"), py::arg("q"),
          py::arg("rtol") = 1e-12);

    py::class_<PotentialModel>(m, "PotentialModel")
        .def(py::init([](double wx, double wy, double wz,
                         const IonSpecies& species, int n) {
                 return PotentialModel{wx, wy, wz, species, n};
             }),
             py::arg("omega_x"), py::arg("omega_y"), py::arg("omega_z"),
             py::arg("species"), py::arg("n_ions"))
        .def_readonly("omega_x", &PotentialModel::omega_x)
        .def_readonly("omega_y", &PotentialModel::omega_y)
        .def_readonly("omega_z", &PotentialModel::omega_z)
        .def_readonly("n_ions", &PotentialModel::n_ions)
        .def("omega_r", &PotentialModel::omega_r)
        .def("alpha", &PotentialModel::alpha);

    m.def("pseudo_model", &pseudo_model);
    m.def("length_scale", &length_scale);

    py::class_<CrystalConfiguration>(m, "CrystalConfiguration")
        .def_readonly("positions", &CrystalConfiguration::positions)
        .def_readonly("energy", &CrystalConfiguration::energy)
        .def_readonly("converged", &CrystalConfiguration::converged)
        .def_readonly("gradient_norm", &CrystalConfiguration::gradient_norm);

    m.def("total_potential", &total_potential);
    m.def(
        "find_equilibrium",
        [](const PotentialModel& model, std::uint64_t seed) {
            return find_equilibrium(model, seed);
        },
        py::arg("model"), py::arg("seed") = 0);

    py::enum_<Phase>(m, "Phase")
        .value("Linear", Phase::Linear)
        .value("ZigZag", Phase::ZigZag)
        .value("ThreeD", Phase::ThreeD)
        .value("Radial2D", Phase::Radial2D);

    m.def(
        "classify",
        [](const CrystalConfiguration& config, const PotentialModel& model,
           double tol) { return classify(config, model, tol).phase; },
        py::arg("config"), py::arg("model"), py::arg("tol") = 1e-3);

    py::enum_<ModeSubspace>(m, "ModeSubspace")
        .value("Axial", ModeSubspace::Axial)
        .value("InPlane", ModeSubspace::InPlane)
        .value("Full", ModeSubspace::Full);

    py::class_<ModeSpectrum>(m, "ModeSpectrum")
        .def_readonly("frequencies", &ModeSpectrum::frequencies)
        .def_readonly("eigenvectors", &ModeSpectrum::eigenvectors)
        .def_readonly("stable", &ModeSpectrum::stable);

    m.def("pseudopotential_modes", &pseudopotential_modes, py::arg("config"),
          py::arg("model"), py::arg("subspace") = ModeSubspace::Full);

    m.def("ratio_to_nbar", &ratio_to_nbar);
    m.def("heating_conversions", [](double rate, double omega,
                                    const IonSpecies& species) {
        const auto c = heating_conversions(rate, omega, species);
        return py::make_tuple(c.temperature_rate, c.field_noise_density);
    });
    m.def("uncorrelated_mode_scaling", &uncorrelated_mode_scaling);
    m.def("lorentz_fwhm", &lorentz_fwhm);
    m.def("doppler_fwhm", &doppler_fwhm);
    m.def(
        "voigt_profile",
        [](const Eigen::VectorXd& grid, double tr, double tz, double theta,
           const IonSpecies& species, double s) {
            const auto p = voigt_profile(grid, tr, tz, theta, species, s);
            return py::make_tuple(p.detunings, p.intensities);
        },
        py::arg("grid"), py::arg("t_radial"), py::arg("t_axial"),
        py::arg("theta"), py::arg("species"), py::arg("saturation"));
    m.def(
        "fit_voigt",
        [](const Eigen::VectorXd& detunings, const Eigen::VectorXd& counts,
           double lorentz_width, double theta, double t_axial,
           const IonSpecies& species) {
            LineProfile profile;
            profile.detunings = detunings;
            profile.intensities = counts;
            const auto fit =
                fit_voigt(profile, lorentz_width, theta, t_axial, species);
            return py::make_tuple(fit.t_radial, fit.t_radial_uncertainty);
        },
        py::arg("detunings"), py::arg("counts"), py::arg("lorentz_width"),
        py::arg("theta"), py::arg("t_axial"), py::arg("species"));

    m.attr("hbar") = constants::hbar;
    m.attr("boltzmann") = constants::boltzmann;
}
