#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "icsim/equilibrium.hpp"
#include "icsim/model.hpp"

namespace icsim {

enum class ForceModel { FullRf, Pseudopotential };

const char* to_string(ForceModel m);

struct CoolingLaser {
    Eigen::Vector3d direction; // unit wavevector direction
    double saturation;         // s
    double detuning;           // rad/s, red < 0
    double linewidth;          // rad/s
    double wavelength;         // m

    // single beam at 45 degrees to the radial plane with projections on all
    // principal axes: direction (1/2, 1/2, 1/sqrt(2))
    static CoolingLaser standard_beam(const IonSpecies& species,
                                      double saturation, double detuning);
};

struct NoiseOptions {
    bool recoil = true; // stochastic photon kicks (off: deterministic mean force)
    // single-sided spectral density S_E of a spatially uniform white electric
    // field applied on each axis, V^2 m^-2 Hz^-1
    double field_noise_density = 0.0;
};

struct SimulationParams {
    double timestep;    // s; FullRf requires <= T_rf / 50
    double duration;    // s
    ForceModel force_model = ForceModel::FullRf;
    std::uint64_t seed = 0;
    int record_stride = 1;
    NoiseOptions noise;
};

struct MdSystem {
    RfModel rf;
    PotentialModel pseudo;

    static MdSystem from_trap(const TrapConfig& trap, const IonSpecies& species,
                              int n_ions);
    static MdSystem from_pseudo(const PotentialModel& model,
                                double drive_frequency);
};

struct Trajectory {
    double timestep = 0.0;
    int record_stride = 1;
    double drive_frequency = 0.0;
    double ion_mass = 0.0; // kg
    ForceModel force_model = ForceModel::FullRf;
    std::vector<double> times;
    std::vector<PositionMatrix> positions;
    std::vector<PositionMatrix> velocities;
    std::vector<double> rf_phase; // rad, in [0, 2 pi)
};

// Velocity-Verlet advance under Coulomb + trap forces with optional laser
// scattering and uniform field noise. Deterministic for a given seed.
Trajectory integrate(const MdSystem& system, const PositionMatrix& x0,
                     const PositionMatrix& v0,
                     const std::vector<CoolingLaser>& lasers,
                     const SimulationParams& params);

// Photon scattering rate at ion velocity v.
double doppler_scattering_rate(const Eigen::Vector3d& velocity,
                               const CoolingLaser& laser);

// Mean radiation-pressure force hbar k R(v) along the beam.
Eigen::Vector3d doppler_mean_force(const Eigen::Vector3d& velocity,
                                   const CoolingLaser& laser);

// Stochastic momentum transfer over dt: Poissonian absorption kicks along
// the beam plus isotropic emission kicks.
Eigen::Vector3d doppler_kick(const Eigen::Vector3d& velocity,
                             const CoolingLaser& laser,
                             const IonSpecies& species, double dt,
                             std::mt19937_64& rng);

// Thermal sample of the normal modes at temperature T about a converged
// configuration (near-zero symmetry modes left unexcited).
std::pair<PositionMatrix, PositionMatrix>
thermal_state(const PotentialModel& model, const CrystalConfiguration& config,
              double temperature, std::mt19937_64& rng);

enum class TemperatureEstimator { Stroboscopic, HarmonicSubtracted, Raw };

struct TemperatureRecord {
    std::vector<double> times;  // window centers, s
    std::vector<double> radial; // K
    std::vector<double> axial;  // K
};

// Secular temperatures over tiled windows. Stroboscopic sampling (default)
// keeps only samples at rf phase `phase0`, where first- and second-harmonic
// micromotion velocities vanish.
TemperatureRecord
secular_temperature(const Trajectory& traj, double window,
                    TemperatureEstimator estimator = TemperatureEstimator::Stroboscopic,
                    double phase0 = 0.0);

struct MeltRecord {
    std::vector<double> times;
    std::vector<double> order_parameter; // RMS site displacement / NN spacing
    bool melted = false;
    int first_melt_sample = -1;
    bool permutation_observed = false;
};

// Lindemann-type order parameter against a (permutation-matched) reference
// lattice; greedy nearest-site assignment.
MeltRecord melt_monitor(const Trajectory& traj, const PositionMatrix& reference,
                        double threshold = 0.2);

struct HeatingOptions {
    int n_seeds = 8;
    double initial_temperature = 3e-3; // K
    double duration = 4e-3;            // s
    double window = 50e-6;             // s
    double burn_in = 0.5e-3; // s, settling span excluded from the rate fits
    double timestep_fraction = 100.0;  // dt = T_rf / fraction
    std::uint64_t seed = 0;
    int threads = 0;
    double melt_threshold = 0.2;
    // optional Doppler-cooled preparation before the uncooled heating window
    bool laser_prep = false;
    double prep_duration = 2e-3; // s
    std::vector<CoolingLaser> lasers;
    NoiseOptions noise;
};

struct HeatingResult {
    double radial_rate = 0.0;        // K/s
    double radial_rate_stderr = 0.0;
    double axial_rate = 0.0;
    double axial_rate_stderr = 0.0;
    double radial_r_squared = 0.0;
    int melted_count = 0;
    TemperatureRecord ensemble_mean;
};

// Ensemble rf-heating experiment: thermalized (or laser-prepared) crystals
// evolve uncooled under the full rf drive; reports linear heating rates.
// Melted trajectories are excluded from the fit and counted.
HeatingResult rf_heating_experiment(const MdSystem& system,
                                    const HeatingOptions& options);

} // namespace icsim
