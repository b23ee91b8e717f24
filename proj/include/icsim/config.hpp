#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "icsim/trap.hpp"

namespace icsim {

// Sectioned key-value configuration (INI-style). Keys carry explicit unit
// suffixes; unknown keys are rejected when a section is consumed.
class ConfigFile {
  public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_text(const std::string& text);

    bool has_section(const std::string& name) const;
    std::vector<std::string> section_names() const;

    // raw ordered key/value pairs of a section (empty if missing)
    const std::vector<std::pair<std::string, std::string>>&
    section(const std::string& name) const;

  private:
    std::map<std::string, std::vector<std::pair<std::string, std::string>>>
        sections_;
    std::vector<std::string> order_;
};

// Tracks key consumption for one section; finish() throws ValidationError
// when unconsumed (unknown) keys remain.
class SectionReader {
  public:
    SectionReader(const ConfigFile& file, std::string section);

    bool has(const std::string& key) const;
    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    long integer(const std::string& key) const;
    long integer_or(const std::string& key, long fallback) const;
    std::string text(const std::string& key) const;
    std::string text_or(const std::string& key,
                        const std::string& fallback) const;
    bool flag_or(const std::string& key, bool fallback) const;

    void finish() const; // rejects unknown keys

  private:
    std::string find(const std::string& key) const;
    std::string section_;
    std::vector<std::pair<std::string, std::string>> entries_;
    mutable std::vector<bool> consumed_;
};

// [species]: either name = yb171 or explicit fields
// (mass_amu, charge_e, transition_wavelength_nm, raman_wavelength_nm,
//  natural_linewidth_mhz).
IonSpecies species_from_config(const ConfigFile& file);

// [trap]: rf_voltage_v, dc_voltage_v, radial_extent_um, axial_extent_um,
// drive_frequency_mhz, geometric_factor, radial_asymmetry.
TrapConfig trap_from_config(const ConfigFile& file,
                            const IonSpecies& species);

} // namespace icsim
