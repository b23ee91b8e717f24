#include "icsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "icsim/constants.hpp"
#include "icsim/errors.hpp"

namespace icsim {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

} // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigParseError("cannot open configuration file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_text(buffer.str());
}

ConfigFile ConfigFile::parse_text(const std::string& text) {
    ConfigFile file;
    std::istringstream in(text);
    std::string line;
    std::string current;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigParseError("line " + std::to_string(line_no) +
                                       ": malformed section header");
            current = trim(line.substr(1, line.size() - 2));
            if (current.empty())
                throw ConfigParseError("line " + std::to_string(line_no) +
                                       ": empty section name");
            if (!file.sections_.count(current)) {
                file.sections_[current] = {};
                file.order_.push_back(current);
            }
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigParseError("line " + std::to_string(line_no) +
                                   ": expected key = value");
        if (current.empty())
            throw ConfigParseError("line " + std::to_string(line_no) +
                                   ": key outside any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigParseError("line " + std::to_string(line_no) +
                                   ": empty key");
        for (const auto& kv : file.sections_[current])
            if (kv.first == key)
                throw ConfigParseError("line " + std::to_string(line_no) +
                                       ": duplicate key '" + key + "'");
        file.sections_[current].emplace_back(key, value);
    }
    return file;
}

bool ConfigFile::has_section(const std::string& name) const {
    return sections_.count(name) > 0;
}

std::vector<std::string> ConfigFile::section_names() const { return order_; }

const std::vector<std::pair<std::string, std::string>>&
ConfigFile::section(const std::string& name) const {
    static const std::vector<std::pair<std::string, std::string>> empty;
    const auto it = sections_.find(name);
    return it == sections_.end() ? empty : it->second;
}

SectionReader::SectionReader(const ConfigFile& file, std::string section)
    : section_(std::move(section)), entries_(file.section(section_)) {
    consumed_.assign(entries_.size(), false);
}

std::string SectionReader::find(const std::string& key) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].first == key) {
            consumed_[i] = true;
            return entries_[i].second;
        }
    }
    throw ValidationError("[" + section_ + "] missing required key '" + key +
                          "'");
}

bool SectionReader::has(const std::string& key) const {
    for (const auto& kv : entries_)
        if (kv.first == key) return true;
    return false;
}

double SectionReader::number(const std::string& key) const {
    const std::string raw = find(key);
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(raw, &used);
    } catch (const std::exception&) {
        throw ValidationError("[" + section_ + "] " + key +
                              ": not a number: '" + raw + "'");
    }
    if (trim(raw.substr(used)) != "")
        throw ValidationError("[" + section_ + "] " + key +
                              ": trailing characters in '" + raw + "'");
    return value;
}

double SectionReader::number_or(const std::string& key,
                                double fallback) const {
    return has(key) ? number(key) : fallback;
}

long SectionReader::integer(const std::string& key) const {
    const double value = number(key);
    const long rounded = std::lround(value);
    if (value != static_cast<double>(rounded))
        throw ValidationError("[" + section_ + "] " + key +
                              ": expected an integer");
    return rounded;
}

long SectionReader::integer_or(const std::string& key, long fallback) const {
    return has(key) ? integer(key) : fallback;
}

std::string SectionReader::text(const std::string& key) const {
    return find(key);
}

std::string SectionReader::text_or(const std::string& key,
                                   const std::string& fallback) const {
    return has(key) ? find(key) : fallback;
}

bool SectionReader::flag_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    std::string v = find(key);
    std::transform(v.begin(), v.end(), v.begin(), ::tolower);
    if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "off" || v == "0" || v == "no") return false;
    throw ValidationError("[" + section_ + "] " + key +
                          ": expected a boolean, got '" + v + "'");
}

void SectionReader::finish() const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (!consumed_[i])
            throw ValidationError("[" + section_ + "] unknown key '" +
                                  entries_[i].first + "'");
}

IonSpecies species_from_config(const ConfigFile& file) {
    SectionReader reader(file, "species");
    if (!file.has_section("species") || reader.has("name")) {
        std::string name =
            file.has_section("species") ? reader.text_or("name", "yb171")
                                        : "yb171";
        std::transform(name.begin(), name.end(), name.begin(), ::tolower);
        reader.finish();
        if (name == "yb171" || name == "171yb+" || name == "yb-171")
            return IonSpecies::ytterbium_171();
        throw ValidationError("unknown species preset '" + name + "'");
    }
    IonSpecies s;
    s.mass = reader.number("mass_amu") * constants::atomic_mass_unit;
    s.charge = reader.number_or("charge_e", 1.0) * constants::elementary_charge;
    s.transition_wavelength = reader.number("transition_wavelength_nm") * 1e-9;
    s.raman_wavelength = reader.number("raman_wavelength_nm") * 1e-9;
    s.natural_linewidth =
        reader.number("natural_linewidth_mhz") * 2.0 * constants::pi * 1e6;
    reader.finish();
    s.validate();
    return s;
}

TrapConfig trap_from_config(const ConfigFile& file, const IonSpecies& species) {
    if (!file.has_section("trap"))
        throw ValidationError("configuration lacks a [trap] section");
    SectionReader reader(file, "trap");
    TrapConfig t;
    t.rf_voltage = reader.number("rf_voltage_v");
    t.dc_voltage = reader.number_or("dc_voltage_v", 0.0);
    t.radial_extent = reader.number("radial_extent_um") * 1e-6;
    t.axial_extent = reader.number("axial_extent_um") * 1e-6;
    t.drive_frequency =
        reader.number("drive_frequency_mhz") * 2.0 * constants::pi * 1e6;
    t.geometric_factor = reader.number("geometric_factor");
    t.radial_asymmetry = reader.number_or("radial_asymmetry", 1.02);
    reader.finish();
    t.validate();
    (void)species;
    return t;
}

} // namespace icsim
