#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "spinbath/spectra.hpp"

namespace spinbath {

/// Everything a `spectrum` run depends on. Text form:
///
///     [spectrometer]
///     frequency_Hz = 240e9
///     temperature_K = 300
///     [grid]
///     field_min_T = 8.40
///     [center.N]
///     population = 120
///
/// Missing keys keep their defaults; a center section starts from the
/// defaults of that center. A file without any [center.*] section has no
/// centers and fails validation.
struct RunConfig {
    double frequency_hz = 240e9;
    double temperature_k = 300.0;
    double tilt_deg = 0.0;
    double tilt_azimuth_deg = 20.0;
    bool thermal_weighting = true;
    FieldGrid grid;
    std::vector<CenterPopulation> centers;
    std::uint64_t seed = 1;
    std::string output_dir;

    /// N (population 120) and N-V (population 1).
    [[nodiscard]] static RunConfig defaults();

    [[nodiscard]] static RunConfig parse(std::string_view text, std::string const& origin = "<config>");
    [[nodiscard]] static RunConfig load(std::filesystem::path const& path);

    [[nodiscard]] std::string to_text() const;
    /// FNV-1a of to_text().
    [[nodiscard]] std::uint64_t hash() const;

    /// Throws DomainError naming the offending setting.
    void validate() const;

    [[nodiscard]] StickOptions stick_options() const;
};

}  // namespace spinbath
