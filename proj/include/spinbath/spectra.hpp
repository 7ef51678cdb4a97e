#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "spinbath/spin_core.hpp"

namespace spinbath {

struct Stick {
    double field = 0.0;   // tesla
    double weight = 0.0;  // dimensionless
    TransitionSpec label;
};

struct StickSpectrum {
    std::vector<Stick> sticks;  // ascending in field
};

struct CenterPopulation {
    CenterParams params;
    double population = 1.0;
};

struct StickOptions {
    double tilt_deg = 0.0;
    double tilt_azimuth_deg = 20.0;
    /// Scale each transition by its Boltzmann population difference relative
    /// to the high-temperature (Curie) limit, so the factor tends to 1 as T grows.
    bool thermal_weighting = true;
    /// Sticks of one center closer than this (tesla) are merged into one.
    double merge_tolerance = 1e-6;
};

/// Thermal weight of a transition: (P_low - P_high) (2S+1) k_B T / (h nu).
/// Equals 1 in the T -> infinity limit.
[[nodiscard]] double thermal_transition_factor(TransitionSpec const& spec, double resonance_field_t,
                                               double spectrometer_freq_hz, double temperature_k);

[[nodiscard]] StickSpectrum build_sticks(std::vector<CenterPopulation> const& centers, double freq_hz,
                                         double temperature_k, StickOptions const& options = {});

/// Groups sticks closer than `resolution` (tesla) and returns the weighted
/// mean field of each group.
[[nodiscard]] std::vector<double> distinct_fields(StickSpectrum const& sticks, double resolution);

struct FieldGrid {
    double field_min = 8.40;
    double field_max = 8.75;
    double step = 2e-6;

    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] double at(std::size_t i) const { return field_min + static_cast<double>(i) * step; }
};

struct SpectrumMetadata {
    double frequency_hz = 0.0;
    double temperature_k = 0.0;
    std::vector<std::pair<CenterLabel, double>> populations;
};

struct Spectrum {
    std::vector<double> field_grid;
    std::vector<double> amplitude;
    SpectrumMetadata metadata;
    std::vector<std::string> warnings;
};

/// Sum of area-normalized first-derivative Gaussians, one per stick, with
/// sigma = pp_width / 2. The double integral of the result equals the sum of
/// stick weights. Output does not depend on `threads`.
[[nodiscard]] Spectrum convolve(StickSpectrum const& sticks, FieldGrid const& grid, SpectrumMetadata metadata = {},
                                unsigned threads = 1);

struct Peak {
    double center_field = 0.0;
    double pp_width = 0.0;
    double pp_amplitude = 0.0;
};

using PeakReport = std::vector<Peak>;

/// Finds derivative-line (max, min) pairs. Extrema smaller than
/// `relative_threshold` times the largest |amplitude| are ignored.
[[nodiscard]] PeakReport analyze_peaks(Spectrum const& spectrum, double relative_threshold = 1e-3);

void write_spectrum_csv(std::ostream& out, Spectrum const& spectrum, std::vector<std::string> const& comments = {});
void write_peaks_csv(std::ostream& out, PeakReport const& peaks, std::vector<std::string> const& comments = {});

}  // namespace spinbath
