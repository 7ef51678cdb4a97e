#pragma once

#include <string_view>
#include <vector>

namespace spinbath {

/// SI-2019 exact values (CODATA 2018 for the Bohr magneton).
struct PhysicalConstants {
    static constexpr double planck_h = 6.62607015e-34;       // J s
    static constexpr double bohr_magneton = 9.2740100783e-24;  // J/T
    static constexpr double boltzmann_k = 1.380649e-23;      // J/K
};

enum class CenterLabel { NV, N };

[[nodiscard]] std::string_view to_string(CenterLabel label);
[[nodiscard]] CenterLabel center_label_from_string(std::string_view text);

/// Which electron-spin transitions of a spin-1 center enter a stick spectrum.
/// `Lower` keeps only |-1> <-> |0>, the line used for the pulsed measurements.
enum class TransitionSet { All, Lower };

/// Spin constants of one defect species. All quantities SI: Hz, tesla.
struct CenterParams {
    CenterLabel label = CenterLabel::N;
    double spin = 0.5;
    double g_parallel = 2.0024;
    // Isotropic by default: g_perp = 2.0025 moves the off-axis hyperfine
    // triplet by about 0.38 mT at 8.56 T and splits the central line.
    double g_perp = 2.0024;
    double zero_field_D = 0.0;
    double hyperfine_111 = 114e6;
    double hyperfine_other = 86e6;
    double linewidth_pp = 0.95e-4;
    double nuclear_spin = 1.0;
    TransitionSet transitions = TransitionSet::All;

    [[nodiscard]] static CenterParams nitrogen();
    [[nodiscard]] static CenterParams nitrogen_vacancy();
    [[nodiscard]] static CenterParams defaults(CenterLabel label);

    /// Throws DomainError if any invariant is violated.
    void validate() const;

    /// Effective g for a defect axis at angle acos(cos_theta) to the field.
    [[nodiscard]] double g_effective(double cos_theta) const;

    /// Effective hyperfine constant. The perpendicular component is recovered
    /// from the on-axis value and the value at the tetrahedral angle.
    [[nodiscard]] double hyperfine_effective(double cos_theta) const;
};

enum class AxisLabel { o111, oA, oB, oC };

struct Orientation {
    AxisLabel axis_label = AxisLabel::o111;
    double cos_theta = 1.0;
    int degeneracy = 1;
};

/// Defect axis orientations for a field tilted `tilt_deg` away from <111>
/// towards azimuth `azimuth_deg` (measured from the projection of [1-1-1]).
/// With zero tilt the three off-axis orientations are returned merged
/// (one entry, degeneracy 3).
[[nodiscard]] std::vector<Orientation> orientations(double tilt_deg = 0.0, double azimuth_deg = 20.0);

/// One allowed EPR transition |m_s_low, m_i> <-> |m_s_high, m_i>.
struct TransitionSpec {
    CenterParams center;
    double m_s_low = -0.5;
    double m_s_high = 0.5;
    double m_i = 0.0;
    Orientation orientation;
};

/// h nu / k_B in kelvin.
[[nodiscard]] double zeeman_temperature(double frequency_hz);

[[nodiscard]] double field_to_frequency(double field_t, double g);
[[nodiscard]] double frequency_to_field(double frequency_hz, double g);

/// First-order zero-field contribution for a transition, expressed as the
/// frequency that adds to the spectrometer frequency when converting to a
/// resonance field: -D (3cos^2 - 1)/2 (m_high^2 - m_low^2). Positive values
/// move the line to higher field.
[[nodiscard]] double zfs_first_order_shift(double zero_field_d, double cos_theta, double m_s_low,
                                           double m_s_high);

/// First-order resonance field of a transition at fixed spectrometer frequency.
[[nodiscard]] double resonance_field(TransitionSpec const& spec, double spectrometer_freq_hz);

}  // namespace spinbath
