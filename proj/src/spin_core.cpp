#include "spinbath/spin_core.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "spinbath/error.hpp"

namespace spinbath {

namespace {

using Vec3 = std::array<double, 3>;

double dot(Vec3 const& a, Vec3 const& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross(Vec3 const& a, Vec3 const& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Vec3 scaled(Vec3 const& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }

Vec3 sum(Vec3 const& a, Vec3 const& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

Vec3 normalized(Vec3 const& a) { return scaled(a, 1.0 / std::sqrt(dot(a, a))); }

double angular_factor(double cos_theta) { return 0.5 * (3.0 * cos_theta * cos_theta - 1.0); }

}  // namespace

std::string_view to_string(CenterLabel label) { return label == CenterLabel::NV ? "NV" : "N"; }

CenterLabel center_label_from_string(std::string_view text) {
    if (text == "NV" || text == "nv" || text == "N-V") return CenterLabel::NV;
    if (text == "N" || text == "n" || text == "P1") return CenterLabel::N;
    throw LookupError("unknown center label '" + std::string(text) + "' (expected NV or N)");
}

CenterParams CenterParams::nitrogen() { return CenterParams{}; }

CenterParams CenterParams::nitrogen_vacancy() {
    CenterParams p;
    p.label = CenterLabel::NV;
    p.spin = 1.0;
    p.g_parallel = 2.0028;
    p.g_perp = 2.0028;
    p.zero_field_D = 2.87e9;
    p.hyperfine_111 = 2.2e6;
    p.hyperfine_other = 2.2e6;
    p.linewidth_pp = 2.36e-4;
    p.nuclear_spin = 1.0;
    p.transitions = TransitionSet::Lower;
    return p;
}

CenterParams CenterParams::defaults(CenterLabel label) {
    return label == CenterLabel::NV ? nitrogen_vacancy() : nitrogen();
}

void CenterParams::validate() const {
    std::ostringstream why;
    if (spin != 0.5 && spin != 1.0) why << "spin must be 1/2 or 1 (got " << spin << "); ";
    if (!(g_parallel > 0.0) || !(g_perp > 0.0)) why << "g values must be positive; ";
    if (!(zero_field_D >= 0.0)) why << "zero_field_D must be >= 0; ";
    if (!(hyperfine_111 >= 0.0) || !(hyperfine_other >= 0.0)) why << "hyperfine constants must be >= 0; ";
    if (!(linewidth_pp > 0.0)) why << "linewidth_pp must be > 0; ";
    if (nuclear_spin < 0.0 || std::fmod(2.0 * nuclear_spin, 1.0) != 0.0)
        why << "nuclear_spin must be a non-negative half-integer; ";
    if (hyperfine_other * hyperfine_other < hyperfine_111 * hyperfine_111 / 9.0)
        why << "hyperfine_other below |hyperfine_111|/3 implies an imaginary perpendicular component; ";
    auto const msg = why.str();
    if (!msg.empty())
        throw DomainError(std::string("invalid ") + std::string(to_string(label)) + " parameters: " + msg);
}

double CenterParams::g_effective(double cos_theta) const {
    double const c2 = cos_theta * cos_theta;
    return std::sqrt(g_parallel * g_parallel * c2 + g_perp * g_perp * (1.0 - c2));
}

double CenterParams::hyperfine_effective(double cos_theta) const {
    double const a_par2 = hyperfine_111 * hyperfine_111;
    // A_other^2 = A_par^2 / 9 + A_perp^2 * 8 / 9 at cos_theta = -1/3
    double const a_perp2 = (hyperfine_other * hyperfine_other - a_par2 / 9.0) * 9.0 / 8.0;
    double const c2 = cos_theta * cos_theta;
    if (c2 == 1.0) return hyperfine_111;
    if (std::abs(c2 - 1.0 / 9.0) < 1e-15) return hyperfine_other;
    return std::sqrt(a_par2 * c2 + a_perp2 * (1.0 - c2));
}

std::vector<Orientation> orientations(double tilt_deg, double azimuth_deg) {
    if (!std::isfinite(tilt_deg) || std::abs(tilt_deg) > 90.0)
        throw DomainError("tilt_deg must be within [-90, 90]");
    if (tilt_deg == 0.0) {
        return {Orientation{AxisLabel::o111, 1.0, 1}, Orientation{AxisLabel::oA, -1.0 / 3.0, 3}};
    }
    double const inv3 = 1.0 / std::sqrt(3.0);
    std::array<Vec3, 4> const axes{{
        {inv3, inv3, inv3},
        {inv3, -inv3, -inv3},
        {-inv3, inv3, -inv3},
        {-inv3, -inv3, inv3},
    }};
    Vec3 const u = normalized(Vec3{2.0, -1.0, -1.0});
    Vec3 const v = cross(axes[0], u);
    double const t = tilt_deg * std::numbers::pi / 180.0;
    double const phi = azimuth_deg * std::numbers::pi / 180.0;
    Vec3 const field_dir = normalized(
        sum(scaled(axes[0], std::cos(t)), scaled(sum(scaled(u, std::cos(phi)), scaled(v, std::sin(phi))), std::sin(t))));

    std::array<AxisLabel, 4> const labels{AxisLabel::o111, AxisLabel::oA, AxisLabel::oB, AxisLabel::oC};
    std::vector<Orientation> out;
    out.reserve(4);
    for (std::size_t i = 0; i < 4; ++i) out.push_back(Orientation{labels[i], dot(axes[i], field_dir), 1});
    return out;
}

double zeeman_temperature(double frequency_hz) {
    if (!(frequency_hz > 0.0)) throw DomainError("zeeman_temperature: frequency must be > 0");
    return PhysicalConstants::planck_h * frequency_hz / PhysicalConstants::boltzmann_k;
}

double field_to_frequency(double field_t, double g) {
    if (!(g > 0.0)) throw DomainError("field_to_frequency: g must be > 0");
    if (field_t < 0.0) throw DomainError("field_to_frequency: field must be >= 0");
    return g * PhysicalConstants::bohr_magneton * field_t / PhysicalConstants::planck_h;
}

double frequency_to_field(double frequency_hz, double g) {
    if (!(g > 0.0)) throw DomainError("frequency_to_field: g must be > 0");
    if (frequency_hz < 0.0) throw DomainError("frequency_to_field: frequency must be >= 0");
    return frequency_hz * PhysicalConstants::planck_h / (g * PhysicalConstants::bohr_magneton);
}

double zfs_first_order_shift(double zero_field_d, double cos_theta, double m_s_low, double m_s_high) {
    if (!(std::abs(cos_theta) <= 1.0)) throw DomainError("zfs_first_order_shift: |cos_theta| must be <= 1");
    return -zero_field_d * angular_factor(cos_theta) * (m_s_high * m_s_high - m_s_low * m_s_low);
}

double resonance_field(TransitionSpec const& spec, double spectrometer_freq_hz) {
    auto const& c = spec.center;
    if (spec.m_s_high - spec.m_s_low != 1.0)
        throw DomainError("resonance_field: transition must satisfy m_s_high = m_s_low + 1");
    if (std::abs(spec.m_s_low) > c.spin || std::abs(spec.m_s_high) > c.spin)
        throw DomainError("resonance_field: m_s outside the spin multiplet");
    if (std::abs(spec.m_i) > c.nuclear_spin) throw DomainError("resonance_field: m_i outside the nuclear multiplet");

    double const cos_theta = spec.orientation.cos_theta;
    double const zfs = zfs_first_order_shift(c.zero_field_D, cos_theta, spec.m_s_low, spec.m_s_high);
    double const hyperfine = spec.m_i * c.hyperfine_effective(cos_theta);
    double const effective = spectrometer_freq_hz + zfs - hyperfine;
    if (!(effective > 0.0)) {
        std::ostringstream msg;
        msg << "resonance_field: spectrometer frequency " << spectrometer_freq_hz
            << " Hz is below the zero-field offset of the transition (net " << effective << " Hz)";
        throw DomainError(msg.str());
    }
    return frequency_to_field(effective, c.g_effective(cos_theta));
}

}  // namespace spinbath
