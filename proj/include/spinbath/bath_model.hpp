#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace spinbath {

/// A relaxation rate tagged with its time unit. Rates in different units do
/// not mix implicitly; use the explicit conversions.
template <class Unit>
struct Rate {
    double value = 0.0;

    [[nodiscard]] double time() const { return 1.0 / value; }
    friend bool operator==(Rate, Rate) = default;
};

struct PerMicrosecondTag {};
struct PerSecondTag {};

using RatePerMicrosecond = Rate<PerMicrosecondTag>;
using RatePerSecond = Rate<PerSecondTag>;

[[nodiscard]] constexpr RatePerSecond to_per_second(RatePerMicrosecond r) { return {r.value * 1e6}; }
[[nodiscard]] constexpr RatePerMicrosecond to_per_microsecond(RatePerSecond r) { return {r.value * 1e-6}; }

/// Flip-flop-limited coherence: 1/T2 = C P_down P_up + Gamma_res.
struct T2ModelParams {
    double C = 0.58136;          // 1/us
    double T_Ze = 14.7;          // K
    double Gamma_res = 0.004;    // 1/us
};

/// Phonon-limited spin-lattice relaxation: 1/T1 = A T + B T^5.
struct T1ModelParams {
    double A = 8.0e-3;   // 1/(s K)
    double B = 3.5e-10;  // 1/(s K^5)
};

struct BathModelParams {
    T2ModelParams t2;
    T1ModelParams t1;

    void validate() const;
};

struct PolarizationPoint {
    double temperature = 0.0;
    double polarization = 0.0;
    double p_down = 0.5;  // ground (m_S = -1/2) population
    double p_up = 0.5;
};

/// Two-level thermal populations from the Zeeman partition function.
[[nodiscard]] PolarizationPoint polarization(double temperature_k, double zeeman_temperature_k);

/// P_down * P_up = 1 / (2 + 2 cosh(T_Ze/T)), evaluated with exp(-x) only.
[[nodiscard]] double flip_flop_factor(double temperature_k, double zeeman_temperature_k);

[[nodiscard]] RatePerMicrosecond t2_rate(double temperature_k, T2ModelParams const& params);
[[nodiscard]] RatePerSecond t1_rate(double temperature_k, T1ModelParams const& params);

/// Temperature where the linear and T^5 terms are equal, (A/B)^(1/4).
[[nodiscard]] double t1_crossover_temperature(T1ModelParams const& params);

struct ModelCurvePoint {
    double temperature = 0.0;
    double rate_per_s = 0.0;
    double time_s = 0.0;
};

[[nodiscard]] std::vector<ModelCurvePoint> evaluate_t2_curve(std::span<double const> temperatures,
                                                             T2ModelParams const& params);
[[nodiscard]] std::vector<ModelCurvePoint> evaluate_t1_curve(std::span<double const> temperatures,
                                                             T1ModelParams const& params);

/// CSV `temperature_K,rate,value_time` in SI units (1/s and s).
void write_model_curve_csv(std::ostream& out, std::vector<ModelCurvePoint> const& curve,
                           std::vector<std::string> const& comments = {});

}  // namespace spinbath
