#include "spinbath/bath_model.hpp"

#include <cmath>
#include <ostream>

#include "spinbath/error.hpp"
#include "spinbath/text.hpp"

namespace spinbath {

namespace {

void require_positive_temperature(double t, char const* who) {
    if (!(t > 0.0)) throw DomainError(std::string(who) + ": temperature must be > 0");
}

}  // namespace

void BathModelParams::validate() const {
    if (!(t2.C >= 0.0) || !(t2.Gamma_res >= 0.0) || !(t2.T_Ze > 0.0))
        throw DomainError("BathModelParams: need C >= 0, Gamma_res >= 0, T_Ze > 0");
    if (!(t1.A >= 0.0) || !(t1.B >= 0.0)) throw DomainError("BathModelParams: need A >= 0, B >= 0");
}

PolarizationPoint polarization(double temperature_k, double zeeman_temperature_k) {
    require_positive_temperature(temperature_k, "polarization");
    if (!(zeeman_temperature_k > 0.0)) throw DomainError("polarization: T_Ze must be > 0");
    double const e = std::exp(-zeeman_temperature_k / temperature_k);
    PolarizationPoint p;
    p.temperature = temperature_k;
    p.p_down = 1.0 / (1.0 + e);
    p.p_up = e / (1.0 + e);
    // tanh(x/2) without cancellation in p_down - p_up
    p.polarization = -std::expm1(-zeeman_temperature_k / temperature_k) / (1.0 + e);
    return p;
}

double flip_flop_factor(double temperature_k, double zeeman_temperature_k) {
    require_positive_temperature(temperature_k, "flip_flop_factor");
    double const e = std::exp(-zeeman_temperature_k / temperature_k);
    double const d = 1.0 + e;
    return e / (d * d);
}

RatePerMicrosecond t2_rate(double temperature_k, T2ModelParams const& params) {
    require_positive_temperature(temperature_k, "t2_rate");
    if (!(params.C >= 0.0) || !(params.Gamma_res >= 0.0) || !(params.T_Ze > 0.0))
        throw DomainError("t2_rate: need C >= 0, Gamma_res >= 0, T_Ze > 0");
    return {params.C * flip_flop_factor(temperature_k, params.T_Ze) + params.Gamma_res};
}

RatePerSecond t1_rate(double temperature_k, T1ModelParams const& params) {
    require_positive_temperature(temperature_k, "t1_rate");
    if (!(params.A >= 0.0) || !(params.B >= 0.0)) throw DomainError("t1_rate: need A >= 0, B >= 0");
    double const t2 = temperature_k * temperature_k;
    return {params.A * temperature_k + params.B * t2 * t2 * temperature_k};
}

double t1_crossover_temperature(T1ModelParams const& params) {
    if (!(params.A > 0.0) || !(params.B > 0.0)) throw DomainError("t1_crossover_temperature: need A, B > 0");
    return std::pow(params.A / params.B, 0.25);
}

std::vector<ModelCurvePoint> evaluate_t2_curve(std::span<double const> temperatures, T2ModelParams const& params) {
    std::vector<ModelCurvePoint> out;
    out.reserve(temperatures.size());
    for (double t : temperatures) {
        auto const rate = to_per_second(t2_rate(t, params));
        out.push_back({t, rate.value, rate.time()});
    }
    return out;
}

std::vector<ModelCurvePoint> evaluate_t1_curve(std::span<double const> temperatures, T1ModelParams const& params) {
    std::vector<ModelCurvePoint> out;
    out.reserve(temperatures.size());
    for (double t : temperatures) {
        auto const rate = t1_rate(t, params);
        out.push_back({t, rate.value, rate.time()});
    }
    return out;
}

void write_model_curve_csv(std::ostream& out, std::vector<ModelCurvePoint> const& curve,
                           std::vector<std::string> const& comments) {
    for (auto const& c : comments) out << "# " << c << '\n';
    out << "temperature_K,rate,value_time\n";
    for (auto const& p : curve)
        out << text::format_double(p.temperature) << ',' << text::format_double(p.rate_per_s) << ','
            << text::format_double(p.time_s) << '\n';
}

}  // namespace spinbath
