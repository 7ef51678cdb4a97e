#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinbath/fitkit.hpp"

namespace spinbath {

/// Classical random-telegraph model of the N spin bath seen by one central spin.
///
/// Each source toggles between +b_i and -b_i (rad/s) with exponentially
/// distributed waiting times. The switching rate follows the bath flip-flop
/// factor, normalized so that `base_rate` is the infinite-temperature rate.
/// `residual_rate` is a temperature-independent echo decay (1/s) standing in
/// for dephasing channels that are not simulated explicitly.
struct BathNoiseConfig {
    std::size_t n_sources = 16;
    double coupling_scale = 6.283185307179586e6;  // rad/s, 2 pi x 1 MHz
    double base_rate = 0.0;                       // 1/s, see defaults()
    double temperature = 300.0;                   // K
    double T_Ze = 11.518183376078930;             // K, h (240 GHz) / k_B
    double residual_rate = 4.0e3;                 // 1/s, 0.004 1/us
    std::uint64_t seed = 1;

    /// Default bath with `base_rate` calibrated so that the echo decays with
    /// T2 = `calibration_t2_s` at `calibration_temperature_k`.
    [[nodiscard]] static BathNoiseConfig defaults();

    /// Switching rate at `temperature` (1/s).
    [[nodiscard]] double effective_rate() const;

    void validate() const;
};

inline constexpr double calibration_t2_s = 6.7e-6;
inline constexpr double calibration_temperature_k = 300.0;

/// base_rate such that n_sources * rate(T) + residual = 1 / target_t2. In the
/// slow-fluctuation regime (|b| >> rate) each switch fully dephases, so this
/// is the echo decay rate per unit 2 tau.
[[nodiscard]] double calibrated_base_rate(std::size_t n_sources, double target_t2_s, double residual_rate,
                                          double temperature_k, double zeeman_temperature_k);

/// Couplings b_i = +/- coupling_scale / r_i^3 with r_i^3 uniform on (0, 1],
/// i.e. sources uniformly distributed in the unit ball. Deterministic in seed.
[[nodiscard]] std::vector<double> sample_couplings(BathNoiseConfig const& cfg);

/// Explicit bath used by the simulator.
struct RtnBath {
    std::vector<double> couplings;  // rad/s
    double switching_rate = 0.0;    // 1/s, per source
    double residual_rate = 0.0;     // 1/s
};

enum class PulseSequence { HahnEcho, InversionRecovery };

[[nodiscard]] std::string to_string(PulseSequence s);
[[nodiscard]] PulseSequence pulse_sequence_from_string(std::string const& s);

struct DecayTrace {
    PulseSequence sequence = PulseSequence::HahnEcho;
    std::vector<double> delays;  // s; tau for HahnEcho, T for InversionRecovery
    std::vector<double> amplitude;
    std::vector<double> std_error;
    std::size_t n_realizations = 0;
    std::uint64_t seed = 0;
};

/// Hahn echo pi/2 - tau - pi - tau - echo with ideal instantaneous pulses.
/// Realization r draws from stream (seed, r); results are independent of
/// `threads`.
[[nodiscard]] DecayTrace simulate_hahn_echo(RtnBath const& bath, std::span<double const> tau_grid,
                                            std::size_t n_realizations, std::uint64_t seed, unsigned threads = 1);

[[nodiscard]] DecayTrace simulate_hahn_echo(BathNoiseConfig const& cfg, std::span<double const> tau_grid,
                                            std::size_t n_realizations, unsigned threads = 1);

/// Echo-detected inversion recovery: 1 - 2 exp(-T/t1) plus optional Gaussian
/// noise of standard deviation `noise_amplitude`.
[[nodiscard]] DecayTrace simulate_inversion_recovery(double t1_s, std::span<double const> delay_grid,
                                                     double noise_amplitude, std::uint64_t seed);

/// Zero followed by `points` log-spaced values in [tau_min, tau_max].
[[nodiscard]] std::vector<double> log_tau_grid(double tau_min, double tau_max, std::size_t points);

/// Grid used by effective_t2_scan unless overridden: 0 and 48 points in [50 ns, 500 us].
[[nodiscard]] std::vector<double> default_tau_grid();

struct T2ScanOptions {
    std::vector<double> tau_grid = default_tau_grid();
    std::size_t n_realizations = 2000;
    unsigned threads = 1;
    FitOptions fit;
};

struct T2ScanPoint {
    double temperature = 0.0;
    double t2 = 0.0;  // s
    double t2_stderr = 0.0;
    FitResult fit;
};

class ScanError : public std::runtime_error {
public:
    ScanError(std::string const& what, double temperature)
        : std::runtime_error(what), temperature_(temperature) {}
    [[nodiscard]] double temperature() const noexcept { return temperature_; }

private:
    double temperature_;
};

/// Simulates a Hahn echo at each temperature (same bath and seed as the
/// template) and fits a exp(-2 tau / T2). Throws ScanError on fit failure.
[[nodiscard]] std::vector<T2ScanPoint> effective_t2_scan(BathNoiseConfig const& templ,
                                                         std::span<double const> temperatures,
                                                         T2ScanOptions const& options = {});

void write_decay_trace_csv(std::ostream& out, DecayTrace const& trace, std::vector<std::string> const& extra_comments = {});
[[nodiscard]] DecayTrace read_decay_trace_csv(std::istream& in);

}  // namespace spinbath
