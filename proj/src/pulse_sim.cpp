#include "spinbath/pulse_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "spinbath/bath_model.hpp"
#include "spinbath/error.hpp"
#include "spinbath/rng.hpp"
#include "spinbath/text.hpp"

namespace spinbath {

namespace {

// Stream reserved for coupling draws; realizations use streams 0, 1, 2, ...
constexpr std::uint64_t coupling_stream = std::numeric_limits<std::uint64_t>::max();
constexpr std::size_t realizations_per_block = 64;

void require_ascending(std::span<double const> grid, char const* who) {
    if (grid.empty()) throw DomainError(std::string(who) + ": delay grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]) || grid[i] < 0.0)
            throw DomainError(std::string(who) + ": delays must be finite and >= 0");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError(std::string(who) + ": delay grid must be ascending");
    }
}

// Running mean and sum of squared deviations (Welford), merged in a fixed order.
struct Moments {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double v) {
        count += 1.0;
        double const d = v - mean;
        mean += d / count;
        m2 += d * (v - mean);
    }

    void merge(Moments const& o) {
        if (o.count == 0.0) return;
        double const total = count + o.count;
        double const d = o.mean - mean;
        mean += d * o.count / total;
        m2 += o.m2 + d * d * count * o.count / total;
        count = total;
    }
};

// Echo amplitudes cos(phi_k) of one realization.
void run_realization(RtnBath const& bath, std::span<double const> tau, RandomStream& rng, std::vector<double>& phase,
                     std::vector<double>& amplitudes) {
    std::size_t const nt = tau.size();
    std::fill(phase.begin(), phase.end(), 0.0);
    double const rate = bath.switching_rate;
    double const inf = std::numeric_limits<double>::infinity();

    for (double b : bath.couplings) {
        double state = rng.sign();
        double next_switch = rate > 0.0 ? rng.exponential(rate) : inf;
        double t0 = 0.0;
        double integral = 0.0;  // integral of state from 0 to t0

        auto advance = [&](double t) {
            while (next_switch < t) {
                integral += state * (next_switch - t0);
                t0 = next_switch;
                state = -state;
                next_switch += rng.exponential(rate);
            }
            return integral + state * (t - t0);
        };

        // Queries at tau_k and 2 tau_k, visited in time order.
        std::size_t i_first = 0;
        std::size_t i_second = 0;
        std::vector<double>& echo = amplitudes;  // scratch: 2 I(tau_k) per k
        while (i_first < nt || i_second < nt) {
            bool const take_first = i_first < nt && (i_second >= nt || tau[i_first] <= 2.0 * tau[i_second]);
            if (take_first) {
                echo[i_first] = 2.0 * advance(tau[i_first]);
                ++i_first;
            } else {
                double const second = advance(2.0 * tau[i_second]);
                // Per-source phase so that static contributions cancel exactly.
                phase[i_second] += b * (echo[i_second] - second);
                ++i_second;
            }
        }
    }
    for (std::size_t k = 0; k < nt; ++k) amplitudes[k] = std::cos(phase[k]);
}

}  // namespace

BathNoiseConfig BathNoiseConfig::defaults() {
    BathNoiseConfig cfg;
    cfg.base_rate =
        calibrated_base_rate(cfg.n_sources, calibration_t2_s, cfg.residual_rate, calibration_temperature_k, cfg.T_Ze);
    return cfg;
}

double BathNoiseConfig::effective_rate() const { return base_rate * flip_flop_factor(temperature, T_Ze) / 0.25; }

void BathNoiseConfig::validate() const {
    if (n_sources < 1) throw DomainError("BathNoiseConfig: n_sources must be >= 1");
    if (!(coupling_scale >= 0.0)) throw DomainError("BathNoiseConfig: coupling_scale must be >= 0");
    if (!(base_rate >= 0.0)) throw DomainError("BathNoiseConfig: base_rate must be >= 0");
    if (!(temperature > 0.0)) throw DomainError("BathNoiseConfig: temperature must be > 0");
    if (!(T_Ze > 0.0)) throw DomainError("BathNoiseConfig: T_Ze must be > 0");
    if (!(residual_rate >= 0.0)) throw DomainError("BathNoiseConfig: residual_rate must be >= 0");
}

double calibrated_base_rate(std::size_t n_sources, double target_t2_s, double residual_rate, double temperature_k,
                            double zeeman_temperature_k) {
    if (n_sources < 1 || !(target_t2_s > 0.0)) throw DomainError("calibrated_base_rate: invalid target");
    double const bath_rate = 1.0 / target_t2_s - residual_rate;
    if (!(bath_rate > 0.0)) throw DomainError("calibrated_base_rate: residual rate alone exceeds the target");
    double const normalized = flip_flop_factor(temperature_k, zeeman_temperature_k) / 0.25;
    return bath_rate / (static_cast<double>(n_sources) * normalized);
}

std::vector<double> sample_couplings(BathNoiseConfig const& cfg) {
    if (cfg.n_sources == 0) throw DomainError("sample_couplings: n_sources must be >= 1");
    if (!(cfg.coupling_scale >= 0.0)) throw DomainError("sample_couplings: coupling_scale must be >= 0");
    RandomStream rng(cfg.seed, coupling_stream);
    std::vector<double> out;
    out.reserve(cfg.n_sources);
    for (std::size_t i = 0; i < cfg.n_sources; ++i) {
        double const r_cubed = rng.uniform_open0();
        int const sign = rng.sign();
        out.push_back(sign * cfg.coupling_scale / r_cubed);
    }
    return out;
}

std::string to_string(PulseSequence s) { return s == PulseSequence::HahnEcho ? "hahn_echo" : "inversion_recovery"; }

PulseSequence pulse_sequence_from_string(std::string const& s) {
    if (s == "hahn_echo" || s == "hahn") return PulseSequence::HahnEcho;
    if (s == "inversion_recovery" || s == "inversion") return PulseSequence::InversionRecovery;
    throw LookupError("unknown pulse sequence '" + s + "' (expected hahn or inversion)");
}

DecayTrace simulate_hahn_echo(RtnBath const& bath, std::span<double const> tau_grid, std::size_t n_realizations,
                              std::uint64_t seed, unsigned threads) {
    require_ascending(tau_grid, "simulate_hahn_echo");
    if (n_realizations < 1) throw DomainError("simulate_hahn_echo: n_realizations must be >= 1");
    if (!(bath.switching_rate >= 0.0) || !(bath.residual_rate >= 0.0))
        throw DomainError("simulate_hahn_echo: rates must be >= 0");

    std::size_t const nt = tau_grid.size();
    std::size_t const n_blocks = (n_realizations + realizations_per_block - 1) / realizations_per_block;
    std::vector<std::vector<Moments>> blocks(n_blocks, std::vector<Moments>(nt));
    std::atomic<std::size_t> next_block{0};

    auto worker = [&] {
        std::vector<double> phase(nt);
        std::vector<double> amplitudes(nt);
        for (std::size_t blk = next_block++; blk < n_blocks; blk = next_block++) {
            std::size_t const begin = blk * realizations_per_block;
            std::size_t const end = std::min(n_realizations, begin + realizations_per_block);
            for (std::size_t r = begin; r < end; ++r) {
                RandomStream rng(seed, r);
                run_realization(bath, tau_grid, rng, phase, amplitudes);
                for (std::size_t k = 0; k < nt; ++k) blocks[blk][k].add(amplitudes[k]);
            }
        }
    };

    threads = std::clamp(threads, 1u, static_cast<unsigned>(std::max<std::size_t>(n_blocks, 1)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    std::vector<Moments> total(nt);
    for (auto const& blk : blocks)
        for (std::size_t k = 0; k < nt; ++k) total[k].merge(blk[k]);

    DecayTrace trace;
    trace.sequence = PulseSequence::HahnEcho;
    trace.delays.assign(tau_grid.begin(), tau_grid.end());
    trace.n_realizations = n_realizations;
    trace.seed = seed;
    auto const n = static_cast<double>(n_realizations);
    for (std::size_t k = 0; k < nt; ++k) {
        double const residual = std::exp(-2.0 * tau_grid[k] * bath.residual_rate);
        double const se = n_realizations > 1 ? std::sqrt(total[k].m2 / (n - 1.0) / n) : 0.0;
        trace.amplitude.push_back(total[k].mean * residual);
        trace.std_error.push_back(se * residual);
    }
    return trace;
}

DecayTrace simulate_hahn_echo(BathNoiseConfig const& cfg, std::span<double const> tau_grid, std::size_t n_realizations,
                              unsigned threads) {
    cfg.validate();
    RtnBath const bath{sample_couplings(cfg), cfg.effective_rate(), cfg.residual_rate};
    return simulate_hahn_echo(bath, tau_grid, n_realizations, cfg.seed, threads);
}

DecayTrace simulate_inversion_recovery(double t1_s, std::span<double const> delay_grid, double noise_amplitude,
                                       std::uint64_t seed) {
    if (!(t1_s > 0.0)) throw DomainError("simulate_inversion_recovery: t1 must be > 0");
    if (!(noise_amplitude >= 0.0)) throw DomainError("simulate_inversion_recovery: noise amplitude must be >= 0");
    require_ascending(delay_grid, "simulate_inversion_recovery");
    DecayTrace trace;
    trace.sequence = PulseSequence::InversionRecovery;
    trace.delays.assign(delay_grid.begin(), delay_grid.end());
    trace.n_realizations = 1;
    trace.seed = seed;
    RandomStream rng(seed, 0);
    for (double t : delay_grid) {
        double value = 1.0 - 2.0 * std::exp(-t / t1_s);
        if (noise_amplitude > 0.0) value += noise_amplitude * rng.normal();
        trace.amplitude.push_back(value);
        trace.std_error.push_back(noise_amplitude);
    }
    return trace;
}

std::vector<double> log_tau_grid(double tau_min, double tau_max, std::size_t points) {
    if (!(tau_min > 0.0) || !(tau_max > tau_min) || points < 2) throw DomainError("log_tau_grid: invalid range");
    std::vector<double> grid{0.0};
    double const ratio = std::log(tau_max / tau_min);
    for (std::size_t i = 0; i < points; ++i)
        grid.push_back(tau_min * std::exp(ratio * static_cast<double>(i) / static_cast<double>(points - 1)));
    return grid;
}

std::vector<double> default_tau_grid() { return log_tau_grid(50e-9, 500e-6, 48); }

std::vector<T2ScanPoint> effective_t2_scan(BathNoiseConfig const& templ, std::span<double const> temperatures,
                                           T2ScanOptions const& options) {
    auto const& model = find_model("echo_decay");
    std::vector<T2ScanPoint> out;
    for (double t : temperatures) {
        if (!(t > 0.0)) throw ScanError("effective_t2_scan: temperature must be > 0", t);
        BathNoiseConfig cfg = templ;
        cfg.temperature = t;
        auto const trace = simulate_hahn_echo(cfg, options.tau_grid, options.n_realizations, options.threads);
        FitData data{trace.delays, trace.amplitude, {}};
        FitResult result;
        try {
            result = fit(model, data, {}, options.fit);
        } catch (std::exception const& e) {
            throw ScanError("effective_t2_scan: fit failed at T = " + text::format_double(t) + " K: " + e.what(), t);
        }
        if (!result.converged)
            throw ScanError("effective_t2_scan: fit did not converge at T = " + text::format_double(t) + " K (" +
                                result.termination + ")",
                            t);
        out.push_back(T2ScanPoint{t, result.param("T2"), result.stderr_of("T2"), std::move(result)});
    }
    return out;
}

void write_decay_trace_csv(std::ostream& out, DecayTrace const& trace, std::vector<std::string> const& extra_comments) {
    for (auto const& c : extra_comments) out << "# " << c << '\n';
    out << "# sequence=" << to_string(trace.sequence) << " n_realizations=" << trace.n_realizations
        << " seed=" << trace.seed << '\n';
    out << "delay_s,amplitude,std_error\n";
    for (std::size_t i = 0; i < trace.delays.size(); ++i)
        out << text::format_double(trace.delays[i]) << ',' << text::format_double(trace.amplitude[i]) << ','
            << text::format_double(trace.std_error[i]) << '\n';
}

DecayTrace read_decay_trace_csv(std::istream& in) {
    DecayTrace trace;
    std::string line;
    std::size_t row = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++row;
        auto const view = text::trim(line);
        if (view.empty()) continue;
        if (view.front() == '#') {
            std::istringstream fields{std::string(view.substr(1))};
            std::string kv;
            while (fields >> kv) {
                auto const eq = kv.find('=');
                if (eq == std::string::npos) continue;
                auto const key = kv.substr(0, eq);
                auto const value = kv.substr(eq + 1);
                try {
                    if (key == "sequence") trace.sequence = pulse_sequence_from_string(value);
                    if (key == "n_realizations") trace.n_realizations = std::stoull(value);
                    if (key == "seed") trace.seed = std::stoull(value);
                } catch (std::exception const&) {
                    throw ParseError(ParseError::Kind::InvalidValue, "bad metadata '" + kv + "'", row);
                }
            }
            continue;
        }
        if (!header_seen) {
            if (view != "delay_s,amplitude,std_error")
                throw ParseError(ParseError::Kind::BadHeader, "expected header 'delay_s,amplitude,std_error'", row);
            header_seen = true;
            continue;
        }
        auto const cells = text::split(view, ',');
        if (cells.size() != 3)
            throw ParseError(ParseError::Kind::MalformedRow, "expected 3 columns, got " + std::to_string(cells.size()), row);
        double values[3];
        for (std::size_t c = 0; c < 3; ++c) {
            auto const v = text::parse_double(cells[c]);
            if (!v) throw ParseError(ParseError::Kind::MalformedRow, "not a number: '" + cells[c] + "'", row, c + 1);
            values[c] = *v;
        }
        trace.delays.push_back(values[0]);
        trace.amplitude.push_back(values[1]);
        trace.std_error.push_back(values[2]);
    }
    if (!header_seen) throw ParseError(ParseError::Kind::BadHeader, "missing header 'delay_s,amplitude,std_error'");
    return trace;
}

}  // namespace spinbath
