#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "spinbath/bath_model.hpp"
#include "spinbath/config.hpp"
#include "spinbath/datasets.hpp"
#include "spinbath/error.hpp"
#include "spinbath/fitkit.hpp"
#include "spinbath/pulse_sim.hpp"
#include "spinbath/spectra.hpp"
#include "spinbath/spin_core.hpp"
#include "spinbath/text.hpp"

namespace spinbath::cli {

namespace fs = std::filesystem;

namespace {

constexpr char const* output_dir_env = "SPINBATH_OUTPUT_DIR";

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotConvergedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Effective settings of one invocation; hashed into the provenance header.
using Settings = std::map<std::string, std::string>;

std::string provenance(std::string const& command, Settings const& settings, std::uint64_t seed) {
    std::string canonical = "command=" + command + "\n";
    for (auto const& [k, v] : settings) canonical += k + "=" + v + "\n";
    return "spinbath " SPINBATH_VERSION " command=" + command + " config_hash=" +
           text::hex64(text::fnv1a64(canonical)) + " seed=" + std::to_string(seed);
}

fs::path resolve_output_dir(std::string const& flag, std::string const& from_config = {}) {
    if (!flag.empty()) return flag;
    if (!from_config.empty()) return from_config;
    if (char const* env = std::getenv(output_dir_env); env != nullptr && *env != '\0') return env;
    return ".";
}

std::ofstream open_output(fs::path const& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

template <class Writer>
void emit(std::string const& path, std::ostream& stdout_stream, Writer&& write) {
    if (path.empty() || path == "-") {
        write(stdout_stream);
        return;
    }
    auto out = open_output(path);
    write(out);
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::map<std::string, double> parse_assignments(std::vector<std::string> const& items, char const* flag) {
    std::map<std::string, double> out;
    for (auto const& item : items) {
        for (auto const& part : text::split(item, ',')) {
            auto const piece = text::trim(part);
            if (piece.empty()) continue;
            auto const eq = piece.find('=');
            if (eq == std::string_view::npos) throw UsageError(std::string(flag) + ": expected name=value, got '" + std::string(piece) + "'");
            auto const value = text::parse_double(piece.substr(eq + 1));
            if (!value) throw UsageError(std::string(flag) + ": '" + std::string(piece) + "' has a non-numeric value");
            out[std::string(text::trim(piece.substr(0, eq)))] = *value;
        }
    }
    return out;
}

std::string join_settings(std::map<std::string, double> const& values) {
    std::string s;
    for (auto const& [k, v] : values) s += (s.empty() ? "" : ",") + k + "=" + text::format_double(v);
    return s;
}

std::vector<double> values_or_usage(std::string const& spec, char const* flag) {
    try {
        return parse_value_list(spec);
    } catch (DomainError const& e) {
        throw UsageError(std::string(flag) + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// polarization

struct PolarizationArgs {
    double freq = 240e9;
    std::string temps = "1.3:300:log";
    std::string out;
};

void run_polarization(PolarizationArgs const& a, std::ostream& out) {
    auto const temps = values_or_usage(a.temps, "--temps");
    double const t_ze = zeeman_temperature(a.freq);
    Settings const settings{{"freq", text::format_double(a.freq)}, {"temps", a.temps}};
    emit(a.out, out, [&](std::ostream& o) {
        o << "# " << provenance("polarization", settings, 0) << '\n';
        o << "# zeeman_temperature_K=" << text::format_double(t_ze) << '\n';
        o << "temperature_K,polarization,flip_flop_factor\n";
        for (double t : temps) {
            auto const p = polarization(t, t_ze);
            o << text::format_double(t) << ',' << text::format_double(p.polarization) << ','
              << text::format_double(flip_flop_factor(t, t_ze)) << '\n';
        }
    });
}

// ---------------------------------------------------------------------------
// spectrum

struct SpectrumArgs {
    std::string config;
    std::string out_dir;
    unsigned threads = 1;
};

void run_spectrum(SpectrumArgs const& a, std::ostream& out) {
    RunConfig const cfg = a.config.empty() ? RunConfig::defaults() : RunConfig::load(a.config);
    cfg.validate();

    auto const sticks = build_sticks(cfg.centers, cfg.frequency_hz, cfg.temperature_k, cfg.stick_options());
    SpectrumMetadata meta{cfg.frequency_hz, cfg.temperature_k, {}};
    for (auto const& c : cfg.centers) meta.populations.emplace_back(c.params.label, c.population);
    auto const spectrum = convolve(sticks, cfg.grid, meta, a.threads);
    auto const peaks = analyze_peaks(spectrum);

    std::string const header = "spinbath " SPINBATH_VERSION " command=spectrum config_hash=" + text::hex64(cfg.hash()) +
                               " seed=" + std::to_string(cfg.seed);
    fs::path const dir = resolve_output_dir(a.out_dir, cfg.output_dir);
    {
        auto f = open_output(dir / "spectrum.csv");
        write_spectrum_csv(f, spectrum, {header});
    }
    {
        auto f = open_output(dir / "peaks.csv");
        write_peaks_csv(f, peaks, {header});
    }
    {
        auto f = open_output(dir / "sticks.csv");
        f << "# " << header << '\n' << "field_T,weight,center,m_s_low,m_s_high,m_i,cos_theta\n";
        for (auto const& s : sticks.sticks)
            f << text::format_double(s.field) << ',' << text::format_double(s.weight) << ','
              << to_string(s.label.center.label) << ',' << text::format_double(s.label.m_s_low) << ','
              << text::format_double(s.label.m_s_high) << ',' << text::format_double(s.label.m_i) << ','
              << text::format_double(s.label.orientation.cos_theta) << '\n';
    }

    for (auto const& w : spectrum.warnings) out << "warning: " << w << '\n';
    out << "peaks: " << peaks.size() << '\n';
    for (auto const& p : peaks)
        out << "  B = " << text::format_double(p.center_field) << " T, pp width = "
            << text::format_double(p.pp_width * 1e4) << " G, pp amplitude = " << text::format_double(p.pp_amplitude)
            << '\n';
    out << "wrote " << (dir / "spectrum.csv").string() << ", " << (dir / "peaks.csv").string() << ", "
        << (dir / "sticks.csv").string() << '\n';
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string sequence;
    double temp = 300.0;
    std::uint64_t seed = 1;
    std::size_t realizations = 2000;
    double tau_min = 50e-9;
    double tau_max = 500e-6;
    std::size_t tau_points = 48;
    std::optional<std::size_t> n_sources;
    std::optional<double> coupling_scale;
    std::optional<double> base_rate;
    std::optional<double> t_ze;
    double freq = 240e9;
    std::optional<double> residual_rate;
    std::optional<double> t1;
    double noise = 0.0;
    std::optional<double> delay_max;
    std::size_t delay_points = 40;
    unsigned threads = 1;
    std::string out;
    std::string out_dir;
};

void run_simulate(SimulateArgs const& a, std::ostream& out) {
    PulseSequence sequence{};
    try {
        sequence = pulse_sequence_from_string(a.sequence);
    } catch (LookupError const& e) {
        throw UsageError(std::string("--sequence: ") + e.what());
    }

    Settings settings{{"sequence", to_string(sequence)}, {"temp", text::format_double(a.temp)}};
    DecayTrace trace;
    if (sequence == PulseSequence::HahnEcho) {
        BathNoiseConfig cfg;
        cfg.T_Ze = a.t_ze.value_or(zeeman_temperature(a.freq));
        cfg.n_sources = a.n_sources.value_or(cfg.n_sources);
        cfg.coupling_scale = a.coupling_scale.value_or(cfg.coupling_scale);
        cfg.residual_rate = a.residual_rate.value_or(cfg.residual_rate);
        cfg.base_rate = a.base_rate.value_or(calibrated_base_rate(cfg.n_sources, calibration_t2_s, cfg.residual_rate,
                                                                  calibration_temperature_k, cfg.T_Ze));
        cfg.temperature = a.temp;
        cfg.seed = a.seed;
        auto const grid = log_tau_grid(a.tau_min, a.tau_max, a.tau_points);
        trace = simulate_hahn_echo(cfg, grid, a.realizations, a.threads);
        settings.insert({{"n_sources", std::to_string(cfg.n_sources)},
                         {"coupling_scale", text::format_double(cfg.coupling_scale)},
                         {"base_rate", text::format_double(cfg.base_rate)},
                         {"T_Ze", text::format_double(cfg.T_Ze)},
                         {"residual_rate", text::format_double(cfg.residual_rate)},
                         {"realizations", std::to_string(a.realizations)},
                         {"tau_grid", text::format_double(a.tau_min) + ":" + text::format_double(a.tau_max) + ":" +
                                          std::to_string(a.tau_points)}});
    } else {
        double const t1 = a.t1.value_or(t1_rate(a.temp, T1ModelParams{}).time());
        double const delay_max = a.delay_max.value_or(5.0 * t1);
        if (a.delay_points < 2 || !(delay_max > 0.0)) throw UsageError("--delay-points must be >= 2 and --delay-max > 0");
        std::vector<double> grid;
        for (std::size_t i = 0; i < a.delay_points; ++i)
            grid.push_back(delay_max * static_cast<double>(i) / static_cast<double>(a.delay_points - 1));
        trace = simulate_inversion_recovery(t1, grid, a.noise, a.seed);
        settings.insert({{"t1", text::format_double(t1)},
                         {"noise", text::format_double(a.noise)},
                         {"delay_grid", "0:" + text::format_double(delay_max) + ":" + std::to_string(a.delay_points)}});
    }

    std::string path = a.out;
    if (path.empty()) path = (resolve_output_dir(a.out_dir) / ("decay_" + to_string(sequence) + ".csv")).string();
    emit(path, out, [&](std::ostream& o) { write_decay_trace_csv(o, trace, {provenance("simulate", settings, a.seed)}); });
    if (path != "-") out << "wrote " << path << '\n';
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
    std::string model;
    std::string data;
    std::vector<std::string> fix;
    std::vector<std::string> init;
    bool weighted = false;
    double freq = 240e9;
    std::string out_dir;
};

FitData load_fit_data(ModelSpec const& model, std::string const& source, bool weighted) {
    FitData data;
    bool const bath_model = model.name == "t1_model" || model.name == "t2_model";
    if (bath_model) {
        RelaxationDataset ds;
        if (source.rfind("bundled:", 0) == 0) {
            auto const parts = text::split(source, ':');
            if (parts.size() != 3) throw UsageError("--data: expected bundled:<NV|N>:<T1|T2>");
            try {
                ds = bundled(center_label_from_string(parts[1]), relaxation_quantity_from_string(parts[2]));
            } catch (LookupError const& e) {
                throw UsageError(std::string("--data: ") + e.what());
            }
        } else {
            ds = load_csv(source);
        }
        // 1/T2 is fitted in 1/us, 1/T1 in 1/s.
        double const unit = model.name == "t2_model" ? 1e-6 : 1.0;
        for (auto const& r : ds.rows) {
            data.x.push_back(r.temperature);
            data.y.push_back(unit / r.value);
            if (weighted) {
                if (!(r.error > 0.0)) throw UsageError("--weighted needs error_s > 0 on every row");
                data.sigma.push_back(unit * r.error / (r.value * r.value));
            }
        }
    } else {
        std::ifstream in(source);
        if (!in) throw ParseError(ParseError::Kind::MissingFile, "cannot open '" + source + "'");
        auto const trace = read_decay_trace_csv(in);
        data.x = trace.delays;
        data.y = trace.amplitude;
        if (weighted) {
            for (double se : trace.std_error) {
                if (!(se > 0.0)) throw UsageError("--weighted needs std_error > 0 on every row");
                data.sigma.push_back(se);
            }
        }
    }
    return data;
}

int run_fit(FitArgs const& a, std::ostream& out) {
    ModelSpec const* model = nullptr;
    try {
        model = &find_model(a.model);
    } catch (LookupError const& e) {
        throw UsageError(std::string("--model: ") + e.what());
    }
    FitOptions options;
    options.fixed = parse_assignments(a.fix, "--fix");
    options.initial = parse_assignments(a.init, "--init");
    options.spectrometer_freq_hz = a.freq;
    try {
        for (auto const& [name, v] : options.fixed) (void)model->parameter_index(name);
        for (auto const& [name, v] : options.initial) (void)model->parameter_index(name);
    } catch (LookupError const& e) {
        throw UsageError(e.what());
    }

    auto const data = load_fit_data(*model, a.data, a.weighted);
    auto const result = fit(*model, data, {}, options);

    Settings const settings{{"model", model->name},
                            {"data", a.data},
                            {"fix", join_settings(options.fixed)},
                            {"init", join_settings(options.initial)},
                            {"weighted", a.weighted ? "true" : "false"},
                            {"freq", text::format_double(a.freq)}};
    std::string const header = provenance("fit", settings, 0);
    fs::path const dir = resolve_output_dir(a.out_dir);
    {
        auto f = open_output(dir / ("fit_" + model->name + ".txt"));
        f << "# " << header << '\n';
        write_fit_report(f, *model, result);
    }
    {
        auto f = open_output(dir / ("fit_" + model->name + ".csv"));
        write_fit_csv(f, result, {header});
    }
    write_fit_report(out, *model, result);
    if (!result.converged) throw NotConvergedError("fit did not converge: " + result.termination);
    return Success;
}

// ---------------------------------------------------------------------------
// model-eval

struct ModelEvalArgs {
    std::string model;
    std::vector<std::string> params;
    std::string temps = "1.3:300:log";
    std::string delays = "0:50e-6:lin:51";
    std::string out;
};

void run_model_eval(ModelEvalArgs const& a, std::ostream& out) {
    ModelSpec const* model = nullptr;
    try {
        model = &find_model(a.model);
    } catch (LookupError const& e) {
        throw UsageError(std::string("--model: ") + e.what());
    }
    auto const given = parse_assignments(a.params, "--params");

    std::map<std::string, double> values;
    if (model->name == "t1_model") values = {{"A", T1ModelParams{}.A}, {"B", T1ModelParams{}.B}};
    if (model->name == "t2_model")
        values = {{"C", T2ModelParams{}.C}, {"T_Ze", T2ModelParams{}.T_Ze}, {"Gamma_res", T2ModelParams{}.Gamma_res}};
    if (model->name == "echo_decay") values = {{"a", 1.0}, {"T2", 6.7e-6}};
    if (model->name == "inversion_recovery") values = {{"y0", 1.0}, {"a", 2.0}, {"T1", 1e-3}};
    for (auto const& [name, v] : given) {
        try {
            (void)model->parameter_index(name);
        } catch (LookupError const& e) {
            throw UsageError(std::string("--params: ") + e.what());
        }
        values[name] = v;
    }

    Settings settings{{"model", model->name}, {"params", join_settings(values)}};
    bool const bath = model->name == "t1_model" || model->name == "t2_model";
    if (bath) {
        auto const temps = values_or_usage(a.temps, "--temps");
        settings["temps"] = a.temps;
        std::vector<ModelCurvePoint> curve;
        if (model->name == "t1_model")
            curve = evaluate_t1_curve(temps, T1ModelParams{values["A"], values["B"]});
        else
            curve = evaluate_t2_curve(temps, T2ModelParams{values["C"], values["T_Ze"], values["Gamma_res"]});
        emit(a.out, out, [&](std::ostream& o) {
            write_model_curve_csv(o, curve, {provenance("model-eval", settings, 0), "units: rate=1/s value_time=s"});
        });
        return;
    }

    auto const delays = values_or_usage(a.delays, "--delays");
    settings["delays"] = a.delays;
    std::vector<double> p;
    for (auto const& n : model->parameter_names) p.push_back(values[n]);
    emit(a.out, out, [&](std::ostream& o) {
        o << "# " << provenance("model-eval", settings, 0) << '\n';
        o << "delay_s,amplitude\n";
        for (double d : delays) o << text::format_double(d) << ',' << text::format_double(model->evaluate(p, d)) << '\n';
    });
}

// ---------------------------------------------------------------------------
// t2-scan

struct ScanArgs {
    std::string temps = "300,30,10,5,3,1";
    std::uint64_t seed = 1;
    std::size_t realizations = 2000;
    unsigned threads = 1;
    std::string out;
};

void run_t2_scan(ScanArgs const& a, std::ostream& out) {
    auto const temps = values_or_usage(a.temps, "--temps");
    BathNoiseConfig cfg = BathNoiseConfig::defaults();
    cfg.seed = a.seed;
    T2ScanOptions options;
    options.n_realizations = a.realizations;
    options.threads = a.threads;
    auto const points = effective_t2_scan(cfg, temps, options);
    Settings const settings{{"temps", a.temps},
                            {"realizations", std::to_string(a.realizations)},
                            {"base_rate", text::format_double(cfg.base_rate)}};
    emit(a.out, out, [&](std::ostream& o) {
        o << "# " << provenance("t2-scan", settings, a.seed) << '\n';
        o << "temperature_K,t2_s,t2_stderr_s,flip_flop_factor\n";
        for (auto const& p : points)
            o << text::format_double(p.temperature) << ',' << text::format_double(p.t2) << ','
              << text::format_double(p.t2_stderr) << ',' << text::format_double(flip_flop_factor(p.temperature, cfg.T_Ze))
              << '\n';
    });
}

}  // namespace

std::vector<double> parse_value_list(std::string const& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        auto const parts = text::split(spec, ':');
        if (parts.size() < 3 || parts.size() > 4)
            throw DomainError("range must be start:stop:log|lin[:count], got '" + spec + "'");
        auto const start = text::parse_double(parts[0]);
        auto const stop = text::parse_double(parts[1]);
        std::string const kind(text::trim(parts[2]));
        std::size_t count = 50;
        if (parts.size() == 4) {
            auto const c = text::parse_double(parts[3]);
            if (!c || *c < 2 || std::floor(*c) != *c) throw DomainError("range count must be an integer >= 2");
            count = static_cast<std::size_t>(*c);
        }
        if (!start || !stop || !(*stop > *start)) throw DomainError("range needs numeric start < stop, got '" + spec + "'");
        if (kind == "log") {
            if (!(*start > 0.0)) throw DomainError("log range needs start > 0");
            double const ratio = std::log(*stop / *start);
            for (std::size_t i = 0; i < count; ++i)
                out.push_back(*start * std::exp(ratio * static_cast<double>(i) / static_cast<double>(count - 1)));
        } else if (kind == "lin") {
            for (std::size_t i = 0; i < count; ++i)
                out.push_back(*start + (*stop - *start) * static_cast<double>(i) / static_cast<double>(count - 1));
        } else {
            throw DomainError("range spacing must be 'log' or 'lin', got '" + kind + "'");
        }
        return out;
    }
    for (auto const& part : text::split(spec, ',')) {
        auto const v = text::parse_double(part);
        if (!v) throw DomainError("not a number: '" + part + "'");
        out.push_back(*v);
    }
    return out;
}

int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"spinbath: spin-bath decoherence simulation and relaxation-model fitting"};
    app.require_subcommand(1);
    app.set_version_flag("--version", SPINBATH_VERSION);

    PolarizationArgs pol;
    auto* pol_cmd = app.add_subcommand("polarization", "Thermal bath polarization and flip-flop factor vs temperature");
    pol_cmd->add_option("--freq", pol.freq, "Spectrometer frequency (Hz)")->capture_default_str();
    pol_cmd->add_option("--temps", pol.temps, "Temperatures: list a,b,c or range start:stop:log|lin[:count]")
        ->capture_default_str();
    pol_cmd->add_option("--out", pol.out, "Output CSV (default stdout)");

    SpectrumArgs spec;
    auto* spec_cmd = app.add_subcommand("spectrum", "Synthesize a cw-EPR derivative spectrum and report peaks");
    spec_cmd->add_option("--config", spec.config, "Run configuration file");
    spec_cmd->add_option("--out-dir", spec.out_dir, "Output directory");
    spec_cmd->add_option("--threads", spec.threads, "Worker threads")->check(CLI::PositiveNumber);

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Simulate a pulse sequence and write a decay trace");
    sim_cmd->add_option("--sequence", sim.sequence, "hahn or inversion")->required();
    sim_cmd->add_option("--temp", sim.temp, "Temperature (K)")->capture_default_str();
    sim_cmd->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
    sim_cmd->add_option("--realizations", sim.realizations, "Hahn echo: number of bath realizations")->capture_default_str();
    sim_cmd->add_option("--tau-min", sim.tau_min, "Hahn echo: smallest nonzero tau (s)")->capture_default_str();
    sim_cmd->add_option("--tau-max", sim.tau_max, "Hahn echo: largest tau (s)")->capture_default_str();
    sim_cmd->add_option("--tau-points", sim.tau_points, "Hahn echo: log-spaced tau points after tau = 0")
        ->capture_default_str();
    sim_cmd->add_option("--n-sources", sim.n_sources, "Hahn echo: number of telegraph noise sources");
    sim_cmd->add_option("--coupling-scale", sim.coupling_scale, "Hahn echo: coupling scale (rad/s)");
    sim_cmd->add_option("--base-rate", sim.base_rate, "Hahn echo: infinite-temperature switching rate (1/s)");
    sim_cmd->add_option("--t-ze", sim.t_ze, "Hahn echo: Zeeman temperature (K); default from --freq");
    sim_cmd->add_option("--freq", sim.freq, "Spectrometer frequency (Hz)")->capture_default_str();
    sim_cmd->add_option("--residual-rate", sim.residual_rate, "Hahn echo: residual decay rate (1/s)");
    sim_cmd->add_option("--t1", sim.t1, "Inversion recovery: T1 (s); default from the T1 model at --temp");
    sim_cmd->add_option("--noise", sim.noise, "Inversion recovery: Gaussian noise amplitude")->capture_default_str();
    sim_cmd->add_option("--delay-max", sim.delay_max, "Inversion recovery: largest delay (s); default 5 T1");
    sim_cmd->add_option("--delay-points", sim.delay_points, "Inversion recovery: linear delay points")
        ->capture_default_str();
    sim_cmd->add_option("--threads", sim.threads, "Worker threads")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--out", sim.out, "Output CSV ('-' for stdout)");
    sim_cmd->add_option("--out-dir", sim.out_dir, "Output directory when --out is not given");

    FitArgs fa;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a registered model to data");
    fit_cmd->add_option("--model", fa.model, "echo_decay, inversion_recovery, t1_model or t2_model")->required();
    fit_cmd->add_option("--data", fa.data, "CSV file or bundled:<NV|N>:<T1|T2>")->required();
    fit_cmd->add_option("--fix", fa.fix, "Hold parameters fixed: name=value[,name=value]");
    fit_cmd->add_option("--init", fa.init, "Initial values: name=value[,name=value]");
    fit_cmd->add_flag("--weighted", fa.weighted, "Weight by the data uncertainties");
    fit_cmd->add_option("--freq", fa.freq, "Spectrometer frequency for the T_Ze initial guess (Hz)")
        ->capture_default_str();
    fit_cmd->add_option("--out-dir", fa.out_dir, "Output directory");

    ModelEvalArgs me;
    auto* me_cmd = app.add_subcommand("model-eval", "Evaluate a registered model on a grid");
    me_cmd->add_option("--model", me.model, "Model name")->required();
    me_cmd->add_option("--params", me.params, "Parameter values: name=value[,name=value]");
    me_cmd->add_option("--temps", me.temps, "Temperature grid for t1_model / t2_model")->capture_default_str();
    me_cmd->add_option("--delays", me.delays, "Delay grid (s) for echo_decay / inversion_recovery")->capture_default_str();
    me_cmd->add_option("--out", me.out, "Output CSV (default stdout)");

    ScanArgs sc;
    auto* scan_cmd = app.add_subcommand("t2-scan", "Simulated Hahn-echo T2 versus temperature");
    scan_cmd->add_option("--temps", sc.temps, "Temperatures")->capture_default_str();
    scan_cmd->add_option("--seed", sc.seed, "Random seed")->capture_default_str();
    scan_cmd->add_option("--realizations", sc.realizations, "Realizations per temperature")->capture_default_str();
    scan_cmd->add_option("--threads", sc.threads, "Worker threads")->check(CLI::PositiveNumber);
    scan_cmd->add_option("--out", sc.out, "Output CSV (default stdout)");

    std::vector<char const*> argv;
    argv.reserve(args.size());
    for (auto const& s : args) argv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (CLI::ParseError const& e) {
        int const code = app.exit(e, out, err);
        return code == 0 ? Success : Usage;
    }

    try {
        if (*pol_cmd) run_polarization(pol, out);
        else if (*spec_cmd) run_spectrum(spec, out);
        else if (*sim_cmd) run_simulate(sim, out);
        else if (*fit_cmd) return run_fit(fa, out);
        else if (*me_cmd) run_model_eval(me, out);
        else if (*scan_cmd) run_t2_scan(sc, out);
        return Success;
    } catch (UsageError const& e) {
        err << "usage error: " << e.what() << '\n';
        return Usage;
    } catch (NotConvergedError const& e) {
        err << "error: " << e.what() << '\n';
        return NotConverged;
    } catch (ScanError const& e) {
        err << "error: " << e.what() << '\n';
        return NotConverged;
    } catch (ParseError const& e) {
        err << "error: " << e.what() << '\n';
        return e.kind() == ParseError::Kind::MissingFile ? Io : Usage;
    } catch (IoError const& e) {
        err << "I/O error: " << e.what() << '\n';
        return Io;
    } catch (DomainError const& e) {
        err << "error: " << e.what() << '\n';
        return Usage;
    } catch (LookupError const& e) {
        err << "error: " << e.what() << '\n';
        return Usage;
    }
}

}  // namespace spinbath::cli
