#include "spinbath/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "spinbath/error.hpp"
#include "spinbath/text.hpp"

namespace spinbath {

namespace {

using text::format_double;

double parse_number(std::string const& value, std::size_t line, std::string const& key) {
    auto const v = text::parse_double(value);
    if (!v) throw ParseError(ParseError::Kind::InvalidValue, "'" + key + "' expects a number, got '" + value + "'", line);
    return *v;
}

bool parse_bool(std::string const& value, std::size_t line, std::string const& key) {
    if (value == "true" || value == "yes" || value == "1") return true;
    if (value == "false" || value == "no" || value == "0") return false;
    throw ParseError(ParseError::Kind::InvalidValue, "'" + key + "' expects true/false, got '" + value + "'", line);
}

void apply_center_key(CenterParams& c, double& population, std::string const& key, std::string const& value,
                      std::size_t line) {
    if (key == "population") population = parse_number(value, line, key);
    else if (key == "spin") c.spin = parse_number(value, line, key);
    else if (key == "g_parallel") c.g_parallel = parse_number(value, line, key);
    else if (key == "g_perp") c.g_perp = parse_number(value, line, key);
    else if (key == "zero_field_D_Hz") c.zero_field_D = parse_number(value, line, key);
    else if (key == "hyperfine_111_Hz") c.hyperfine_111 = parse_number(value, line, key);
    else if (key == "hyperfine_other_Hz") c.hyperfine_other = parse_number(value, line, key);
    else if (key == "linewidth_pp_T") c.linewidth_pp = parse_number(value, line, key);
    else if (key == "nuclear_spin") c.nuclear_spin = parse_number(value, line, key);
    else if (key == "transitions") {
        if (value == "all") c.transitions = TransitionSet::All;
        else if (value == "lower") c.transitions = TransitionSet::Lower;
        else throw ParseError(ParseError::Kind::InvalidValue, "'transitions' expects all or lower", line);
    } else {
        throw ParseError(ParseError::Kind::BadSyntax, "unknown center key '" + key + "'", line);
    }
}

}  // namespace

RunConfig RunConfig::defaults() {
    RunConfig cfg;
    cfg.centers = {CenterPopulation{CenterParams::nitrogen(), 120.0},
                   CenterPopulation{CenterParams::nitrogen_vacancy(), 1.0}};
    return cfg;
}

RunConfig RunConfig::parse(std::string_view content, std::string const& origin) {
    RunConfig cfg;
    std::string section;
    CenterPopulation* center = nullptr;
    std::istringstream in{std::string(content)};
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto view = text::trim(raw);
        if (view.empty() || view.front() == '#' || view.front() == ';') continue;
        if (view.front() == '[') {
            if (view.back() != ']')
                throw ParseError(ParseError::Kind::BadSyntax, "unterminated section header in " + origin, line);
            section = std::string(text::trim(view.substr(1, view.size() - 2)));
            center = nullptr;
            if (section.rfind("center.", 0) == 0) {
                CenterLabel label{};
                try {
                    label = center_label_from_string(section.substr(7));
                } catch (LookupError const& e) {
                    throw ParseError(ParseError::Kind::InvalidValue, e.what(), line);
                }
                for (auto const& existing : cfg.centers)
                    if (existing.params.label == label)
                        throw ParseError(ParseError::Kind::BadSyntax, "duplicate section [" + section + "]", line);
                cfg.centers.push_back(CenterPopulation{CenterParams::defaults(label), 1.0});
                center = &cfg.centers.back();
            } else if (section != "spectrometer" && section != "grid" && section != "run") {
                throw ParseError(ParseError::Kind::BadSyntax, "unknown section [" + section + "]", line);
            }
            continue;
        }
        auto const eq = view.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(ParseError::Kind::BadSyntax, "expected 'key = value' in " + origin, line);
        std::string const key(text::trim(view.substr(0, eq)));
        std::string const value(text::trim(view.substr(eq + 1)));
        if (section.empty())
            throw ParseError(ParseError::Kind::BadSyntax, "key '" + key + "' outside of any section", line);

        if (center != nullptr) {
            apply_center_key(center->params, center->population, key, value, line);
        } else if (section == "spectrometer") {
            if (key == "frequency_Hz") cfg.frequency_hz = parse_number(value, line, key);
            else if (key == "temperature_K") cfg.temperature_k = parse_number(value, line, key);
            else if (key == "tilt_deg") cfg.tilt_deg = parse_number(value, line, key);
            else if (key == "tilt_azimuth_deg") cfg.tilt_azimuth_deg = parse_number(value, line, key);
            else if (key == "thermal_weighting") cfg.thermal_weighting = parse_bool(value, line, key);
            else throw ParseError(ParseError::Kind::BadSyntax, "unknown key '" + key + "' in [spectrometer]", line);
        } else if (section == "grid") {
            if (key == "field_min_T") cfg.grid.field_min = parse_number(value, line, key);
            else if (key == "field_max_T") cfg.grid.field_max = parse_number(value, line, key);
            else if (key == "field_step_T") cfg.grid.step = parse_number(value, line, key);
            else throw ParseError(ParseError::Kind::BadSyntax, "unknown key '" + key + "' in [grid]", line);
        } else if (section == "run") {
            if (key == "seed") {
                try {
                    std::size_t used = 0;
                    if (value.empty() || value.front() == '-' || value.front() == '+') throw std::invalid_argument("sign");
                    cfg.seed = std::stoull(value, &used);
                    if (used != value.size()) throw std::invalid_argument("trailing");
                } catch (std::exception const&) {
                    throw ParseError(ParseError::Kind::InvalidValue, "'seed' expects an unsigned integer", line);
                }
            } else if (key == "output_dir") {
                cfg.output_dir = value;
            } else {
                throw ParseError(ParseError::Kind::BadSyntax, "unknown key '" + key + "' in [run]", line);
            }
        }
    }
    return cfg;
}

RunConfig RunConfig::load(std::filesystem::path const& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(ParseError::Kind::MissingFile, "cannot open config '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path.string());
}

std::string RunConfig::to_text() const {
    std::ostringstream out;
    out << "[spectrometer]\n";
    out << "frequency_Hz = " << format_double(frequency_hz) << '\n';
    out << "temperature_K = " << format_double(temperature_k) << '\n';
    out << "tilt_deg = " << format_double(tilt_deg) << '\n';
    out << "tilt_azimuth_deg = " << format_double(tilt_azimuth_deg) << '\n';
    out << "thermal_weighting = " << (thermal_weighting ? "true" : "false") << '\n';
    out << "\n[grid]\n";
    out << "field_min_T = " << format_double(grid.field_min) << '\n';
    out << "field_max_T = " << format_double(grid.field_max) << '\n';
    out << "field_step_T = " << format_double(grid.step) << '\n';
    out << "\n[run]\n";
    out << "seed = " << seed << '\n';
    if (!output_dir.empty()) out << "output_dir = " << output_dir << '\n';
    for (auto const& [c, population] : centers) {
        out << "\n[center." << to_string(c.label) << "]\n";
        out << "population = " << format_double(population) << '\n';
        out << "spin = " << format_double(c.spin) << '\n';
        out << "g_parallel = " << format_double(c.g_parallel) << '\n';
        out << "g_perp = " << format_double(c.g_perp) << '\n';
        out << "zero_field_D_Hz = " << format_double(c.zero_field_D) << '\n';
        out << "hyperfine_111_Hz = " << format_double(c.hyperfine_111) << '\n';
        out << "hyperfine_other_Hz = " << format_double(c.hyperfine_other) << '\n';
        out << "linewidth_pp_T = " << format_double(c.linewidth_pp) << '\n';
        out << "nuclear_spin = " << format_double(c.nuclear_spin) << '\n';
        out << "transitions = " << (c.transitions == TransitionSet::All ? "all" : "lower") << '\n';
    }
    return out.str();
}

std::uint64_t RunConfig::hash() const { return text::fnv1a64(to_text()); }

void RunConfig::validate() const {
    if (!(frequency_hz > 0.0)) throw DomainError("config: frequency_Hz must be > 0");
    if (!(temperature_k > 0.0)) throw DomainError("config: temperature_K must be > 0");
    (void)grid.size();
    (void)orientations(tilt_deg, tilt_azimuth_deg);
    if (centers.empty()) throw DomainError("config: no [center.*] section; at least one center is required");
    for (auto const& [c, population] : centers) {
        c.validate();
        if (!(population > 0.0))
            throw DomainError("config: population of " + std::string(to_string(c.label)) + " must be > 0");
    }
}

StickOptions RunConfig::stick_options() const {
    StickOptions o;
    o.tilt_deg = tilt_deg;
    o.tilt_azimuth_deg = tilt_azimuth_deg;
    o.thermal_weighting = thermal_weighting;
    return o;
}

}  // namespace spinbath
