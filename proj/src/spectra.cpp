#include "spinbath/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "spinbath/error.hpp"
#include "spinbath/text.hpp"

namespace spinbath {

namespace {

std::vector<std::pair<double, double>> electron_transitions(CenterParams const& c) {
    std::vector<std::pair<double, double>> out;
    if (c.spin == 1.0 && c.transitions == TransitionSet::Lower) {
        out.emplace_back(-1.0, 0.0);
        return out;
    }
    for (double m = -c.spin; m < c.spin; m += 1.0) out.emplace_back(m, m + 1.0);
    return out;
}

std::vector<double> nuclear_projections(double nuclear_spin) {
    std::vector<double> out;
    for (double m = -nuclear_spin; m <= nuclear_spin + 1e-12; m += 1.0) out.push_back(m);
    return out;
}

// Energy (J) of |m_s, m_i> at field B, first order.
double level_energy(CenterParams const& c, double cos_theta, double field_t, double m_s, double m_i) {
    double const zeeman = c.g_effective(cos_theta) * PhysicalConstants::bohr_magneton * field_t * m_s;
    double const p2 = 0.5 * (3.0 * cos_theta * cos_theta - 1.0);
    double const zfs = PhysicalConstants::planck_h * c.zero_field_D * p2 * (m_s * m_s - c.spin * (c.spin + 1.0) / 3.0);
    double const hyperfine = PhysicalConstants::planck_h * c.hyperfine_effective(cos_theta) * m_s * m_i;
    return zeeman + zfs + hyperfine;
}

}  // namespace

double thermal_transition_factor(TransitionSpec const& spec, double resonance_field_t, double spectrometer_freq_hz,
                                 double temperature_k) {
    if (!(temperature_k > 0.0)) throw DomainError("thermal_transition_factor: temperature must be > 0");
    auto const& c = spec.center;
    double const kt = PhysicalConstants::boltzmann_k * temperature_k;
    double const cos_theta = spec.orientation.cos_theta;

    std::vector<double> energies;
    for (double m = -c.spin; m <= c.spin + 1e-12; m += 1.0)
        energies.push_back(level_energy(c, cos_theta, resonance_field_t, m, spec.m_i));
    double const e_min = *std::min_element(energies.begin(), energies.end());
    double z = 0.0;
    for (double e : energies) z += std::exp(-(e - e_min) / kt);

    double const e_low = level_energy(c, cos_theta, resonance_field_t, spec.m_s_low, spec.m_i);
    double const e_high = level_energy(c, cos_theta, resonance_field_t, spec.m_s_high, spec.m_i);
    double const p_low = std::exp(-(e_low - e_min) / kt) / z;
    double const p_high = std::exp(-(e_high - e_min) / kt) / z;
    double const quantum = PhysicalConstants::planck_h * spectrometer_freq_hz;
    return (p_low - p_high) * (2.0 * c.spin + 1.0) * kt / quantum;
}

StickSpectrum build_sticks(std::vector<CenterPopulation> const& centers, double freq_hz, double temperature_k,
                           StickOptions const& options) {
    if (centers.empty()) throw DomainError("build_sticks: at least one center is required");
    if (!(freq_hz > 0.0)) throw DomainError("build_sticks: frequency must be > 0");
    if (options.thermal_weighting && !(temperature_k > 0.0))
        throw DomainError("build_sticks: temperature must be > 0 when thermal weighting is enabled");

    auto const orients = orientations(options.tilt_deg, options.tilt_azimuth_deg);
    int total_degeneracy = 0;
    for (auto const& o : orients) total_degeneracy += o.degeneracy;

    StickSpectrum raw;
    for (auto const& [params, population] : centers) {
        params.validate();
        if (!(population > 0.0)) throw DomainError("build_sticks: populations must be > 0");
        auto const m_is = nuclear_projections(params.nuclear_spin);
        auto const transitions = electron_transitions(params);
        double const nuclear_fraction = 1.0 / static_cast<double>(m_is.size());
        for (auto const& orient : orients) {
            double const orient_fraction = static_cast<double>(orient.degeneracy) / total_degeneracy;
            for (double m_i : m_is) {
                for (auto const& [m_low, m_high] : transitions) {
                    TransitionSpec spec{params, m_low, m_high, m_i, orient};
                    double const field = resonance_field(spec, freq_hz);
                    double const thermal =
                        options.thermal_weighting ? thermal_transition_factor(spec, field, freq_hz, temperature_k) : 1.0;
                    raw.sticks.push_back(Stick{field, population * orient_fraction * nuclear_fraction * thermal, spec});
                }
            }
        }
    }

    std::stable_sort(raw.sticks.begin(), raw.sticks.end(),
                     [](Stick const& a, Stick const& b) { return a.field < b.field; });

    StickSpectrum merged;
    for (auto const& stick : raw.sticks) {
        if (!merged.sticks.empty()) {
            auto& last = merged.sticks.back();
            if (last.label.center.label == stick.label.center.label &&
                stick.field - last.field < options.merge_tolerance) {
                double const w = last.weight + stick.weight;
                last.field = (last.field * last.weight + stick.field * stick.weight) / w;
                last.weight = w;
                continue;
            }
        }
        merged.sticks.push_back(stick);
    }
    return merged;
}

std::vector<double> distinct_fields(StickSpectrum const& sticks, double resolution) {
    std::vector<double> out;
    double group_sum = 0.0;
    double group_weight = 0.0;
    double last_field = 0.0;
    for (auto const& s : sticks.sticks) {
        if (group_weight > 0.0 && s.field - last_field >= resolution) {
            out.push_back(group_sum / group_weight);
            group_sum = 0.0;
            group_weight = 0.0;
        }
        group_sum += s.field * s.weight;
        group_weight += s.weight;
        last_field = s.field;
    }
    if (group_weight > 0.0) out.push_back(group_sum / group_weight);
    return out;
}

std::size_t FieldGrid::size() const {
    if (!(step > 0.0) || !(field_max > field_min)) throw DomainError("FieldGrid: need step > 0 and field_max > field_min");
    return static_cast<std::size_t>(std::llround((field_max - field_min) / step)) + 1;
}

Spectrum convolve(StickSpectrum const& sticks, FieldGrid const& grid, SpectrumMetadata metadata, unsigned threads) {
    Spectrum out;
    out.metadata = std::move(metadata);
    std::size_t const n = grid.size();
    out.field_grid.resize(n);
    out.amplitude.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) out.field_grid[i] = grid.at(i);
    double const last = out.field_grid.back();

    struct Line {
        double center, sigma, scale;
    };
    std::vector<Line> lines;
    lines.reserve(sticks.sticks.size());
    for (auto const& s : sticks.sticks) {
        double const width = s.label.center.linewidth_pp;
        if (s.field - 5.0 * width < grid.field_min || s.field + 5.0 * width > last) {
            std::ostringstream msg;
            msg << "stick at " << text::format_double(s.field) << " T is not covered by the grid +/- 5 linewidths;"
                << " spectrum truncated";
            out.warnings.push_back(msg.str());
        }
        double const sigma = 0.5 * width;
        lines.push_back(Line{s.field, sigma, s.weight / (sigma * sigma * std::sqrt(2.0 * std::numbers::pi))});
    }

    constexpr double cutoff = 12.0;
    auto fill = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            double acc = 0.0;
            for (auto const& line : lines) {
                double const u = (out.field_grid[i] - line.center) / line.sigma;
                if (std::abs(u) > cutoff) continue;
                acc += -line.scale * u * std::exp(-0.5 * u * u);
            }
            out.amplitude[i] = acc;
        }
    };

    threads = std::max(1u, threads);
    if (threads == 1 || n < 4096) {
        fill(0, n);
    } else {
        std::vector<std::jthread> workers;
        std::size_t const chunk = (n + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            std::size_t const begin = t * chunk;
            std::size_t const end = std::min(n, begin + chunk);
            if (begin < end) workers.emplace_back(fill, begin, end);
        }
    }
    return out;
}

PeakReport analyze_peaks(Spectrum const& spectrum, double relative_threshold) {
    auto const& a = spectrum.amplitude;
    auto const& b = spectrum.field_grid;
    PeakReport report;
    if (a.size() < 3) return report;
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return report;
    double const threshold = relative_threshold * scale;

    // Alternating list of extrema: runs of same-sign extrema collapse to the largest.
    struct Extremum {
        std::size_t index;
        bool is_max;
    };
    std::vector<Extremum> ext;
    for (std::size_t i = 1; i + 1 < a.size(); ++i) {
        bool const is_max = a[i] > a[i - 1] && a[i] >= a[i + 1] && a[i] > threshold;
        bool const is_min = a[i] < a[i - 1] && a[i] <= a[i + 1] && a[i] < -threshold;
        if (!is_max && !is_min) continue;
        if (!ext.empty() && ext.back().is_max == is_max) {
            if (std::abs(a[i]) > std::abs(a[ext.back().index])) ext.back().index = i;
            continue;
        }
        ext.push_back(Extremum{i, is_max});
    }

    // Parabolic refinement of an extremum position and value.
    auto refine = [&](std::size_t i) {
        double const y0 = a[i - 1], y1 = a[i], y2 = a[i + 1];
        double const denom = y0 - 2.0 * y1 + y2;
        double offset = denom != 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
        offset = std::clamp(offset, -0.5, 0.5);
        double const step = b[i + 1] - b[i];
        return std::pair{b[i] + offset * step, y1 - 0.25 * (y0 - y2) * offset};
    };

    for (std::size_t k = 0; k + 1 < ext.size(); ++k) {
        if (!ext[k].is_max || ext[k + 1].is_max) continue;
        std::size_t const imax = ext[k].index;
        std::size_t const imin = ext[k + 1].index;
        auto const [bmax, vmax] = refine(imax);
        auto const [bmin, vmin] = refine(imin);

        double center = 0.5 * (bmax + bmin);
        for (std::size_t i = imax; i < imin; ++i) {
            if (a[i] >= 0.0 && a[i + 1] < 0.0) {
                center = b[i] + (b[i + 1] - b[i]) * a[i] / (a[i] - a[i + 1]);
                break;
            }
        }
        report.push_back(Peak{center, bmin - bmax, vmax - vmin});
        ++k;
    }
    return report;
}

void write_spectrum_csv(std::ostream& out, Spectrum const& spectrum, std::vector<std::string> const& comments) {
    for (auto const& c : comments) out << "# " << c << '\n';
    out << "field_T,amplitude\n";
    for (std::size_t i = 0; i < spectrum.field_grid.size(); ++i)
        out << text::format_double(spectrum.field_grid[i]) << ',' << text::format_double(spectrum.amplitude[i]) << '\n';
}

void write_peaks_csv(std::ostream& out, PeakReport const& peaks, std::vector<std::string> const& comments) {
    for (auto const& c : comments) out << "# " << c << '\n';
    out << "center_field_T,pp_width_T,pp_amplitude\n";
    for (auto const& p : peaks)
        out << text::format_double(p.center_field) << ',' << text::format_double(p.pp_width) << ','
            << text::format_double(p.pp_amplitude) << '\n';
}

}  // namespace spinbath
