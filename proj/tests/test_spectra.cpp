#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "spinbath/error.hpp"
#include "spinbath/spectra.hpp"

using namespace spinbath;

namespace {

std::vector<CenterPopulation> nitrogen_only(double population = 1.0) {
    return {CenterPopulation{CenterParams::nitrogen(), population}};
}

std::vector<CenterPopulation> nv_only() { return {CenterPopulation{CenterParams::nitrogen_vacancy(), 1.0}}; }

StickOptions unweighted() {
    StickOptions o;
    o.thermal_weighting = false;
    return o;
}

}  // namespace

TEST_CASE("nitrogen sticks") {
    auto const s = build_sticks(nitrogen_only(12.0), 240e9, 300.0, unweighted());
    REQUIRE(s.sticks.size() == 5);
    std::vector<double> const weights{1.0, 3.0, 4.0, 3.0, 1.0};
    std::vector<double> const offsets{-4.068e-3, -3.069e-3, 0.0, 3.069e-3, 4.068e-3};
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(s.sticks[i].weight == doctest::Approx(weights[i]).epsilon(1e-12));
        CHECK(std::abs(s.sticks[i].field - s.sticks[2].field - offsets[i]) <= 1e-6);
    }
    for (std::size_t i = 1; i < 5; ++i) CHECK(s.sticks[i].field > s.sticks[i - 1].field);
}

TEST_CASE("thermal weights") {
    auto const line = TransitionSpec{CenterParams::nitrogen(), -0.5, 0.5, 0.0, Orientation{}};
    double const field = resonance_field(line, 240e9);
    CHECK(thermal_transition_factor(line, field, 240e9, 1e6) == doctest::Approx(1.0).epsilon(1e-8));
    double const x = 11.518183376078930 / 300.0;
    CHECK(thermal_transition_factor(line, field, 240e9, 300.0) ==
          doctest::Approx(std::tanh(x / 2.0) * 2.0 / x).epsilon(1e-9));
    double prev = 0.0;
    for (double t : {1.0, 3.0, 10.0, 30.0, 300.0}) {
        double const f = thermal_transition_factor(line, field, 240e9, t);
        CHECK(f > prev);
        CHECK(f <= 1.0);
        prev = f;
    }
    CHECK_THROWS_AS((void)thermal_transition_factor(line, field, 240e9, 0.0), DomainError);

    // every hyperfine line of a spin-1/2 center sees the same polarization
    auto outer = line;
    outer.m_i = 1.0;
    CHECK(thermal_transition_factor(outer, resonance_field(outer, 240e9), 240e9, 3.0) ==
          doctest::Approx(thermal_transition_factor(line, field, 240e9, 3.0)).epsilon(1e-12));

    auto const weighted = build_sticks(nitrogen_only(12.0), 240e9, 300.0);
    auto const flat = build_sticks(nitrogen_only(12.0), 240e9, 300.0, unweighted());
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(weighted.sticks[i].weight == doctest::Approx(flat.sticks[i].weight * std::tanh(x / 2.0) * 2.0 / x).epsilon(1e-9));
}

TEST_CASE("N-V sticks") {
    auto const aligned = build_sticks(nv_only(), 240e9, 300.0);
    CHECK(aligned.sticks.size() == 6);
    auto const groups = distinct_fields(aligned, CenterParams::nitrogen_vacancy().linewidth_pp);
    REQUIRE(groups.size() == 2);
    CHECK(groups[1] == doctest::Approx(8.6641).epsilon(2e-5));
    CHECK(groups[0] == doctest::Approx(8.5276).epsilon(2e-5));

    StickOptions tilted;
    tilted.tilt_deg = 1.0;
    auto const t = build_sticks(nv_only(), 240e9, 300.0, tilted);
    CHECK(distinct_fields(t, CenterParams::nitrogen_vacancy().linewidth_pp).size() == 4);

    auto all = nv_only();
    all[0].params.transitions = TransitionSet::All;
    CHECK(build_sticks(all, 240e9, 300.0).sticks.size() == 12);
}

TEST_CASE("derivative lineshape integrates to the stick weights") {
    auto const sticks = build_sticks(nitrogen_only(2.0), 240e9, 300.0, unweighted());
    FieldGrid grid{8.54, 8.59, 1e-6};
    auto const spec = convolve(sticks, grid);
    CHECK(spec.warnings.empty());
    double absorption = 0.0;
    double peak_absorption = 0.0;
    double area = 0.0;
    for (double v : spec.amplitude) {
        absorption += v * grid.step;
        peak_absorption = std::max(peak_absorption, absorption);
        area += absorption * grid.step;
    }
    CHECK(area == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(std::abs(absorption) < 1e-9 * peak_absorption);
}

TEST_CASE("peak analysis recovers the input lines") {
    FieldGrid const grid;
    SUBCASE("nitrogen") {
        auto const spec = convolve(build_sticks(nitrogen_only(), 240e9, 300.0), grid);
        auto const peaks = analyze_peaks(spec);
        REQUIRE(peaks.size() == 5);
        std::vector<double> const offsets{-4.068e-3, -3.069e-3, 0.0, 3.069e-3, 4.068e-3};
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(std::abs(peaks[i].center_field - peaks[2].center_field - offsets[i]) <= 2e-6);
            CHECK(std::abs(peaks[i].pp_width - 0.95e-4) <= grid.step);
        }
        CHECK(peaks[2].pp_amplitude / peaks[0].pp_amplitude == doctest::Approx(4.0).epsilon(1e-3));
    }
    SUBCASE("single N-V line width") {
        auto params = CenterParams::nitrogen_vacancy();
        params.hyperfine_111 = 0.0;
        params.hyperfine_other = 0.0;
        StickSpectrum one;
        one.sticks.push_back(Stick{8.6, 1.0, TransitionSpec{params, -1.0, 0.0, 0.0, Orientation{}}});
        auto const peaks = analyze_peaks(convolve(one, grid));
        REQUIRE(peaks.size() == 1);
        CHECK(std::abs(peaks[0].pp_width - 2.36e-4) <= grid.step);
        CHECK(peaks[0].center_field == doctest::Approx(8.6).epsilon(1e-9));
    }
    SUBCASE("N-V ordering") {
        auto const peaks = analyze_peaks(convolve(build_sticks(nv_only(), 240e9, 300.0), grid));
        REQUIRE(peaks.size() == 2);
        CHECK(peaks[1].center_field > peaks[0].center_field);
        CHECK(peaks[1].center_field == doctest::Approx(8.6641).epsilon(2e-5));
        // one aligned axis against three off-axis ones
        CHECK(peaks[0].pp_amplitude / peaks[1].pp_amplitude == doctest::Approx(3.0).epsilon(0.05));
    }
}

TEST_CASE("convolution is deterministic and thread independent") {
    std::vector<CenterPopulation> const both{CenterPopulation{CenterParams::nitrogen(), 120.0},
                                             CenterPopulation{CenterParams::nitrogen_vacancy(), 1.0}};
    auto const sticks = build_sticks(both, 240e9, 300.0);
    FieldGrid const grid;
    auto const one = convolve(sticks, grid, {}, 1);
    CHECK(one.amplitude == convolve(sticks, grid, {}, 1).amplitude);
    CHECK(one.amplitude == convolve(sticks, grid, {}, 3).amplitude);
    CHECK(one.amplitude == convolve(sticks, grid, {}, 8).amplitude);
    CHECK(one.field_grid.size() == 175001);
}

TEST_CASE("grid coverage warning") {
    FieldGrid narrow{8.561, 8.566, 2e-6};
    auto const spec = convolve(build_sticks(nitrogen_only(), 240e9, 300.0), narrow);
    CHECK(spec.warnings.size() == 4);
    FieldGrid bad{8.6, 8.5, 1e-6};
    CHECK_THROWS_AS((void)bad.size(), DomainError);
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS((void)build_sticks({}, 240e9, 300.0), DomainError);
    CHECK_THROWS_AS((void)build_sticks(nitrogen_only(0.0), 240e9, 300.0), DomainError);
    CHECK_THROWS_AS((void)build_sticks(nitrogen_only(), 240e9, -1.0), DomainError);
    CHECK_THROWS_AS((void)build_sticks(nitrogen_only(), 0.0, 300.0), DomainError);
}

TEST_CASE("CSV writers") {
    Spectrum s;
    s.field_grid = {8.5, 8.500002};
    s.amplitude = {0.0, -1.5};
    std::ostringstream out;
    write_spectrum_csv(out, s, {"frequency_Hz=240e9"});
    CHECK(out.str() == "# frequency_Hz=240e9\nfield_T,amplitude\n8.5,0\n8.500002,-1.5\n");
    std::ostringstream peaks;
    write_peaks_csv(peaks, {Peak{8.56, 9.5e-5, 2.0}});
    CHECK(peaks.str() == "center_field_T,pp_width_T,pp_amplitude\n8.56,9.5e-05,2\n");
}
