#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "spinbath/datasets.hpp"
#include "spinbath/error.hpp"

using namespace spinbath;

namespace {

ParseError::Kind parse_kind(std::string const& text) {
    std::istringstream in(text);
    try {
        (void)read_csv(in, "inline");
    } catch (ParseError const& e) {
        return e.kind();
    }
    FAIL("expected ParseError");
    return ParseError::Kind::BadSyntax;
}

}  // namespace

TEST_CASE("bundled values") {
    auto const nv_t2 = bundled(CenterLabel::NV, RelaxationQuantity::T2);
    REQUIRE(nv_t2.rows.size() == 3);
    CHECK(nv_t2.rows[0].temperature == 300.0);
    CHECK(nv_t2.rows[0].value == doctest::Approx(6.7e-6));
    CHECK(nv_t2.rows[0].error == doctest::Approx(0.2e-6));
    CHECK(nv_t2.rows[1].value == doctest::Approx(8.3e-6));
    CHECK(nv_t2.rows[2].value == doctest::Approx(250e-6));
    CHECK(nv_t2.rows[2].source.find("approx") != std::string::npos);

    auto const n_t1 = bundled(CenterLabel::N, RelaxationQuantity::T1);
    CHECK(n_t1.rows[0].value == doctest::Approx(1.4e-3));
    auto const nv_t1 = bundled(CenterLabel::NV, RelaxationQuantity::T1);
    CHECK(nv_t1.rows[0].value == doctest::Approx(7.7e-3));
    CHECK(nv_t1.rows[1].value == doctest::Approx(3.8));
    auto const n_t2 = bundled(CenterLabel::N, RelaxationQuantity::T2);
    CHECK(n_t2.rows[0].value == doctest::Approx(5.455e-6));

    for (auto c : {CenterLabel::NV, CenterLabel::N})
        for (auto q : {RelaxationQuantity::T1, RelaxationQuantity::T2}) {
            auto const d = bundled(c, q);
            CHECK_NOTHROW(d.validate());
            for (auto const& r : d.rows) CHECK_FALSE(r.source.empty());
        }
}

TEST_CASE("CSV round trip") {
    auto const original = bundled(CenterLabel::N, RelaxationQuantity::T2);
    std::stringstream io;
    write_csv(io, original);
    auto const back = read_csv(io, "roundtrip", CenterLabel::NV, RelaxationQuantity::T1);
    CHECK(back.center == CenterLabel::N);
    CHECK(back.quantity == RelaxationQuantity::T2);
    CHECK(back.rows == original.rows);

    auto const dir = std::filesystem::temp_directory_path() / "spinbath_datasets_test";
    std::filesystem::create_directories(dir);
    export_csv(dir / "n_t2.csv", original);
    CHECK(load_csv(dir / "n_t2.csv").rows == original.rows);
    std::filesystem::remove_all(dir);
}

TEST_CASE("minimal columns and comments") {
    std::istringstream in("# measured 2024\n# center=N\ntemperature_K,value_s\n300,1.4e-3\n\n40,8.3\n");
    auto const d = read_csv(in, "lab.csv", CenterLabel::NV, RelaxationQuantity::T1);
    CHECK(d.center == CenterLabel::N);
    CHECK(d.quantity == RelaxationQuantity::T1);
    REQUIRE(d.rows.size() == 2);
    CHECK(d.rows[1].source == "lab.csv:6");
    CHECK(d.rows[1].error == 0.0);
    REQUIRE(d.comments.size() == 1);
    CHECK(d.comments[0] == "measured 2024");

    std::istringstream quoted("temperature_K,value_s,error_s,source\n20,8.3e-6,7e-7,\"Fig. 2, N-V\"\n");
    CHECK(read_csv(quoted, "q").rows[0].source == "Fig. 2, N-V");
}

TEST_CASE("error kinds") {
    CHECK(parse_kind("") == ParseError::Kind::BadHeader);
    CHECK(parse_kind("temp,value\n1,2\n") == ParseError::Kind::BadHeader);
    CHECK(parse_kind("temperature_K,value_s\n1,2,3\n") == ParseError::Kind::MalformedRow);
    CHECK(parse_kind("temperature_K,value_s\n1,abc\n") == ParseError::Kind::MalformedRow);
    CHECK(parse_kind("temperature_K,value_s\n-1,2\n") == ParseError::Kind::InvalidValue);
    CHECK(parse_kind("temperature_K,value_s,error_s\n1,2,-3\n") == ParseError::Kind::InvalidValue);
    CHECK(parse_kind("# center=SiV\ntemperature_K,value_s\n") == ParseError::Kind::InvalidValue);

    std::istringstream in("temperature_K,value_s\n300,1e-3\n4,x\n");
    try {
        (void)read_csv(in, "f");
        FAIL("expected ParseError");
    } catch (ParseError const& e) {
        CHECK(e.row() == 3);
        CHECK(e.column() == 2);
        CHECK(std::string(e.what()).rfind("line 3, column 2: ", 0) == 0);
    }

    try {
        (void)load_csv("/nonexistent/spinbath.csv");
        FAIL("expected ParseError");
    } catch (ParseError const& e) {
        CHECK(e.kind() == ParseError::Kind::MissingFile);
    }
}
