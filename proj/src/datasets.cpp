#include "spinbath/datasets.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "spinbath/error.hpp"
#include "spinbath/text.hpp"

namespace spinbath {

std::string_view to_string(RelaxationQuantity q) { return q == RelaxationQuantity::T1 ? "T1" : "T2"; }

RelaxationQuantity relaxation_quantity_from_string(std::string_view text) {
    if (text == "T1" || text == "t1") return RelaxationQuantity::T1;
    if (text == "T2" || text == "t2") return RelaxationQuantity::T2;
    throw LookupError("unknown relaxation quantity '" + std::string(text) + "' (expected T1 or T2)");
}

void RelaxationDataset::validate() const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto const& r = rows[i];
        if (!(r.temperature > 0.0) || !(r.value > 0.0) || !(r.error >= 0.0) || r.source.empty())
            throw DomainError("dataset row " + std::to_string(i + 1) +
                              ": need temperature > 0, value > 0, error >= 0 and a source tag");
    }
}

RelaxationDataset bundled(CenterLabel center, RelaxationQuantity quantity) {
    RelaxationDataset d;
    d.center = center;
    d.quantity = quantity;
    using enum CenterLabel;
    if (center == NV && quantity == RelaxationQuantity::T2) {
        d.rows = {
            {300.0, 6.7e-6, 0.2e-6, "quoted: NV T2 = 6.7 +/- 0.2 us, room temperature"},
            {20.0, 8.3e-6, 0.7e-6, "quoted: NV T2 = 8.3 +/- 0.7 us, 20 K"},
            {1.7, 250e-6, 25e-6, "quoted: NV T2 ~ 250 us, 1.7 K (saturation); approx, error set to 10% of value"},
        };
    } else if (center == N && quantity == RelaxationQuantity::T2) {
        d.rows = {
            {300.0, 5.455e-6, 0.005e-6, "quoted: N T2 = 5.455 +/- 0.005 us, room temperature"},
            {20.0, 5.83e-6, 0.04e-6, "quoted: N T2 = 5.83 +/- 0.04 us, 20 K"},
            {2.5, 80e-6, 9e-6, "quoted: N T2 = 80 +/- 9 us, 2.5 K"},
        };
    } else if (center == NV && quantity == RelaxationQuantity::T1) {
        d.rows = {
            {300.0, 7.7e-3, 0.4e-3, "quoted: NV T1 = 7.7 +/- 0.4 ms, room temperature"},
            {40.0, 3.8, 0.5, "quoted: NV T1 = 3.8 +/- 0.5 s, 40 K"},
        };
    } else {
        d.rows = {
            {300.0, 1.4e-3, 0.01e-3, "quoted: N T1 = 1.4 +/- 0.01 ms, room temperature"},
            {40.0, 8.3, 4.7, "quoted: N T1 = 8.3 +/- 4.7 s, 40 K"},
        };
    }
    return d;
}

RelaxationDataset read_csv(std::istream& in, std::string const& origin, CenterLabel default_center,
                           RelaxationQuantity default_quantity) {
    RelaxationDataset d;
    d.center = default_center;
    d.quantity = default_quantity;
    std::string line;
    std::size_t row = 0;
    std::size_t columns = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto const view = text::trim(line);
        if (view.empty()) continue;
        if (view.front() == '#') {
            auto const body = std::string(text::trim(view.substr(1)));
            try {
                if (body.rfind("center=", 0) == 0) {
                    d.center = center_label_from_string(body.substr(7));
                    continue;
                }
                if (body.rfind("quantity=", 0) == 0) {
                    d.quantity = relaxation_quantity_from_string(body.substr(9));
                    continue;
                }
            } catch (LookupError const& e) {
                throw ParseError(ParseError::Kind::InvalidValue, e.what(), row);
            }
            d.comments.push_back(body);
            continue;
        }
        if (columns == 0) {
            auto const header = text::split_csv_record(view);
            static std::vector<std::string> const expected{"temperature_K", "value_s", "error_s", "source"};
            if (header.size() < 2 || header.size() > expected.size())
                throw ParseError(ParseError::Kind::BadHeader,
                                 "expected header 'temperature_K,value_s[,error_s[,source]]' in " + origin, row);
            for (std::size_t c = 0; c < header.size(); ++c) {
                if (text::trim(header[c]) != expected[c])
                    throw ParseError(ParseError::Kind::BadHeader,
                                     "column " + std::to_string(c + 1) + " must be '" + expected[c] + "' in " + origin,
                                     row, c + 1);
            }
            columns = header.size();
            continue;
        }
        auto const cells = text::split_csv_record(view);
        if (cells.size() != columns)
            throw ParseError(ParseError::Kind::MalformedRow,
                             "expected " + std::to_string(columns) + " columns, got " + std::to_string(cells.size()),
                             row);
        RelaxationRow r;
        double* targets[3] = {&r.temperature, &r.value, &r.error};
        for (std::size_t c = 0; c < std::min<std::size_t>(columns, 3); ++c) {
            auto const v = text::parse_double(cells[c]);
            if (!v) throw ParseError(ParseError::Kind::MalformedRow, "not a number: '" + cells[c] + "'", row, c + 1);
            *targets[c] = *v;
        }
        if (!(r.temperature > 0.0))
            throw ParseError(ParseError::Kind::InvalidValue, "temperature must be > 0", row, 1);
        if (!(r.value > 0.0)) throw ParseError(ParseError::Kind::InvalidValue, "value must be > 0", row, 2);
        if (!(r.error >= 0.0)) throw ParseError(ParseError::Kind::InvalidValue, "error must be >= 0", row, 3);
        r.source = columns == 4 ? cells[3] : origin + ":" + std::to_string(row);
        if (r.source.empty()) throw ParseError(ParseError::Kind::InvalidValue, "source tag must not be empty", row, 4);
        d.rows.push_back(std::move(r));
    }
    if (columns == 0) throw ParseError(ParseError::Kind::BadHeader, "missing header in " + origin);
    return d;
}

RelaxationDataset load_csv(std::filesystem::path const& path, CenterLabel default_center,
                           RelaxationQuantity default_quantity) {
    std::ifstream in(path);
    if (!in) throw ParseError(ParseError::Kind::MissingFile, "cannot open '" + path.string() + "'");
    return read_csv(in, path.string(), default_center, default_quantity);
}

void write_csv(std::ostream& out, RelaxationDataset const& dataset) {
    out << "# center=" << to_string(dataset.center) << '\n';
    out << "# quantity=" << to_string(dataset.quantity) << '\n';
    for (auto const& c : dataset.comments) out << "# " << c << '\n';
    out << "temperature_K,value_s,error_s,source\n";
    for (auto const& r : dataset.rows)
        out << text::format_double(r.temperature) << ',' << text::format_double(r.value) << ','
            << text::format_double(r.error) << ',' << text::quote_csv_field(r.source) << '\n';
}

void export_csv(std::filesystem::path const& path, RelaxationDataset const& dataset) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    write_csv(out, dataset);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace spinbath
