#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "spinbath/spin_core.hpp"

namespace spinbath {

enum class RelaxationQuantity { T1, T2 };

[[nodiscard]] std::string_view to_string(RelaxationQuantity q);
[[nodiscard]] RelaxationQuantity relaxation_quantity_from_string(std::string_view text);

struct RelaxationRow {
    double temperature = 0.0;  // K
    double value = 0.0;        // s
    double error = 0.0;        // s
    std::string source;

    friend bool operator==(RelaxationRow const&, RelaxationRow const&) = default;
};

struct RelaxationDataset {
    CenterLabel center = CenterLabel::NV;
    RelaxationQuantity quantity = RelaxationQuantity::T2;
    std::vector<RelaxationRow> rows;
    /// `#` comment lines (without the marker) other than center/quantity.
    std::vector<std::string> comments;

    void validate() const;
};

/// Relaxation times quoted for the studied type-Ib sample.
[[nodiscard]] RelaxationDataset bundled(CenterLabel center, RelaxationQuantity quantity);

/// CSV with header `temperature_K,value_s[,error_s[,source]]`. Center and
/// quantity are read from `# center=...` / `# quantity=...` comment lines and
/// default to the arguments otherwise.
[[nodiscard]] RelaxationDataset load_csv(std::filesystem::path const& path, CenterLabel default_center = CenterLabel::NV,
                                         RelaxationQuantity default_quantity = RelaxationQuantity::T2);
[[nodiscard]] RelaxationDataset read_csv(std::istream& in, std::string const& origin,
                                         CenterLabel default_center = CenterLabel::NV,
                                         RelaxationQuantity default_quantity = RelaxationQuantity::T2);

void write_csv(std::ostream& out, RelaxationDataset const& dataset);
void export_csv(std::filesystem::path const& path, RelaxationDataset const& dataset);

}  // namespace spinbath
