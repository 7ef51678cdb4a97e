#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by the CSV and config readers/writers.
namespace spinbath::text {

/// 17 significant digits, round-trips every finite double.
[[nodiscard]] std::string format_double(double value);

[[nodiscard]] std::optional<double> parse_double(std::string_view token);

[[nodiscard]] std::string_view trim(std::string_view s);

[[nodiscard]] std::vector<std::string> split(std::string_view s, char sep);

/// Splits one CSV record, honouring double-quoted fields.
[[nodiscard]] std::vector<std::string> split_csv_record(std::string_view line);

/// Quotes a CSV field if it contains a separator, quote or newline.
[[nodiscard]] std::string quote_csv_field(std::string_view field);

/// 64-bit FNV-1a.
[[nodiscard]] std::uint64_t fnv1a64(std::string_view data);

[[nodiscard]] std::string hex64(std::uint64_t value);

}  // namespace spinbath::text
