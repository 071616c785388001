#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gridrep::text {

/// printf-style fixed notation; negative zero prints as zero.
std::string fixed(double v, int precision);
/// Shortest-ish general notation with `digits` significant digits.
std::string general(double v, int digits = 10);
/// "NA" for missing values.
std::string fixed_or_na(const std::optional<double>& v, int precision);
std::string general_or_na(const std::optional<double>& v, int digits = 10);

std::string xml_escape(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace gridrep::text
