#pragma once

#include <filesystem>
#include <iosfwd>

#include "critmass/field.hpp"

namespace critmass {

// `.fld` layout: one JSON header line {"dim","points_per_axis","half_width"}
// terminated by '\n', then size() pairs of little-endian IEEE-754 doubles
// (real, imaginary), row-major over axes.
void write_field(std::ostream& os, const Field& f);
Field read_field(std::istream& is);

void save_field(const std::filesystem::path& path, const Field& f);
Field load_field(const std::filesystem::path& path);

}  // namespace critmass
