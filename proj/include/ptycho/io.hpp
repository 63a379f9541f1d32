#pragma once

#include "ptycho/banded.hpp"
#include "ptycho/masks.hpp"
#include "ptycho/operator.hpp"

#include <iosfwd>
#include <string>

namespace ptycho {

/// Shortest decimal that round-trips a double (17 significant digits).
std::string fmt_real(double v);

/// CSV with header `ell,j,value`; ell is 0-based, j 1-based, rows j-major then ell.
/// `comment` lines are emitted first, each prefixed by "# ".
void write_grid_csv(std::ostream& os, const MeasurementGrid& y, const std::string& comment = "");
MeasurementGrid read_grid_csv(std::istream& is);

std::string grid_to_json(const MeasurementGrid& y);
MeasurementGrid grid_from_json(const std::string& text);

std::string banded_to_json(const BandedHermitian& X);
BandedHermitian banded_from_json(const std::string& text);

std::string family_to_json(const MaskFamily& f);
MaskFamily family_from_json(const std::string& text);

MaskFamily read_family_json(const std::string& path);
/// Reads CSV or JSON by extension (.json) or content.
MeasurementGrid read_grid_file(const std::string& path);

}  // namespace ptycho
