#pragma once

// Lattice text format.
//
//   mrf <rows> <cols> <frames>     spins, one line per row per frame, +1 / -1
//   obs <rows> <cols> <frames>     reals, same layout, 17 significant digits
//
// Frames follow each other in order. Blank lines are ignored.

#include <iosfwd>
#include <string>

#include "hmrf/lattice.hpp"

namespace hmrf::cli {

SpinField read_spin_field(std::istream& in);
ObservedField read_observed_field(std::istream& in);
void write_spin_field(std::ostream& out, const SpinField& z);
void write_observed_field(std::ostream& out, const ObservedField& y);

SpinField read_spin_field(const std::string& path);
ObservedField read_observed_field(const std::string& path);
void write_spin_field(const std::string& path, const SpinField& z);
void write_observed_field(const std::string& path, const ObservedField& y);

/// Opens `path` for writing or throws std::runtime_error.
std::ofstream open_output(const std::string& path);

}  // namespace hmrf::cli
