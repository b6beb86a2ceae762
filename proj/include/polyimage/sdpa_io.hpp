#pragma once

#include <iosfwd>
#include <string>

#include "polyimage/conic_program.hpp"

namespace polyimage {

/// Writes SDPA sparse format. SDPA's dual (max <F0, Y> s.t. <F_i, Y> = c_i) is our P with
/// c_i = b_i, F_i = A_i, F_0 = -C; free scalars become x+ - x- in a leading LP block of size 2f.
/// A leading comment line keeps form, sense, free count, block names and row scales.
void export_sdpa(const ConicProgram& prog, std::ostream& out);
void export_sdpa_file(const ConicProgram& prog, const std::string& path);

/// Reads SDPA sparse format. Files written by export_sdpa come back as the same program;
/// other files are read with every LP coordinate as a 1x1 PSD block.
ConicProgram import_sdpa(std::istream& in);
ConicProgram import_sdpa_file(const std::string& path);

} // namespace polyimage
