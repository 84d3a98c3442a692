#pragma once

#include <string>
#include <vector>

#include "nslab/grid.hpp"

namespace nslab {

/**
 * Binary snapshot format, little endian throughout:
 *
 *   bytes 0..3   magic "NSF1"
 *   u32          d
 *   u32          n
 *   u32          ncomp
 *   f64[...]     ncomp blocks of n^d doubles, row-major (last axis fastest)
 *
 * The writer emits exactly this layout; the reader validates the magic and
 * header before touching payload.
 */
void write_fields(const std::string& path, const std::vector<const ScalarField*>& comps);
std::vector<ScalarField> read_fields(const std::string& path);

void write_field(const std::string& path, const ScalarField& f);
void write_state(const std::string& path, const ScalarField& rho, const VectorField& m);

} // namespace nslab
