#include "nslab/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace nslab {

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little endian; byte swapping is not implemented");

namespace {

void put_u32(std::ofstream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t get_u32(std::ifstream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}

} // namespace

void write_fields(const std::string& path, const std::vector<const ScalarField*>& comps) {
    if (comps.empty()) throw RuntimeError("write_fields: no components");
    const TorusGrid& g = comps[0]->grid();
    for (const ScalarField* f : comps)
        if (!(f->grid() == g)) throw RuntimeError("write_fields: component grid mismatch");

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw RuntimeError("write_fields: cannot open " + path);
    os.write("NSF1", 4);
    put_u32(os, static_cast<std::uint32_t>(g.d));
    put_u32(os, static_cast<std::uint32_t>(g.n));
    put_u32(os, static_cast<std::uint32_t>(comps.size()));
    for (const ScalarField* f : comps)
        os.write(reinterpret_cast<const char*>(f->values().data()),
                 static_cast<std::streamsize>(g.size() * sizeof(double)));
    if (!os) throw RuntimeError("write_fields: write failed for " + path);
}

std::vector<ScalarField> read_fields(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw RuntimeError("read_fields: cannot open " + path);
    char magic[4] = {0, 0, 0, 0};
    is.read(magic, 4);
    if (std::memcmp(magic, "NSF1", 4) != 0) throw RuntimeError("read_fields: bad magic in " + path);
    std::uint32_t d = get_u32(is), n = get_u32(is), ncomp = get_u32(is);
    if (!is || d < 1 || d > 3 || ncomp == 0 || ncomp > 16)
        throw RuntimeError("read_fields: bad header in " + path);
    TorusGrid g(static_cast<int>(d), static_cast<int>(n));
    std::vector<ScalarField> out;
    out.reserve(ncomp);
    for (std::uint32_t c = 0; c < ncomp; ++c) {
        ScalarField f(g);
        is.read(reinterpret_cast<char*>(f.values().data()),
                static_cast<std::streamsize>(g.size() * sizeof(double)));
        if (!is) throw RuntimeError("read_fields: truncated payload in " + path);
        out.push_back(std::move(f));
    }
    return out;
}

void write_field(const std::string& path, const ScalarField& f) {
    write_fields(path, {&f});
}

void write_state(const std::string& path, const ScalarField& rho, const VectorField& m) {
    std::vector<const ScalarField*> comps;
    comps.push_back(&rho);
    for (int a = 0; a < m.dim(); ++a) comps.push_back(&m[a]);
    write_fields(path, comps);
}

} // namespace nslab
