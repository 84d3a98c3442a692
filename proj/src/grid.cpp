#include "nslab/grid.hpp"

namespace nslab {

ScalarField shift_field(const ScalarField& f, std::span<const int> cells) {
    const TorusGrid& g = f.grid();
    ScalarField out(g);
    for_each_node(g, [&](std::size_t lin, std::span<const int> idx) {
        std::array<int, 3> j{0, 0, 0};
        for (int a = 0; a < g.d; ++a) j[static_cast<std::size_t>(a)] = idx[a] + cells[a];
        out[lin] = f.at(std::span<const int>(j.data(), static_cast<std::size_t>(g.d)));
    });
    return out;
}

} // namespace nslab
