#include "nslab/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>

namespace nslab {
namespace {

// FFTW planning mutates shared state; execution on distinct buffers does not.
// We guard plan creation and reuse cached plans with the new-array execute
// interface, keeping results bitwise reproducible regardless of thread count.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

struct PlanKey {
    int d;
    int n;
    bool forward;
    bool operator<(const PlanKey& o) const {
        if (d != o.d) return d < o.d;
        if (n != o.n) return n < o.n;
        return forward < o.forward;
    }
};

fftw_plan get_plan(const TorusGrid& g, bool forward) {
    static std::map<PlanKey, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(plan_mutex());
    PlanKey key{g.d, g.n, forward};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    int dims[3] = {g.n, g.n, g.n};
    // Dummy buffers for planning; FFTW_ESTIMATE does not touch their contents
    // but wants valid aligned pointers.
    double* re = fftw_alloc_real(g.size());
    fftw_complex* co = fftw_alloc_complex(g.spectral_size());
    fftw_plan p = forward
        ? fftw_plan_dft_r2c(g.d, dims, re, co, FFTW_ESTIMATE)
        : fftw_plan_dft_c2r(g.d, dims, co, re, FFTW_ESTIMATE);
    fftw_free(re);
    fftw_free(co);
    if (!p) throw RuntimeError("fft: plan creation failed");
    cache.emplace(key, p);
    return p;
}

} // namespace

SpectralField forward_fft(const ScalarField& f) {
    const TorusGrid& g = f.grid();
    fftw_plan p = get_plan(g, true);

    double* re = fftw_alloc_real(g.size());
    fftw_complex* co = fftw_alloc_complex(g.spectral_size());
    std::memcpy(re, f.values().data(), g.size() * sizeof(double));
    fftw_execute_dft_r2c(p, re, co);

    SpectralField out(g);
    const double scale = 1.0 / static_cast<double>(g.size());
    for (std::size_t i = 0; i < g.spectral_size(); ++i)
        out[i] = std::complex<double>(co[i][0] * scale, co[i][1] * scale);
    fftw_free(re);
    fftw_free(co);
    return out;
}

ScalarField inverse_fft(const SpectralField& c) {
    const TorusGrid& g = c.grid();
    fftw_plan p = get_plan(g, false);

    // c2r destroys its input, so it always runs on a scratch copy.
    fftw_complex* co = fftw_alloc_complex(g.spectral_size());
    double* re = fftw_alloc_real(g.size());
    for (std::size_t i = 0; i < g.spectral_size(); ++i) {
        co[i][0] = c[i].real();
        co[i][1] = c[i].imag();
    }
    fftw_execute_dft_c2r(p, co, re);

    ScalarField out(g);
    std::memcpy(out.values().data(), re, g.size() * sizeof(double));
    fftw_free(co);
    fftw_free(re);
    return out;
}

} // namespace nslab
