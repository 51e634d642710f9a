#pragma once

// Thin RAII wrapper over FFTW's 1-D complex transform. Plans are created with
// FFTW_ESTIMATE so the chosen algorithm, and therefore the output bits, do not
// depend on timing measurements.

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>

#include <fftw3.h>

namespace lptem::fft {

namespace detail {
// The FFTW planner is not re-entrant; fftw_execute is.
inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};
} // namespace detail

enum class Direction { forward = FFTW_FORWARD, backward = FFTW_BACKWARD };

/// Unnormalized in-place DFT of `data`:
/// forward  X_k = sum_j x_j exp(-2 pi i jk/n), backward uses exp(+...).
inline void transform(std::span<std::complex<double>> data, Direction dir) {
    const std::size_t n = data.size();
    if (n == 0) return;
    std::unique_ptr<fftw_complex, detail::FftwFree> buf(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
    if (!buf) throw std::bad_alloc();
    fftw_plan plan;
    {
        std::lock_guard lock(detail::planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(n), buf.get(), buf.get(),
                                static_cast<int>(dir), FFTW_ESTIMATE);
    }
    if (plan == nullptr) throw std::runtime_error("fftw: plan creation failed");
    for (std::size_t i = 0; i < n; ++i) {
        buf.get()[i][0] = data[i].real();
        buf.get()[i][1] = data[i].imag();
    }
    fftw_execute(plan);
    for (std::size_t i = 0; i < n; ++i) data[i] = {buf.get()[i][0], buf.get()[i][1]};
    {
        std::lock_guard lock(detail::planner_mutex());
        fftw_destroy_plan(plan);
    }
}

} // namespace lptem::fft
