#pragma once

#include <complex>
#include <memory>
#include <mutex>
#include <vector>

#include "boltz/phase_space.hpp"

namespace boltz {

/** Process-wide lock guarding FFTW plan creation/destruction (not thread-safe). */
std::mutex& fftw_planner_mutex();

/**
 * Shifted 3-D Fourier transforms between the velocity cube [−Lv, Lv)³ and the
 * frequency cube [−Lζ, Lζ)³.
 *
 * Forward:  f̂(ζ_ε) = e^{−i δ(ε)} (2π)^{−3/2} Δv³ · FFT[ f(v_k) e^{+i Lζ Δv (k_x+k_y+k_z)} ]
 * with δ(ε) = Lv (3 Lζ − Δζ (ε_x+ε_y+ε_z)); the inverse applies the mirrored
 * phases with Δζ³ and the unscaled inverse FFT.  Because Δv Δζ Nv = 2π the
 * round trip is exact to rounding.
 *
 * Instances own FFTW plans (created with FFTW_ESTIMATE for run-to-run
 * determinism) plus a scratch buffer; one instance is not safe for concurrent
 * use, but distinct instances over the same grid may run concurrently.
 */
class SpectralTransform {
  public:
    explicit SpectralTransform(const VelocityGrid& grid);
    ~SpectralTransform();
    SpectralTransform(const SpectralTransform&) = delete;
    SpectralTransform& operator=(const SpectralTransform&) = delete;

    const VelocityGrid& grid() const { return grid_; }

    /** Real velocity-space samples → spectral coefficients (length Nv³ each). */
    void forward(const double* f, std::complex<double>* fhat);

    /**
     * Spectral coefficients → velocity-space samples.  The imaginary residue
     * of the inverse transform is discarded; its max magnitude is returned so
     * the caller can assert it is numerically zero.
     */
    double backward(const std::complex<double>* qhat, double* q);

    /** Complex-to-complex inverse with both parts kept (diagnostics). */
    void backward_complex(const std::complex<double>* qhat, std::complex<double>* q);

  private:
    VelocityGrid grid_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace boltz
