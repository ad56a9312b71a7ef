#include "boltz/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace boltz {

/// FFTW plan creation/destruction is not thread-safe; execution is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

namespace {

constexpr double two_pi_pow_3_2() {
    return 15.749609945722419;   // (2π)^{3/2}
}

}  // namespace

struct SpectralTransform::Impl {
    fftw_complex* in = nullptr;
    fftw_complex* out = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    // separable per-axis phase factors
    std::vector<std::complex<double>> pre_f, post_f, pre_b, post_b;
    std::complex<double> global_f, global_b;
};

SpectralTransform::SpectralTransform(const VelocityGrid& grid) : grid_(grid), impl_(new Impl) {
    const int n = grid.nv;
    const std::size_t total = grid.size();
    impl_->in = fftw_alloc_complex(total);
    impl_->out = fftw_alloc_complex(total);
    {
        std::lock_guard lock(fftw_planner_mutex());
        impl_->fwd = fftw_plan_dft_3d(n, n, n, impl_->in, impl_->out, FFTW_FORWARD, FFTW_ESTIMATE);
        impl_->bwd = fftw_plan_dft_3d(n, n, n, impl_->in, impl_->out, FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    // Shifted-transform phases: the forward transform multiplies f by
    // exp(+i Lζ Δv Σk_s) Δv³ before the FFT and by
    // exp(−i δ(ε)) = exp(−i 3 Lv Lζ) exp(+i Lv Δζ Σε_s) after it; the inverse
    // mirrors them with Δζ³ and the opposite signs.
    impl_->pre_f.resize(n);
    impl_->post_f.resize(n);
    impl_->pre_b.resize(n);
    impl_->post_b.resize(n);
    for (int k = 0; k < n; ++k) {
        const double a = grid.lzeta * grid.dv * k;
        impl_->pre_f[k] = {std::cos(a), std::sin(a)};
        impl_->post_b[k] = {std::cos(a), -std::sin(a)};
    }
    for (int e = 0; e < n; ++e) {
        const double a = grid.lv * grid.dzeta * e;
        impl_->post_f[e] = {std::cos(a), std::sin(a)};
        impl_->pre_b[e] = {std::cos(a), -std::sin(a)};
    }
    const double corner = 3.0 * grid.lv * grid.lzeta;
    const double dv3 = grid.dv * grid.dv * grid.dv;
    const double dz3 = grid.dzeta * grid.dzeta * grid.dzeta;
    impl_->global_f = std::complex<double>(std::cos(corner), -std::sin(corner)) *
                      (dv3 / two_pi_pow_3_2());
    impl_->global_b = std::complex<double>(std::cos(corner), std::sin(corner)) *
                      (dz3 / two_pi_pow_3_2());
}

SpectralTransform::~SpectralTransform() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(impl_->fwd);
    fftw_destroy_plan(impl_->bwd);
    fftw_free(impl_->in);
    fftw_free(impl_->out);
}

void SpectralTransform::forward(const double* f, std::complex<double>* fhat) {
    const int n = grid_.nv;
    auto* in = reinterpret_cast<std::complex<double>*>(impl_->in);
    std::size_t idx = 0;
    for (int kx = 0; kx < n; ++kx) {
        const auto px = impl_->pre_f[kx];
        for (int ky = 0; ky < n; ++ky) {
            const auto pxy = px * impl_->pre_f[ky];
            for (int kz = 0; kz < n; ++kz, ++idx) in[idx] = f[idx] * (pxy * impl_->pre_f[kz]);
        }
    }
    fftw_execute(impl_->fwd);
    const auto* out = reinterpret_cast<const std::complex<double>*>(impl_->out);
    idx = 0;
    for (int ex = 0; ex < n; ++ex) {
        const auto px = impl_->global_f * impl_->post_f[ex];
        for (int ey = 0; ey < n; ++ey) {
            const auto pxy = px * impl_->post_f[ey];
            for (int ez = 0; ez < n; ++ez, ++idx) fhat[idx] = out[idx] * (pxy * impl_->post_f[ez]);
        }
    }
}

double SpectralTransform::backward(const std::complex<double>* qhat, double* q) {
    const int n = grid_.nv;
    auto* in = reinterpret_cast<std::complex<double>*>(impl_->in);
    std::size_t idx = 0;
    for (int ex = 0; ex < n; ++ex) {
        const auto px = impl_->pre_b[ex];
        for (int ey = 0; ey < n; ++ey) {
            const auto pxy = px * impl_->pre_b[ey];
            for (int ez = 0; ez < n; ++ez, ++idx) in[idx] = qhat[idx] * (pxy * impl_->pre_b[ez]);
        }
    }
    fftw_execute(impl_->bwd);
    const auto* out = reinterpret_cast<const std::complex<double>*>(impl_->out);
    double max_im = 0.0;
    idx = 0;
    for (int kx = 0; kx < n; ++kx) {
        const auto px = impl_->global_b * impl_->post_b[kx];
        for (int ky = 0; ky < n; ++ky) {
            const auto pxy = px * impl_->post_b[ky];
            for (int kz = 0; kz < n; ++kz, ++idx) {
                const auto v = out[idx] * (pxy * impl_->post_b[kz]);
                q[idx] = v.real();
                max_im = std::max(max_im, std::abs(v.imag()));
            }
        }
    }
    return max_im;
}

void SpectralTransform::backward_complex(const std::complex<double>* qhat,
                                         std::complex<double>* qc) {
    const int n = grid_.nv;
    auto* in = reinterpret_cast<std::complex<double>*>(impl_->in);
    std::size_t idx = 0;
    for (int ex = 0; ex < n; ++ex) {
        const auto px = impl_->pre_b[ex];
        for (int ey = 0; ey < n; ++ey) {
            const auto pxy = px * impl_->pre_b[ey];
            for (int ez = 0; ez < n; ++ez, ++idx) in[idx] = qhat[idx] * (pxy * impl_->pre_b[ez]);
        }
    }
    fftw_execute(impl_->bwd);
    const auto* out = reinterpret_cast<const std::complex<double>*>(impl_->out);
    idx = 0;
    for (int kx = 0; kx < n; ++kx) {
        const auto px = impl_->global_b * impl_->post_b[kx];
        for (int ky = 0; ky < n; ++ky) {
            const auto pxy = px * impl_->post_b[ky];
            for (int kz = 0; kz < n; ++kz, ++idx) qc[idx] = out[idx] * (pxy * impl_->post_b[kz]);
        }
    }
}

}  // namespace boltz
