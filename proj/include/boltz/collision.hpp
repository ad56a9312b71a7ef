#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "boltz/model.hpp"
#include "boltz/phase_space.hpp"
#include "boltz/spectral.hpp"
#include "boltz/weights.hpp"

namespace boltz {

using Complex = std::complex<double>;

/**
 * Joint L²-orthogonal projection of the collision operators onto the
 * conservation constraints (per collision type).
 *
 * Elastic: constraints are the Ns species masses, 3 momentum components and
 * the kinetic energy; the Gram matrix is Ns·Σ_i C_i C_iᵀ.  Inelastic: total
 * mass, momentum, and kinetic + internal energy; Gram is (Ns³−Ns)·Σ_i C_i C_iᵀ.
 * Rows are rescaled for conditioning (the projector is scale-invariant);
 * factorizations are SPD Cholesky, computed once (SingularGram on failure).
 */
class ConservationProjector {
  public:
    ConservationProjector(const GasModel& model, const VelocityGrid& grid);
    ~ConservationProjector();
    ConservationProjector(const ConservationProjector&) = delete;
    ConservationProjector& operator=(const ConservationProjector&) = delete;

    /** Per-channel route: q[c] is Q̃ of elastic catalog channel c (species pair). */
    void project_elastic(const CollisionCatalog& catalog,
                         std::vector<std::vector<double>>& q) const;
    /** Per-channel route: q[i][c] is Q̃ of inelastic channel c of species i. */
    void project_inelastic(const CollisionCatalog& catalog,
                           std::vector<std::vector<std::vector<double>>>& q) const;

    /** Aggregated route: q[i] = Σ_channels Q̃ for species i (identical algebra). */
    void project_elastic_sum(const CollisionCatalog& catalog,
                             std::vector<std::vector<double>>& q) const;
    void project_inelastic_sum(const CollisionCatalog& catalog,
                               std::vector<std::vector<double>>& q) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct KernelOptions {
    int threads = 1;
    /// Budget for the optional box-major expanded weight lines; classes are
    /// expanded only when they all fit (bitwise-equal values either way).
    std::size_t expanded_bytes_cap = static_cast<std::size_t>(1600) << 20;
    bool force_compact = false;   ///< disable expansion (tests)
};

/**
 * Spectral evaluation of the full collision operator set for one gas state.
 *
 * evaluate() runs the production pipeline: forward shifted FFTs, the clipped
 * weighted convolutions of every catalog channel (gain terms deduplicated by
 * weight class; ξ-only-weighted parts via exact zero-padded FFT convolution),
 * inverse transforms, then the two conservation projections; the result is
 * the summed projected operator per species, d f_i/dt [same units as f/s].
 */
class CollisionKernel {
  public:
    CollisionKernel(const GasModel& model, const CollisionCatalog& catalog,
                    const VelocityGrid& grid, std::shared_ptr<const WeightTables> tables,
                    const KernelOptions& options = {});
    ~CollisionKernel();
    CollisionKernel(const CollisionKernel&) = delete;
    CollisionKernel& operator=(const CollisionKernel&) = delete;

    struct Diagnostics {
        double max_imag_ratio = 0.0;   ///< max over species of max|Im|/max|Re|
    };

    /** f[i] → q[i], both length Nv³ per species.  Throws on NaN/contamination. */
    Diagnostics evaluate(const std::vector<const double*>& f, const std::vector<double*>& q);

    /** Unprojected per-species sums (diagnostics/tests): elastic and inelastic parts. */
    Diagnostics evaluate_unprojected(const std::vector<const double*>& f,
                                     const std::vector<double*>& q_elastic,
                                     const std::vector<double*>& q_inelastic);

    // --- single-channel spectral routes (reference semantics, test-facing) ---

    /** Q̂ of one elastic channel by direct clipped summation. */
    void convolve_elastic(int pair_index, const Complex* fi_hat, const Complex* fj_hat,
                          Complex* qhat) const;
    /** Gain A-part Q̂ of inelastic channel c of species i (f̂_h ⋆ f̂_l). */
    void convolve_gain(int i, int c, const Complex* fh_hat, const Complex* fl_hat,
                       Complex* qhat) const;
    /** Loss part Q̂ of inelastic channel c of species i (f̂_i ⋆ weighted f̂_j). */
    void convolve_loss(int i, int c, const Complex* fi_hat, const Complex* fj_hat,
                       Complex* qhat) const;

    const CollisionCatalog& catalog() const { return catalog_; }
    const VelocityGrid& grid() const { return grid_; }
    const WeightTables& tables() const { return *tables_; }
    SpectralTransform& transform();

  private:
    GasModel model_;
    CollisionCatalog catalog_;
    VelocityGrid grid_;
    std::shared_ptr<const WeightTables> tables_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace boltz
