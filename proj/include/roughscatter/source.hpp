#pragma once

#include "roughscatter/grid.hpp"
#include "roughscatter/medium.hpp"

#include <Eigen/Dense>

namespace roughscatter {

/// Separable Gaussian source Psi(s, y) = cos(omega_c s) exp(-s^2 sigma^2 / 2) exp(-|y|^2 / (2 w^2)).
/// sigma is the spectral rms width; spectral amplitudes below threshold * peak define the declared band.
struct SourceProfile {
    double omega_c{2 * std::numbers::pi};
    double bandwidth{1.0};
    double beam_width{0.5};
    double threshold{1e-8};

    double temporal(double s) const;
    double lateral(const Eigen::Vector2d& y) const;
    double value(double s, const Eigen::Vector2d& y) const { return temporal(s) * lateral(y); }

    /// T(omega) = int e^{i omega s} temporal(s) ds (real and even).
    double temporal_spectrum(double omega) const;
    /// L(kappa) = int e^{-i kappa.y} lateral(y) dy.
    double lateral_spectrum(const Eigen::Vector2d& kappa) const;
    /// Psi-hat(omega, q) = T(omega) L(omega q).
    double spectrum(double omega, const Eigen::Vector2d& q) const;

    /// Half-width in units of sigma where a Gaussian envelope drops to threshold.
    double band_halfwidth_sigmas() const;
    double band_lo() const;
    double band_hi() const;
    /// Largest |q| carrying more than threshold of the peak amplitude over the declared band.
    double q_max() const;
    /// |Psi-hat|^2 integrated over y (or over kappa / (2pi)^2): |T|^2 pi w^2.
    double band_energy(double omega) const;
    /// Total L2 norm squared of Psi.
    double l2_norm_squared() const;
};

/// Validated construction; requires omega_c > 3 sigma so that the two spectral lobes are separated.
SourceProfile make_default_profile(double omega_c, double bandwidth, double beam_width);
void validate(const SourceProfile& p);

/// Samples Psi on (lateral x time) grid.
Eigen::MatrixXd sample(const SourceProfile& p, const LateralGrid& lat, const OmegaGrid& omega);

/// Band energy of sampled data per omega bin: sum_Y |W(omega, Y)|^2 dA, via the temporal FFT.
Eigen::VectorXd band_energy_sampled(const Eigen::MatrixXd& samples, const LateralGrid& lat, const OmegaGrid& omega);

struct PropagatingCheck {
    bool ok;
    /// 1 - (sqrt(eps) c0 q_max + c0 |k0|); positive when every declared mode stays propagating.
    double margin;
};

PropagatingCheck propagating_mode_check(const SourceProfile& p, const MediumConfig<double>& cfg, double epsilon);

/// Spectrum on the scaled (omega, q) grid: value(k, m) at omega_m and q = kappa_k / omega_m, with kappa_k the
/// FFT wavenumbers of the lateral grid.
struct ScaledSpectrum {
    LateralGrid lateral;
    OmegaGrid omega;
    Eigen::MatrixXcd values;
};

/// Psi-hat(omega, q) = int e^{i omega (s - q.y)} Psi ds dy from samples (lateral x time).
ScaledSpectrum scaled_forward(const Eigen::MatrixXd& samples, const LateralGrid& lat, const OmegaGrid& omega);
/// Psi(s, y) = (2pi)^-3 int e^{-i omega (s - q.y)} Psi-hat omega^2 d omega dq, with the omega^2 Jacobian applied
/// as an explicit quadrature weight.
Eigen::MatrixXd scaled_inverse(const ScaledSpectrum& spec);

/// Max |Psi-hat(-omega, q) - conj(Psi-hat(omega, q))| relative to max |Psi-hat|, the symmetry of any real profile.
double hermitian_defect(const ScaledSpectrum& spec);

} // namespace roughscatter
