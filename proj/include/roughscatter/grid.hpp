#pragma once

#include "roughscatter/medium.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace roughscatter {

using cplx = std::complex<double>;

/// Centered uniform 2D lateral grid: Y_i = (i - n/2) d. Flattened index i1 * n2 + i2.
struct LateralGrid {
    int n1{0};
    int n2{0};
    double d1{0};
    double d2{0};

    int size() const { return n1 * n2; }
    int index(int i1, int i2) const { return i1 * n2 + i2; }
    double coord1(int i1) const { return (i1 - n1 / 2) * d1; }
    double coord2(int i2) const { return (i2 - n2 / 2) * d2; }
    Eigen::Vector2d point(int i1, int i2) const { return {coord1(i1), coord2(i2)}; }
    /// Wavenumber of DFT bin k in natural FFT order.
    double wavenumber1(int k) const { return 2 * std::numbers::pi * (k < (n1 + 1) / 2 ? k : k - n1) / (n1 * d1); }
    double wavenumber2(int k) const { return 2 * std::numbers::pi * (k < (n2 + 1) / 2 ? k : k - n2) / (n2 * d2); }
    double cell_area() const { return d1 * d2; }
};

/// Centered frequency grid omega_m = (m - n/2) d_omega with its dual time grid s_j = (j - n/2) ds.
struct OmegaGrid {
    int n{0};
    double d_omega{0};

    double omega(int m) const { return (m - n / 2) * d_omega; }
    double ds() const { return 2 * std::numbers::pi / (n * d_omega); }
    double s(int j) const { return (j - n / 2) * ds(); }
    double period() const { return n * ds(); }
};

enum class FrameKind { Lab, Reflected, Transmitted };

/// Moving frame attached to an observation point: t = t_obs + sqrt(eps) k0.Y + eps s, x = x_obs + sqrt(eps) Y.
struct Frame {
    FrameKind kind{FrameKind::Lab};
    Eigen::Vector2d x_obs{Eigen::Vector2d::Zero()};
    double t_obs{0};
    Eigen::Vector2d k0{Eigen::Vector2d::Zero()};
    double epsilon{1};
};

Frame make_frame(FrameKind kind, const MediumConfig<double>& cfg, double epsilon);

struct LabPoint {
    double t;
    Eigen::Vector2d x;
};

struct FramePoint {
    double s;
    Eigen::Vector2d Y;
};

LabPoint to_lab(const Frame& f, const FramePoint& p);
FramePoint to_frame(const Frame& f, const LabPoint& p);

/// Spectral wavefront on a (lateral x omega) grid: spectrum(i, m) with i the flattened lateral index.
struct WaveField {
    LateralGrid lateral;
    OmegaGrid omega;
    Eigen::MatrixXcd spectrum;
    double z{0};
    Frame frame;

    /// Real time-domain samples u(s_j, Y_i), (lateral x time).
    Eigen::MatrixXd time_domain() const;
    /// Riemann-sum L2 norm over (s, Y).
    double l2_norm() const;
};

/// Inverse temporal transform (1/2pi) sum_m e^{-i omega_m s_j} W_m d_omega for every row of a spectrum.
Eigen::MatrixXd spectrum_to_time(const Eigen::MatrixXcd& spectrum, const OmegaGrid& omega);
/// Forward temporal transform sum_j e^{i omega_m s_j} u_j ds, the inverse of spectrum_to_time.
Eigen::MatrixXcd time_to_spectrum(const Eigen::MatrixXd& samples, const OmegaGrid& omega);

} // namespace roughscatter
