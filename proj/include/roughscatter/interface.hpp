#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace roughscatter {

using cplx = std::complex<double>;

enum class CorrelationFamily { Gaussian };
enum class MarginalLaw { Gaussian };

/// Stationary isotropic elevation field in correlation-length units: R(y) = sigma_v^2 exp(-|y|^2 / (2 r^2)).
struct InterfaceModel {
    double sigma_v{1.0};
    double correlation_radius{1.0};
    CorrelationFamily family{CorrelationFamily::Gaussian};
    MarginalLaw marginal{MarginalLaw::Gaussian};

    double covariance(const Eigen::Vector2d& y) const;
    /// S(kappa) = int e^{-i kappa.y} R(y) dy.
    double spectral_density(const Eigen::Vector2d& kappa) const;
};

void validate(const InterfaceModel& m);

/// Periodic sampling grid for V in correlation-length units; node (i1, i2) sits at origin + ((i1 - n1/2) d1, (i2 - n2/2) d2).
struct InterfaceGrid {
    int n1{0};
    int n2{0};
    double d1{0};
    double d2{0};
    Eigen::Vector2d origin{Eigen::Vector2d::Zero()};

    int size() const { return n1 * n2; }
    int index(int i1, int i2) const { return i1 * n2 + i2; }
    Eigen::Vector2d position(int i1, int i2) const
    {
        return origin + Eigen::Vector2d((i1 - n1 / 2) * d1, (i2 - n2 / 2) * d2);
    }
};

struct InterfaceRealization {
    InterfaceGrid grid;
    std::uint64_t seed{0};
    InterfaceModel model;
    /// Row-major samples, index i1 * n2 + i2.
    Eigen::VectorXd values;

    double at(int i1, int i2) const { return values(grid.index(i1, i2)); }
};

/// Seed of realization `index` in stream `stream` derived from a master seed (splitmix64 mixing).
std::uint64_t realization_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

/// Gaussian field with the model covariance (circularly stationary) by spectral filtering of white noise.
InterfaceRealization synthesize(const InterfaceModel& model, const InterfaceGrid& grid, std::uint64_t seed);

/// Identically zero realization on the given grid.
InterfaceRealization flat_realization(const InterfaceGrid& grid);

/// phi_V(u) = E[e^{i u V}].
cplx characteristic_function(const InterfaceModel& model, double u);

struct MonteCarloEstimate {
    cplx mean;
    /// Standard error of the real and imaginary parts.
    double se_real;
    double se_imag;
};

MonteCarloEstimate characteristic_function_mc(const Eigen::VectorXd& samples, double u);

/// Phi(s) = f_V(s / (2 s0)) / (2 s0), the scaled elevation density.
double pulse_shaping_kernel(const InterfaceModel& model, double s0, double s);

/// g(y) = E[e^{i omega v (V(y) - V(0))}].
cplx increment_characteristic(const InterfaceModel& model, double v, double omega, const Eigen::Vector2d& y);

/// Centered square p-grid: p_i = (i - n/2) dp.
struct PGrid {
    int n{128};
    double dp{0.05};
    double coord(int i) const { return (i - n / 2) * dp; }
};

struct ScatteringDistribution {
    double v{0};
    double omega{0};
    PGrid grid;
    double atom{0};
    /// Standard error of the atom weight (Monte Carlo estimates only).
    double atom_se{0};
    /// Row-major density samples, density(i1, i2) at (coord(i1), coord(i2)).
    Eigen::MatrixXd density;
    double mass{0};
    /// Largest |imaginary part| discarded from the Fourier transform, relative to the density peak.
    double imag_residual{0};
    std::vector<std::string> warnings;
};

/// Atom plus continuous density from the 2D Fourier transform of g - g_inf evaluated at omega p.
ScatteringDistribution scattering_distribution(const InterfaceModel& model, double v, double omega, const PGrid& grid);

/// Series form of the continuous density for Gaussian V and Gaussian correlation.
double scattering_density_series(const InterfaceModel& model, double v, double omega, const Eigen::Vector2d& p);

/// Ensemble estimate of g by lateral averaging, then the same atom/density split. The p-grid is the natural
/// Fourier grid of the realization grid (dp = 2 pi / (n d omega)); the central n_out x n_out block is returned.
ScatteringDistribution scattering_distribution_mc(const std::vector<InterfaceRealization>& realizations, double v,
                                                  double omega, int n_out);

struct MixingCurve {
    std::vector<double> r;
    std::vector<double> correlation;
};

/// Max over u of the normalized correlation between e^{iuV(x)} and e^{iuV(x + r e1)}; r is rounded to the grid.
MixingCurve mixing_diagnostic(const std::vector<InterfaceRealization>& realizations, const std::vector<double>& r_values,
                              const std::vector<double>& u_values = {0.5, 1.0, 2.0});

/// Empirical circular covariance of V along the grid lags, averaged over realizations (lag-natural order).
Eigen::MatrixXd empirical_covariance(const std::vector<InterfaceRealization>& realizations);

} // namespace roughscatter
