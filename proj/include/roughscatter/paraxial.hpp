#pragma once

#include "roughscatter/grid.hpp"
#include "roughscatter/interface.hpp"
#include "roughscatter/medium.hpp"
#include "roughscatter/snell.hpp"
#include "roughscatter/source.hpp"

#include <functional>
#include <vector>

namespace roughscatter {

enum class Direction { Forward, Backward };

/// Applies e^{-/+ i z c_j kappa^T A_j kappa / (2 omega)} to every lateral mode of every omega slice
/// (kappa = omega q). The field is given and returned in the physical lateral representation.
WaveField propagate(const WaveField& field, const MediumConfig<double>& cfg, int medium, double z,
                    Direction dir = Direction::Forward);

/// Grid of V samples that coincides with a lateral beam grid at the interface: origin x_int / eps^gamma and
/// spacing d / ell in correlation-length units.
InterfaceGrid screen_grid(const LateralGrid& lat, const MediumConfig<double>& cfg, const ScaleRegime<double>& regime);

/// Slowness combination of the screen: 2 s0 for reflection, s0 - s1 for transmission.
double screen_slowness(Side side, const MediumConfig<double>& cfg);

/// Multiplies each omega slice by e^{i omega tau V}. Throws std::runtime_error when more than 1e-6 of a slice's
/// energy sits in the outer band of the grid (footprint not covered by the V samples).
WaveField apply_phase_screen(const WaveField& field, const InterfaceRealization& realization, double tau,
                             const MediumConfig<double>& cfg, const ScaleRegime<double>& regime);

struct SimulationGrid {
    LateralGrid lateral;
    OmegaGrid omega;
};

struct SimulationReport {
    int slices_computed{0};
    int slices_tapered{0};
    /// Largest fraction of slice energy found in the outer sixteenth of the lateral grid.
    double max_edge_fraction{0};
};

/// Leading-order reflected wavefront at z = 0 in the reflected moving frame, by split-step Fourier propagation:
/// source -> z_int in medium 0 -> phase screen (tau = 2 s0) -> z_int in medium 0, times R / 2.
WaveField simulate_reflected(const SourceProfile& profile, const MediumConfig<double>& cfg,
                             const ScaleRegime<double>& regime, const InterfaceRealization& realization,
                             const SimulationGrid& grid, SimulationReport* report = nullptr);

/// Transmitted wavefront at z = z_tr: second leg in medium 1 over z_tr - z_int, tau = s0 - s1,
/// prefactor (T / 2) sqrt(s0 / s1).
WaveField simulate_transmitted(const SourceProfile& profile, const MediumConfig<double>& cfg,
                               const ScaleRegime<double>& regime, const InterfaceRealization& realization,
                               const SimulationGrid& grid, SimulationReport* report = nullptr);

/// Optional multiplicative damping d(omega) on positive frequencies.
using SpectralDamping = std::function<double(double)>;

/// Flat-interface specular wavefront of the Gaussian source by direct quadrature: closed-form lateral Gaussian
/// integral and a trapezoid rule over the declared band with n_quad nodes. Samples (lateral x time) on the
/// given grids. Requires k0 along a grid axis so that the lateral integral separates.
Eigen::MatrixXd flat_specular_closed_form(const SourceProfile& profile, const MediumConfig<double>& cfg, Side side,
                                          const LateralGrid& lat, const std::vector<double>& s, int n_quad = 256,
                                          const SpectralDamping& damping = {});

/// Same quadrature at scattered points (s, Y).
std::vector<double> flat_specular_at(const SourceProfile& profile, const MediumConfig<double>& cfg, Side side,
                                     const std::vector<FramePoint>& points, int n_quad = 256,
                                     const SpectralDamping& damping = {});

/// Output coordinates of a tensor probe grid: point (a, b) is (y1[a], y2[b]), flattened a * y2.size() + b.
struct ProbeLayout {
    std::vector<double> y1;
    std::vector<double> y2;
    int size() const { return static_cast<int>(y1.size() * y2.size()); }
};

struct ProbeField {
    ProbeLayout layout;
    OmegaGrid omega;
    Eigen::MatrixXcd spectrum;
    Frame frame;
};

/// Specular wavefront at arbitrary tensor probe points by direct Fresnel quadrature over the interface footprint:
/// closed-form Gaussian beam on the footprint grid, phase screen, then the separable Fresnel kernel of the second
/// leg (two dense products per slice). Requires k0 along a grid axis.
ProbeField evaluate_probes(const SourceProfile& profile, const MediumConfig<double>& cfg,
                           const ScaleRegime<double>& regime, const InterfaceRealization& realization, Side side,
                           const LateralGrid& footprint, const OmegaGrid& omega, const ProbeLayout& layout,
                           SimulationReport* report = nullptr);

/// Several layouts from one pass over the footprint; layouts sharing second-axis coordinates share the work.
std::vector<ProbeField> evaluate_probes(const SourceProfile& profile, const MediumConfig<double>& cfg,
                                        const ScaleRegime<double>& regime, const InterfaceRealization& realization,
                                        Side side, const LateralGrid& footprint, const OmegaGrid& omega,
                                        const std::vector<ProbeLayout>& layouts, SimulationReport* report = nullptr);

/// Real samples u(s_j) of a probe field at arbitrary frame times (exact trigonometric interpolation of the
/// omega grid), one row per probe.
Eigen::MatrixXd probe_time_samples(const ProbeField& field, const std::vector<double>& s);

/// Limit specular wavefront for gamma = 1/2 built from one realization, sampled on the simulation grid.
WaveField random_specular_prediction(const SourceProfile& profile, const MediumConfig<double>& cfg,
                                     const ScaleRegime<double>& regime, const InterfaceRealization& realization,
                                     const SimulationGrid& grid, Side side = Side::Reflected);

/// Window coordinates (s, y, y~): lab time t_obs + sqrt(eps) k0.y + eps^gamma k0.y~ + eps s and position
/// x_obs + sqrt(eps) y + eps^gamma y~.
struct WindowPoint {
    double s{0};
    Eigen::Vector2d y{Eigen::Vector2d::Zero()};
    Eigen::Vector2d y_tilde{Eigen::Vector2d::Zero()};
};

/// Samples the field at window points: trigonometric interpolation in time, separable cubic in the lateral
/// variables. Throws std::out_of_range if a point falls outside the simulated grid.
std::vector<double> window_specular(const WaveField& field, const ScaleRegime<double>& regime,
                                    const std::vector<WindowPoint>& points);

struct JumpResiduals {
    /// |[u](0) - eps^2 Psi-hat| relative to the source scale.
    double source_jump{0};
    /// |[d_z u](0)| relative.
    double source_derivative_jump{0};
    double interface_value{0};
    double interface_derivative{0};
    int modes_checked{0};

    double max() const;
};

/// Reconstructs the flat-interface modal solution on a sample of (omega, q) modes of the declared band and
/// evaluates the jump relations at z = 0 and the continuity relations at z = z_int.
JumpResiduals jump_condition_check(const SourceProfile& profile, const MediumConfig<double>& cfg, double epsilon,
                                   double source_scale = 1.0);

} // namespace roughscatter
