#pragma once

#include "roughscatter/interface.hpp"
#include "roughscatter/paraxial.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace roughscatter {

/// Observation window of the speckle profile: large-scale offsets (s_bar, y_bar), beam-scale offset y and
/// fine grids (s_tilde, y_tilde). Samples are eps^{1 - 2 gamma} u at the mapped lab point.
struct SpeckleWindow {
    double s_bar{0};
    Eigen::Vector2d y_bar{Eigen::Vector2d::Zero()};
    Eigen::Vector2d y{Eigen::Vector2d::Zero()};
    std::vector<double> s_tilde;
    std::vector<Eigen::Vector2d> y_tilde;
    Side side{Side::Reflected};
};

double speckle_prefactor(const ScaleRegime<double>& regime);

/// Frame coordinates of a window sample: s = eps^{1 - 2 gamma} s_bar + s_tilde,
/// Y = eps^{1/2 - gamma} y_bar + y + eps^{gamma - 1/2} y_tilde.
FramePoint speckle_frame_point(const ScaleRegime<double>& regime, double s_bar, const Eigen::Vector2d& y_bar,
                               const Eigen::Vector2d& y, double s_tilde, const Eigen::Vector2d& y_tilde);

/// Samples of the speckle profile from a simulated wavefront, rows over y_tilde and columns over s_tilde.
/// Requires gamma > 1/2; throws std::out_of_range outside the simulated grid.
Eigen::MatrixXd extract_speckle(const WaveField& field, const MediumConfig<double>& cfg,
                                const ScaleRegime<double>& regime, const SpeckleWindow& window);

/// Probe layout of a speckle window over the tensor grid y_tilde = (t1[a], t2[b]).
ProbeLayout speckle_layout(const ScaleRegime<double>& regime, const Eigen::Vector2d& y_bar, const Eigen::Vector2d& y,
                           const std::vector<double>& t1, const std::vector<double>& t2);

/// Raised-cosine window of unit mass supported on [-width/2, width/2].
double mollifier(double x, double width);

struct SpeckleOffsets {
    Eigen::Vector2d y;
    double s{0};
};

/// y_p = z c_j A_j p and s_p = p.y_p / 2 (z = z_int, j = 0 reflected; z = z_tr - z_int, j = 1 transmitted).
SpeckleOffsets speckle_offsets(Side side, const MediumConfig<double>& cfg, const Eigen::Vector2d& p);

struct Ellipse {
    /// Semi-axes along the eigenvectors of A_j^{-1}, smaller eigenvalue first.
    Eigen::Vector2d semi_axes{Eigen::Vector2d::Zero()};
    Eigen::Matrix2d axes{Eigen::Matrix2d::Identity()};

    Eigen::Vector2d point(double angle) const;
};

/// {y_bar : y_bar^T A_j^{-1} y_bar = 2 z c_j s_bar}. Throws std::invalid_argument for s_bar < 0.
Ellipse ellipse_support(Side side, const MediumConfig<double>& cfg, double s_bar);

/// Closed-form speckle correlation kernel for one side with the delta in s_bar replaced by the mollifier.
struct SpeckleKernel {
    Side side{Side::Reflected};
    MediumConfig<double> cfg;
    InterfaceModel model;
    SourceProfile profile;
    double mollifier_width{0};
    int n_quad{512};
    std::vector<std::string> warnings;

    /// Scattered slowness p(y_bar) = A_j^{-1} y_bar / (z c_j).
    Eigen::Vector2d direction(const Eigen::Vector2d& y_bar) const;
    /// s_bar on which the kernel is supported for a given y_bar.
    double support(const Eigen::Vector2d& y_bar) const;
    /// Kernel integrated over s_bar (independent of the mollifier), at differences (s_tilde, y_tilde).
    double integrated(const Eigen::Vector2d& y_bar, double s_tilde, const Eigen::Vector2d& y_tilde) const;
    double operator()(double s_bar, const Eigen::Vector2d& y_bar, double s_tilde, const Eigen::Vector2d& y_tilde) const;
};

/// Scattering-distribution slowness v of a side: 2 s0 (reflected) or s0 - s1 (transmitted).
double scattering_slowness(Side side, const MediumConfig<double>& cfg);

SpeckleKernel kernel_C(Side side, const MediumConfig<double>& cfg, const InterfaceModel& model,
                       const SourceProfile& profile, double mollifier_width, int n_quad = 512);

/// Mean and standard error of vector-valued per-realization quantities; partial accumulators merge in any order.
class EnsembleAccumulator {
public:
    explicit EnsembleAccumulator(bool keep_samples = false) : keep_(keep_samples) {}
    void add(const Eigen::VectorXd& x);
    void merge(const EnsembleAccumulator& other);
    long count() const { return n_; }
    Eigen::VectorXd mean() const;
    Eigen::VectorXd standard_error() const;
    const std::vector<Eigen::VectorXd>& samples() const { return samples_; }

private:
    bool keep_;
    long n_{0};
    Eigen::VectorXd sum_;
    Eigen::VectorXd sumsq_;
    std::vector<Eigen::VectorXd> samples_;
};

/// Offsets of a cut through the correlation: y_tilde_2 - y_tilde_1 = (k1, k2) grid steps, s_tilde_2 - s_tilde_1
/// over ds.
struct CorrelationCut {
    int k1{0};
    int k2{0};
    std::vector<double> ds;
};

/// s_bar-integrated products of one realization, int S(s_bar, s1, y1) S(s_bar, s2, y2) d s_bar, averaged over all
/// pairs of the y_tilde tensor grid with the cut's offset. The probe field must come from speckle_layout.
std::vector<Eigen::VectorXd> integrated_correlation(const ProbeField& field, const ScaleRegime<double>& regime,
                                                    const std::vector<CorrelationCut>& cuts);

/// Mean of u^2 over all probes of a field at frame times s (the empirical intensity before scaling).
Eigen::VectorXd probe_intensity(const ProbeField& field, const std::vector<double>& s);

struct MomentStatistic {
    double value{0};
    double standard_error{0};
    double expected{0};
    bool pass{false};
    double z() const { return standard_error > 0 ? (value - expected) / standard_error : 0.0; }
};

struct GaussianityReport {
    int realizations{0};
    int probes{0};
    /// Probe-averaged mean / std, third standardized moment and kurtosis, with grouped-jackknife errors.
    MomentStatistic mean;
    MomentStatistic third;
    MomentStatistic kurtosis;
    Eigen::VectorXd probe_kurtosis;
    bool pass() const { return mean.pass && third.pass && kurtosis.pass; }
};

/// Moment tests on samples (realizations x probes) at `threshold` standard errors, with errors from a grouped
/// jackknife over realizations (groups <= 0: delete-one). Throws for fewer than 100 realizations.
GaussianityReport gaussianity_test(const Eigen::MatrixXd& samples, int groups = 0, double threshold = 3.0);

struct IndependenceReport {
    bool applicable{true};
    MomentStatistic correlation;
    bool pass() const { return !applicable || correlation.pass; }
};

/// Probe-averaged normalized cross-correlation of matched samples a and b (realizations x probes), expected 0.
/// Not applicable when either side has zero variance.
IndependenceReport independence_test(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int groups = 0,
                                     double threshold = 3.0);

struct CalibrationReport {
    int seeds{0};
    int gaussianity_passed{0};
    int independence_passed{0};
    /// Seeds on which both reports pass.
    int passed{0};
    double gaussianity_rate() const { return seeds ? double(gaussianity_passed) / seeds : 0.0; }
    double independence_rate() const { return seeds ? double(independence_passed) / seeds : 0.0; }
    double pass_rate() const { return seeds ? double(passed) / seeds : 0.0; }
};

/// Runs the Gaussianity and independence tests on i.i.d. Gaussian surrogates of the given size, one draw per seed.
CalibrationReport calibrate_tests(int realizations, int probes, int seeds, std::uint64_t master_seed, int groups = 0,
                                  double threshold = 3.0);

struct SelfAveragingReport {
    std::vector<double> epsilon;
    /// Variance of the functional normalized by its squared ensemble mean.
    std::vector<double> relative_variance;
    bool decreasing{false};
};

/// functionals[k] holds per-realization values at epsilon[k]. Requires at least two epsilon values.
SelfAveragingReport self_averaging_test(const std::vector<double>& epsilon,
                                        const std::vector<std::vector<double>>& functionals);

/// Homogenized specular wavefront: flat closed form filtered by phi_V(omega tau) with tau = screen_slowness(side).
Eigen::MatrixXd homogenized_specular_prediction(Side side, const SourceProfile& profile,
                                                const MediumConfig<double>& cfg, const InterfaceModel& model,
                                                const LateralGrid& lat, const std::vector<double>& s,
                                                int n_quad = 256);

std::vector<double> homogenized_specular_at(Side side, const SourceProfile& profile, const MediumConfig<double>& cfg,
                                            const InterfaceModel& model, const std::vector<FramePoint>& points,
                                            int n_quad = 256);

/// The same prediction as the time convolution of the flat wavefront with the pulse-shaping kernel.
std::vector<double> homogenized_specular_by_convolution(Side side, const SourceProfile& profile,
                                                        const MediumConfig<double>& cfg, const InterfaceModel& model,
                                                        const std::vector<FramePoint>& points, int n_nodes = 801,
                                                        int n_quad = 256);

/// Projection of one realization's slice m on the flat slice: <W_flat, W> / <W_flat, W_flat> over the probes.
cplx damping_projection(const ProbeField& field, const ProbeField& flat, int m);

} // namespace roughscatter
