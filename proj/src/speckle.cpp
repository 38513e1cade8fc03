#include "roughscatter/speckle.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace roughscatter {

namespace {

constexpr double pi = 3.14159265358979323846;

struct Leg {
    double z;
    int medium;
    double coefficient_sq;
};

/// Second-leg geometry and squared field prefactor of a side.
Leg speckle_leg(Side side, const MediumConfig<double>& cfg)
{
    const auto rt = reflection_transmission_coefficients(cfg);
    if (side == Side::Reflected) return {cfg.z_int, 0, rt.R * rt.R / 4};
    const double s0 = vertical_slowness(cfg, 0), s1 = vertical_slowness(cfg, 1);
    return {cfg.z_tr - cfg.z_int, 1, rt.T * rt.T * s0 / (4 * s1)};
}

void require_speckle_regime(const ScaleRegime<double>& regime)
{
    validate(regime);
    if (!(regime.gamma > 0.5)) throw std::invalid_argument("speckle: gamma > 1/2 required");
}

} // namespace

double speckle_prefactor(const ScaleRegime<double>& regime) { return std::pow(regime.epsilon, 1 - 2 * regime.gamma); }

FramePoint speckle_frame_point(const ScaleRegime<double>& regime, double s_bar, const Eigen::Vector2d& y_bar,
                               const Eigen::Vector2d& y, double s_tilde, const Eigen::Vector2d& y_tilde)
{
    const double big = std::pow(regime.epsilon, 0.5 - regime.gamma);
    return {speckle_prefactor(regime) * s_bar + s_tilde, big * y_bar + y + regime.ell() * y_tilde};
}

Eigen::MatrixXd extract_speckle(const WaveField& field, const MediumConfig<double>& cfg,
                                const ScaleRegime<double>& regime, const SpeckleWindow& window)
{
    require_speckle_regime(regime);
    validate(cfg);
    const double big = std::pow(regime.epsilon, 0.5 - regime.gamma);
    std::vector<WindowPoint> pts;
    pts.reserve(window.y_tilde.size() * window.s_tilde.size());
    for (const auto& yt : window.y_tilde)
        for (double st : window.s_tilde)
            pts.push_back({speckle_prefactor(regime) * window.s_bar + st, big * window.y_bar + window.y, yt});
    const auto u = window_specular(field, regime, pts);
    Eigen::MatrixXd out(window.y_tilde.size(), window.s_tilde.size());
    const double pre = speckle_prefactor(regime);
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = pre * u[i * out.cols() + j];
    return out;
}

ProbeLayout speckle_layout(const ScaleRegime<double>& regime, const Eigen::Vector2d& y_bar, const Eigen::Vector2d& y,
                           const std::vector<double>& t1, const std::vector<double>& t2)
{
    require_speckle_regime(regime);
    const double big = std::pow(regime.epsilon, 0.5 - regime.gamma);
    const double ell = regime.ell();
    ProbeLayout layout;
    for (double t : t1) layout.y1.push_back(big * y_bar(0) + y(0) + ell * t);
    for (double t : t2) layout.y2.push_back(big * y_bar(1) + y(1) + ell * t);
    return layout;
}

double mollifier(double x, double width)
{
    if (!(width > 0)) throw std::invalid_argument("mollifier: width > 0 required");
    if (std::abs(x) > width / 2) return 0.0;
    return (1 + std::cos(2 * pi * x / width)) / width;
}

SpeckleOffsets speckle_offsets(Side side, const MediumConfig<double>& cfg, const Eigen::Vector2d& p)
{
    validate(cfg);
    const Leg leg = speckle_leg(side, cfg);
    SpeckleOffsets o;
    o.y = leg.z * cfg.speed(leg.medium) * paraxial_matrix(cfg, leg.medium) * p;
    o.s = p.dot(o.y) / 2;
    return o;
}

Eigen::Vector2d Ellipse::point(double angle) const
{
    return axes.col(0) * semi_axes(0) * std::cos(angle) + axes.col(1) * semi_axes(1) * std::sin(angle);
}

Ellipse ellipse_support(Side side, const MediumConfig<double>& cfg, double s_bar)
{
    if (!(s_bar >= 0)) throw std::invalid_argument("ellipse_support: s_bar >= 0 required");
    validate(cfg);
    const Leg leg = speckle_leg(side, cfg);
    const double c = cfg.speed(leg.medium);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(paraxial_matrix_inverse(cfg, leg.medium));
    Ellipse e;
    e.axes = es.eigenvectors();
    for (int i = 0; i < 2; ++i) e.semi_axes(i) = std::sqrt(2 * leg.z * c * s_bar / es.eigenvalues()(i));
    return e;
}

double scattering_slowness(Side side, const MediumConfig<double>& cfg)
{
    const double s0 = vertical_slowness(cfg, 0);
    return side == Side::Reflected ? 2 * s0 : s0 - vertical_slowness(cfg, 1);
}

Eigen::Vector2d SpeckleKernel::direction(const Eigen::Vector2d& y_bar) const
{
    const Leg leg = speckle_leg(side, cfg);
    return paraxial_matrix_inverse(cfg, leg.medium) * y_bar / (leg.z * cfg.speed(leg.medium));
}

double SpeckleKernel::support(const Eigen::Vector2d& y_bar) const
{
    const Leg leg = speckle_leg(side, cfg);
    return y_bar.dot(paraxial_matrix_inverse(cfg, leg.medium) * y_bar) / (2 * leg.z * cfg.speed(leg.medium));
}

double SpeckleKernel::integrated(const Eigen::Vector2d& y_bar, double s_tilde, const Eigen::Vector2d& y_tilde) const
{
    const Leg leg = speckle_leg(side, cfg);
    const double c = cfg.speed(leg.medium);
    const double sj = vertical_slowness(cfg, leg.medium);
    // Jacobian of p -> y_bar: det(A_j^{-1}) / (z c_j)^2 = c_j^2 s_j^4 / z^2.
    const double jac = c * c * std::pow(sj, 4) / (leg.z * leg.z);
    const double pre = leg.coefficient_sq * jac / std::pow(2 * pi, 3);
    const Eigen::Vector2d p = direction(y_bar);
    const double v = scattering_slowness(side, cfg);
    const double lo = std::max(profile.band_lo(), 1e-9), hi = profile.band_hi();
    const double h = (hi - lo) / (n_quad - 1);
    double acc = 0;
    for (int i = 0; i < n_quad; ++i) {
        const double w = lo + i * h;
        const double wt = (i == 0 || i == n_quad - 1) ? h / 2 : h;
        acc += wt * std::cos(w * (s_tilde - p.dot(y_tilde))) * profile.band_energy(w)
               * scattering_density_series(model, v, w, p) * w * w;
    }
    // The integrand is even in omega; the negative half doubles the positive one.
    return 2 * pre * acc;
}

double SpeckleKernel::operator()(double s_bar, const Eigen::Vector2d& y_bar, double s_tilde,
                                 const Eigen::Vector2d& y_tilde) const
{
    return mollifier(s_bar - support(y_bar), mollifier_width) * integrated(y_bar, s_tilde, y_tilde);
}

SpeckleKernel kernel_C(Side side, const MediumConfig<double>& cfg, const InterfaceModel& model,
                       const SourceProfile& profile, double mollifier_width, int n_quad)
{
    validate(cfg);
    validate(model);
    validate(profile);
    if (!(mollifier_width > 0)) throw std::invalid_argument("kernel_C: mollifier width > 0 required");
    if (n_quad < 16) throw std::invalid_argument("kernel_C: n_quad >= 16 required");
    SpeckleKernel k;
    k.side = side;
    k.cfg = cfg;
    k.model = model;
    k.profile = profile;
    k.mollifier_width = mollifier_width;
    k.n_quad = n_quad;
    return k;
}

void EnsembleAccumulator::add(const Eigen::VectorXd& x)
{
    if (n_ == 0) {
        sum_ = Eigen::VectorXd::Zero(x.size());
        sumsq_ = Eigen::VectorXd::Zero(x.size());
    } else if (x.size() != sum_.size()) {
        throw std::invalid_argument("EnsembleAccumulator: size mismatch");
    }
    sum_ += x;
    sumsq_ += x.cwiseAbs2();
    ++n_;
    if (keep_) samples_.push_back(x);
}

void EnsembleAccumulator::merge(const EnsembleAccumulator& other)
{
    if (other.n_ == 0) return;
    if (n_ == 0) {
        const bool keep = keep_;
        *this = other;
        keep_ = keep;
        if (!keep_) samples_.clear();
        return;
    }
    if (other.sum_.size() != sum_.size()) throw std::invalid_argument("EnsembleAccumulator: size mismatch");
    sum_ += other.sum_;
    sumsq_ += other.sumsq_;
    n_ += other.n_;
    if (keep_) samples_.insert(samples_.end(), other.samples_.begin(), other.samples_.end());
}

Eigen::VectorXd EnsembleAccumulator::mean() const
{
    if (n_ == 0) throw std::logic_error("EnsembleAccumulator: empty");
    return sum_ / double(n_);
}

Eigen::VectorXd EnsembleAccumulator::standard_error() const
{
    if (n_ < 2) throw std::logic_error("EnsembleAccumulator: need two samples");
    const Eigen::VectorXd m = mean();
    const Eigen::VectorXd var = ((sumsq_ / double(n_)) - m.cwiseAbs2()).cwiseMax(0.0) * (double(n_) / (n_ - 1));
    return (var / double(n_)).cwiseSqrt();
}

std::vector<Eigen::VectorXd> integrated_correlation(const ProbeField& field, const ScaleRegime<double>& regime,
                                                    const std::vector<CorrelationCut>& cuts)
{
    require_speckle_regime(regime);
    const int n1 = static_cast<int>(field.layout.y1.size());
    const int n2 = static_cast<int>(field.layout.y2.size());
    const auto& om = field.omega;
    const double pre = speckle_prefactor(regime);
    std::vector<Eigen::VectorXd> out;
    for (const auto& cut : cuts) {
        if (std::abs(cut.k1) >= n1 || std::abs(cut.k2) >= n2)
            throw std::invalid_argument("integrated_correlation: offset exceeds the probe grid");
        // Pair-averaged cross spectrum conj(W_1) W_2 at the offset.
        Eigen::VectorXcd x = Eigen::VectorXcd::Zero(om.n);
        int pairs = 0;
        for (int a = std::max(0, -cut.k1); a < std::min(n1, n1 - cut.k1); ++a)
            for (int b = std::max(0, -cut.k2); b < std::min(n2, n2 - cut.k2); ++b) {
                const int i = a * n2 + b, j = (a + cut.k1) * n2 + (b + cut.k2);
                x += (field.spectrum.row(i).conjugate().cwiseProduct(field.spectrum.row(j))).transpose();
                ++pairs;
            }
        x /= double(pairs);
        Eigen::VectorXd v(cut.ds.size());
        for (size_t k = 0; k < cut.ds.size(); ++k) {
            cplx acc = 0;
            for (int m = 1; m < om.n; ++m) acc += x(m) * std::exp(cplx(0, -om.omega(m) * cut.ds[k]));
            v(k) = pre * acc.real() * om.d_omega / (2 * pi);
        }
        out.push_back(v);
    }
    return out;
}

Eigen::VectorXd probe_intensity(const ProbeField& field, const std::vector<double>& s)
{
    const Eigen::MatrixXd u = probe_time_samples(field, s);
    return u.cwiseAbs2().colwise().mean().transpose();
}

Eigen::MatrixXd homogenized_specular_prediction(Side side, const SourceProfile& profile,
                                                const MediumConfig<double>& cfg, const InterfaceModel& model,
                                                const LateralGrid& lat, const std::vector<double>& s, int n_quad)
{
    const double tau = screen_slowness(side, cfg);
    return flat_specular_closed_form(profile, cfg, side, lat, s, n_quad,
                                     [&](double w) { return characteristic_function(model, w * tau).real(); });
}

std::vector<double> homogenized_specular_at(Side side, const SourceProfile& profile, const MediumConfig<double>& cfg,
                                            const InterfaceModel& model, const std::vector<FramePoint>& points,
                                            int n_quad)
{
    const double tau = screen_slowness(side, cfg);
    return flat_specular_at(profile, cfg, side, points, n_quad,
                            [&](double w) { return characteristic_function(model, w * tau).real(); });
}

std::vector<double> homogenized_specular_by_convolution(Side side, const SourceProfile& profile,
                                                        const MediumConfig<double>& cfg, const InterfaceModel& model,
                                                        const std::vector<FramePoint>& points, int n_nodes,
                                                        int n_quad)
{
    validate(model);
    if (n_nodes < 3) throw std::invalid_argument("homogenized_specular_by_convolution: n_nodes >= 3 required");
    const double tau = std::abs(screen_slowness(side, cfg));
    std::vector<double> out(points.size(), 0.0);
    if (model.sigma_v == 0) return flat_specular_at(profile, cfg, side, points, n_quad);
    // Phi(s') = f_V(s' / tau) / tau, integrated by the trapezoid rule over +-12 standard deviations.
    const double half = 12 * model.sigma_v * tau;
    const double h = 2 * half / (n_nodes - 1);
    std::vector<FramePoint> shifted(points.size());
    for (int k = 0; k < n_nodes; ++k) {
        const double sp = -half + k * h;
        const double wt = ((k == 0 || k == n_nodes - 1) ? h / 2 : h) * pulse_shaping_kernel(model, tau / 2, sp);
        for (size_t i = 0; i < points.size(); ++i) shifted[i] = {points[i].s - sp, points[i].Y};
        const auto f = flat_specular_at(profile, cfg, side, shifted, n_quad);
        for (size_t i = 0; i < points.size(); ++i) out[i] += wt * f[i];
    }
    return out;
}

cplx damping_projection(const ProbeField& field, const ProbeField& flat, int m)
{
    if (field.spectrum.rows() != flat.spectrum.rows() || m < 0 || m >= field.spectrum.cols())
        throw std::invalid_argument("damping_projection: incompatible fields");
    const cplx num = flat.spectrum.col(m).dot(field.spectrum.col(m));
    const double den = flat.spectrum.col(m).squaredNorm();
    if (!(den > 0)) throw std::invalid_argument("damping_projection: flat slice is zero");
    return num / den;
}

} // namespace roughscatter
