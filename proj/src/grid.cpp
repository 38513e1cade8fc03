#include "roughscatter/grid.hpp"

#include "roughscatter/fft.hpp"

namespace roughscatter {

Frame make_frame(FrameKind kind, const MediumConfig<double>& cfg, double epsilon)
{
    Frame f;
    f.kind = kind;
    f.k0 = cfg.k0;
    f.epsilon = epsilon;
    if (kind == FrameKind::Lab) return f;
    const auto g = observation_geometry(cfg);
    if (kind == FrameKind::Reflected) {
        f.x_obs = g.x_obs_ref;
        f.t_obs = g.t_obs_ref;
    } else {
        f.x_obs = g.x_obs_tr;
        f.t_obs = g.t_obs_tr;
    }
    return f;
}

LabPoint to_lab(const Frame& f, const FramePoint& p)
{
    const double se = std::sqrt(f.epsilon);
    return {f.t_obs + se * f.k0.dot(p.Y) + f.epsilon * p.s, f.x_obs + se * p.Y};
}

FramePoint to_frame(const Frame& f, const LabPoint& p)
{
    const double se = std::sqrt(f.epsilon);
    FramePoint r;
    r.Y = (p.x - f.x_obs) / se;
    r.s = (p.t - f.t_obs - se * f.k0.dot(r.Y)) / f.epsilon;
    return r;
}

namespace {

void require_even(const OmegaGrid& omega)
{
    if (omega.n <= 0 || omega.n % 2 != 0) throw std::invalid_argument("OmegaGrid: n must be positive and even");
}

} // namespace

// With omega_m s_j = 2 pi (m - n/2)(j - n/2) / n, the centered transforms reduce to plain DFTs of
// sign-alternated sequences; (-1)^(n/2) is the residual constant phase.
Eigen::MatrixXd spectrum_to_time(const Eigen::MatrixXcd& spectrum, const OmegaGrid& omega)
{
    require_even(omega);
    const int n = omega.n;
    const int rows = static_cast<int>(spectrum.rows());
    if (spectrum.cols() != n) throw std::invalid_argument("spectrum_to_time: column count != omega.n");
    Eigen::MatrixXcd buf = spectrum;
    for (int m = 1; m < n; m += 2) buf.col(m) *= -1.0;
    FftBatch1d plan(n, rows, rows, 1);
    plan.forward(buf.data());
    const double global = ((n / 2) % 2 ? -1.0 : 1.0) / (n * omega.ds());
    Eigen::MatrixXd out(rows, n);
    for (int j = 0; j < n; ++j) {
        const double sign = (j % 2 ? -global : global);
        out.col(j) = buf.col(j).real() * sign;
    }
    return out;
}

Eigen::MatrixXcd time_to_spectrum(const Eigen::MatrixXd& samples, const OmegaGrid& omega)
{
    require_even(omega);
    const int n = omega.n;
    const int rows = static_cast<int>(samples.rows());
    if (samples.cols() != n) throw std::invalid_argument("time_to_spectrum: column count != omega.n");
    Eigen::MatrixXcd buf = samples.cast<cplx>();
    for (int j = 1; j < n; j += 2) buf.col(j) *= -1.0;
    FftBatch1d plan(n, rows, rows, 1);
    plan.backward(buf.data());
    const double global = ((n / 2) % 2 ? -1.0 : 1.0) * omega.ds();
    for (int m = 0; m < n; ++m) buf.col(m) *= (m % 2 ? -global : global);
    return buf;
}

Eigen::MatrixXd WaveField::time_domain() const { return spectrum_to_time(spectrum, omega); }

double WaveField::l2_norm() const
{
    // Parseval: sum_j |u_j|^2 ds = (d_omega / 2pi) sum_m |W_m|^2
    const double s = spectrum.squaredNorm() * omega.d_omega / (2 * std::numbers::pi) * lateral.cell_area();
    return std::sqrt(s);
}

} // namespace roughscatter
