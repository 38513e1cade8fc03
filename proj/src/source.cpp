#include "roughscatter/source.hpp"

#include "roughscatter/fft.hpp"

#include <algorithm>
#include <cmath>

namespace roughscatter {

namespace {

constexpr double pi = std::numbers::pi;

double gauss(double x) { return std::exp(-0.5 * x * x); }

/// Multiplies entry (k1, k2) of a row-major lateral array by (-1)^(k1 + k2).
void checkerboard(cplx* data, const LateralGrid& lat)
{
    for (int i1 = 0; i1 < lat.n1; ++i1)
        for (int i2 = (i1 + 1) % 2; i2 < lat.n2; i2 += 2) data[lat.index(i1, i2)] = -data[lat.index(i1, i2)];
}

} // namespace

double SourceProfile::temporal(double s) const
{
    return std::cos(omega_c * s) * gauss(s * bandwidth);
}

double SourceProfile::lateral(const Eigen::Vector2d& y) const
{
    return std::exp(-y.squaredNorm() / (2 * beam_width * beam_width));
}

double SourceProfile::temporal_spectrum(double omega) const
{
    const double a = std::sqrt(2 * pi) / (2 * bandwidth);
    return a * (gauss((omega - omega_c) / bandwidth) + gauss((omega + omega_c) / bandwidth));
}

double SourceProfile::lateral_spectrum(const Eigen::Vector2d& kappa) const
{
    const double w2 = beam_width * beam_width;
    return 2 * pi * w2 * std::exp(-kappa.squaredNorm() * w2 / 2);
}

double SourceProfile::spectrum(double omega, const Eigen::Vector2d& q) const
{
    return temporal_spectrum(omega) * lateral_spectrum(omega * q);
}

double SourceProfile::band_halfwidth_sigmas() const { return std::sqrt(-2 * std::log(threshold)); }
double SourceProfile::band_lo() const { return std::max(0.0, omega_c - band_halfwidth_sigmas() * bandwidth); }
double SourceProfile::band_hi() const { return omega_c + band_halfwidth_sigmas() * bandwidth; }

double SourceProfile::q_max() const
{
    const double h = band_halfwidth_sigmas();
    const double lo = std::max(band_lo(), 1e-12);
    const double hi = band_hi();
    const int n = 20000;
    double best = 0;
    for (int i = 0; i <= n; ++i) {
        const double w = lo + (hi - lo) * i / n;
        const double r = h * h - std::pow((w - omega_c) / bandwidth, 2);
        if (r > 0) best = std::max(best, std::sqrt(r) / (w * beam_width));
    }
    return best;
}

double SourceProfile::band_energy(double omega) const
{
    const double t = temporal_spectrum(omega);
    return t * t * pi * beam_width * beam_width;
}

double SourceProfile::l2_norm_squared() const
{
    const double time = std::sqrt(pi) / bandwidth * 0.5 * (1 + std::exp(-omega_c * omega_c / (bandwidth * bandwidth)));
    return time * pi * beam_width * beam_width;
}

void validate(const SourceProfile& p)
{
    if (!(p.bandwidth > 0)) throw std::invalid_argument("source: bandwidth > 0 violated");
    if (!(p.beam_width > 0)) throw std::invalid_argument("source: beam_width > 0 violated");
    if (!(p.threshold > 0 && p.threshold < 1)) throw std::invalid_argument("source: threshold in (0,1) violated");
    if (!(p.omega_c > 3 * p.bandwidth)) throw std::invalid_argument("source: omega_c > 3 sigma violated");
}

SourceProfile make_default_profile(double omega_c, double bandwidth, double beam_width)
{
    SourceProfile p;
    p.omega_c = omega_c;
    p.bandwidth = bandwidth;
    p.beam_width = beam_width;
    validate(p);
    return p;
}

Eigen::MatrixXd sample(const SourceProfile& p, const LateralGrid& lat, const OmegaGrid& omega)
{
    Eigen::VectorXd t(omega.n);
    for (int j = 0; j < omega.n; ++j) t(j) = p.temporal(omega.s(j));
    Eigen::VectorXd l(lat.size());
    for (int i1 = 0; i1 < lat.n1; ++i1)
        for (int i2 = 0; i2 < lat.n2; ++i2) l(lat.index(i1, i2)) = p.lateral(lat.point(i1, i2));
    return l * t.transpose();
}

Eigen::VectorXd band_energy_sampled(const Eigen::MatrixXd& samples, const LateralGrid& lat, const OmegaGrid& omega)
{
    const Eigen::MatrixXcd w = time_to_spectrum(samples, omega);
    return w.colwise().squaredNorm().transpose() * lat.cell_area();
}

PropagatingCheck propagating_mode_check(const SourceProfile& p, const MediumConfig<double>& cfg, double epsilon)
{
    const double margin = 1 - (std::sqrt(epsilon) * cfg.c0 * p.q_max() + cfg.c0 * cfg.k0.norm());
    return {margin > 0, margin};
}

ScaledSpectrum scaled_forward(const Eigen::MatrixXd& samples, const LateralGrid& lat, const OmegaGrid& omega)
{
    if (samples.rows() != lat.size()) throw std::invalid_argument("scaled_forward: lateral size mismatch");
    ScaledSpectrum out{lat, omega, time_to_spectrum(samples, omega)};
    Fft2d fft(lat.n1, lat.n2);
    for (int m = 0; m < omega.n; ++m) {
        cplx* col = out.values.col(m).data();
        fft.forward(col);
        checkerboard(col, lat);
    }
    out.values *= lat.cell_area();
    return out;
}

Eigen::MatrixXd scaled_inverse(const ScaledSpectrum& spec)
{
    const auto& lat = spec.lateral;
    const double dk1 = 2 * pi / (lat.n1 * lat.d1);
    const double dk2 = 2 * pi / (lat.n2 * lat.d2);
    Eigen::MatrixXcd buf = spec.values;
    Fft2d fft(lat.n1, lat.n2);
    for (int m = 0; m < spec.omega.n; ++m) {
        const double w = spec.omega.omega(m);
        // d(kappa) = omega^2 dq on each slice; at omega = 0 the weight is the kappa cell itself.
        const double weight = w != 0 ? w * w * (dk1 / std::abs(w)) * (dk2 / std::abs(w)) : dk1 * dk2;
        cplx* col = buf.col(m).data();
        checkerboard(col, lat);
        fft.backward(col);
        buf.col(m) *= weight / (4 * pi * pi);
    }
    return spectrum_to_time(buf, spec.omega);
}

double hermitian_defect(const ScaledSpectrum& spec)
{
    const int n = spec.omega.n;
    const double scale = spec.values.cwiseAbs().maxCoeff();
    if (scale == 0) return 0;
    const auto& lat = spec.lateral;
    double worst = 0;
    for (int m = 1; m < n; ++m) {
        const int mm = n - m;
        for (int k1 = 0; k1 < lat.n1; ++k1)
            for (int k2 = 0; k2 < lat.n2; ++k2) {
                // Same q at -omega means kappa = omega q changes sign.
                const int j = lat.index((lat.n1 - k1) % lat.n1, (lat.n2 - k2) % lat.n2);
                const int i = lat.index(k1, k2);
                worst = std::max(worst, std::abs(spec.values(j, mm) - std::conj(spec.values(i, m))));
            }
    }
    return worst / scale;
}

} // namespace roughscatter
