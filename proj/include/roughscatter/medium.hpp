#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>

namespace roughscatter {

template <typename Scalar> using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar> using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

/// Two homogeneous half-spaces separated by a (mean) flat interface at depth z_int.
template <typename Scalar = double>
struct MediumConfig {
    Scalar c0{1.5};
    Scalar c1{1};
    Scalar z_int{1};
    Scalar z_tr{2};
    Vector2<Scalar> k0{Vector2<Scalar>::Zero()};

    Scalar speed(int j) const { return j == 0 ? c0 : c1; }
};

/// Throws std::invalid_argument naming the first violated invariant.
template <typename Scalar>
void validate(const MediumConfig<Scalar>& cfg)
{
    using std::isfinite;
    if (!(isfinite(cfg.c0) && isfinite(cfg.c1) && isfinite(cfg.z_int) && isfinite(cfg.z_tr)
          && isfinite(cfg.k0(0)) && isfinite(cfg.k0(1))))
        throw std::invalid_argument("medium: all parameters must be finite");
    if (!(cfg.c0 > 0)) throw std::invalid_argument("medium: c0 > 0 violated");
    if (!(cfg.c1 > 0)) throw std::invalid_argument("medium: c1 > 0 violated");
    if (!(cfg.c1 < cfg.c0)) throw std::invalid_argument("medium: c1 < c0 violated");
    if (!(cfg.k0.norm() * cfg.c0 < 1)) throw std::invalid_argument("medium: |k0| < 1/c0 violated");
    if (!(cfg.z_int > 0)) throw std::invalid_argument("medium: z_int > 0 violated");
    if (!(cfg.z_int < cfg.z_tr)) throw std::invalid_argument("medium: z_int < z_tr violated");
}

/// Scale parameters: beam width sqrt(eps), elevation amplitude eps, correlation length eps^gamma.
template <typename Scalar = double>
struct ScaleRegime {
    Scalar epsilon{1e-3};
    Scalar gamma{0.75};

    Scalar beam_width() const { using std::sqrt; return sqrt(epsilon); }
    Scalar amplitude() const { return epsilon; }
    Scalar correlation_length() const { using std::pow; return pow(epsilon, gamma); }
    /// eps^(1-gamma), the ratio wavelength / correlation length.
    Scalar roughness_ratio() const { using std::pow; return pow(epsilon, Scalar(1) - gamma); }
    /// Correlation length measured in beam widths, eps^(gamma-1/2).
    Scalar ell() const { using std::pow; return pow(epsilon, gamma - Scalar(0.5)); }
};

template <typename Scalar>
void validate(const ScaleRegime<Scalar>& r)
{
    if (!(r.epsilon > 0 && r.epsilon < 1)) throw std::invalid_argument("regime: epsilon in (0,1) violated");
    if (!(r.gamma >= Scalar(0.5) && r.gamma <= 1)) throw std::invalid_argument("regime: gamma in [1/2,1] violated");
}

template <typename Scalar>
Scalar vertical_slowness(const MediumConfig<Scalar>& cfg, int j)
{
    using std::sqrt;
    const Scalar c = cfg.speed(j);
    const Scalar x = c * c * cfg.k0.squaredNorm();
    if (!(x < 1)) throw std::domain_error("vertical_slowness: critical or evanescent incidence in medium " + std::to_string(j));
    return sqrt(1 - x) / c;
}

/// Finite-eps vertical slowness of the lateral mode k (unscaled wavenumber units).
template <typename Scalar>
Scalar vertical_slowness_eps(const MediumConfig<Scalar>& cfg, int j, const Vector2<Scalar>& k, Scalar eps)
{
    using std::sqrt;
    const Scalar c = cfg.speed(j);
    const Scalar x = eps * c * c * k.squaredNorm();
    if (!(x < 1)) throw std::domain_error("vertical_slowness_eps: evanescent mode");
    return sqrt(1 - x) / c;
}

/// Three-term expansion of eps * slowness_eps(q + k0/sqrt(eps)) divided by eps:
/// s/eps - k0.q/(sqrt(eps) s) - c q^T A q / 2. Returns the remainder (exact minus expansion), times eps.
template <typename Scalar>
Scalar slowness_expansion_remainder(const MediumConfig<Scalar>& cfg, int j, const Vector2<Scalar>& q, Scalar eps);

template <typename Scalar>
Matrix2<Scalar> paraxial_matrix_first_form(const MediumConfig<Scalar>& cfg, int j)
{
    using std::pow;
    const Scalar c = cfg.speed(j);
    const Scalar c2 = c * c;
    const Scalar x = c2 * cfg.k0.squaredNorm();
    if (!(x < 1)) throw std::domain_error("paraxial_matrix: critical incidence in medium " + std::to_string(j));
    const Scalar k1 = cfg.k0(0), k2 = cfg.k0(1);
    Matrix2<Scalar> m;
    m << 1 - c2 * k2 * k2, c2 * k1 * k2,
         c2 * k1 * k2, 1 - c2 * k1 * k1;
    return m * pow(1 - x, Scalar(-1.5));
}

template <typename Scalar>
Matrix2<Scalar> paraxial_matrix_second_form(const MediumConfig<Scalar>& cfg, int j)
{
    const Scalar c = cfg.speed(j);
    const Scalar s = vertical_slowness(cfg, j);
    Vector2<Scalar> kp(-cfg.k0(1), cfg.k0(0));
    Matrix2<Scalar> m = Matrix2<Scalar>::Identity() - c * c * kp * kp.transpose();
    return m / (c * c * c * s * s * s);
}

/// A_j. Both closed forms are evaluated and required to agree.
template <typename Scalar>
Matrix2<Scalar> paraxial_matrix(const MediumConfig<Scalar>& cfg, int j)
{
    const Matrix2<Scalar> a = paraxial_matrix_first_form(cfg, j);
    const Matrix2<Scalar> b = paraxial_matrix_second_form(cfg, j);
    const Scalar tol = Scalar(1e-12) * (std::is_same_v<Scalar, float> ? Scalar(1e6) : Scalar(1));
    if ((a - b).norm() > tol * a.norm())
        throw std::logic_error("paraxial_matrix: closed forms disagree");
    return (a + b) / Scalar(2);
}

template <typename Scalar>
Matrix2<Scalar> paraxial_matrix_inverse(const MediumConfig<Scalar>& cfg, int j)
{
    const Scalar c = cfg.speed(j);
    const Scalar s = vertical_slowness(cfg, j);
    return c * s * (Matrix2<Scalar>::Identity() - c * c * cfg.k0 * cfg.k0.transpose());
}

template <typename Scalar>
struct Coefficients {
    Scalar R;
    Scalar T;
};

template <typename Scalar>
Coefficients<Scalar> reflection_transmission_coefficients(const MediumConfig<Scalar>& cfg)
{
    using std::sqrt;
    const Scalar s0 = vertical_slowness(cfg, 0);
    const Scalar s1 = vertical_slowness(cfg, 1);
    return {(s0 - s1) / (s0 + s1), 2 * sqrt(s0 * s1) / (s0 + s1)};
}

/// Ratios (a_tr / a_0, b_ref / a_0) of the flat-interface mode problem at lateral wavenumber k.
template <typename Scalar>
struct ModeScattering {
    Scalar tr;
    Scalar ref;
};

template <typename Scalar>
ModeScattering<Scalar> flat_mode_scattering(const MediumConfig<Scalar>& cfg, const Vector2<Scalar>& k, Scalar eps)
{
    using std::sqrt;
    const Scalar s0 = vertical_slowness_eps(cfg, 0, k, eps);
    const Scalar s1 = vertical_slowness_eps(cfg, 1, k, eps);
    const Scalar r = sqrt(s0 / s1);
    const Scalar tp = (r + 1 / r) / 2;
    const Scalar tm = (r - 1 / r) / 2;
    return {1 / tp, tm / tp};
}

template <typename Scalar>
struct ObservationGeometry {
    Vector2<Scalar> x_int;
    Vector2<Scalar> x_obs_ref;
    Scalar t_obs_ref;
    Vector2<Scalar> x_obs_tr;
    Scalar t_obs_tr;
    Scalar theta_inc;
    Scalar theta_ref0;
    Scalar theta_tr0;
};

template <typename Scalar>
ObservationGeometry<Scalar> observation_geometry(const MediumConfig<Scalar>& cfg)
{
    using std::atan;
    const Scalar s0 = vertical_slowness(cfg, 0);
    const Scalar s1 = vertical_slowness(cfg, 1);
    const Scalar kn = cfg.k0.norm();
    ObservationGeometry<Scalar> g;
    g.x_int = cfg.k0 * cfg.z_int / s0;
    g.x_obs_ref = 2 * g.x_int;
    g.t_obs_ref = 2 * cfg.z_int / (cfg.c0 * cfg.c0 * s0);
    g.x_obs_tr = g.x_int + cfg.k0 * (cfg.z_tr - cfg.z_int) / s1;
    g.t_obs_tr = cfg.z_int / (cfg.c0 * cfg.c0 * s0) + (cfg.z_tr - cfg.z_int) / (cfg.c1 * cfg.c1 * s1);
    g.theta_inc = atan(kn / s0);
    g.theta_ref0 = g.theta_inc;
    g.theta_tr0 = atan(kn / s1);
    return g;
}

template <typename Scalar>
Scalar slowness_expansion_remainder(const MediumConfig<Scalar>& cfg, int j, const Vector2<Scalar>& q, Scalar eps)
{
    using std::sqrt;
    const Scalar se = sqrt(eps);
    const Scalar c = cfg.speed(j);
    const Scalar s = vertical_slowness(cfg, j);
    const Vector2<Scalar> k = q + cfg.k0 / se;
    const Scalar exact = vertical_slowness_eps(cfg, j, k, eps);
    // exact = s - sqrt(eps) k0.q / s - eps c q^T A q / 2 + O(eps^{3/2})
    const Scalar three = s - se * cfg.k0.dot(q) / s
                         - eps * c * q.dot(paraxial_matrix(cfg, j) * q) / 2;
    return (exact - three) / eps;
}

} // namespace roughscatter
