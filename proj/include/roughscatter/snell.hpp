#pragma once

#include "roughscatter/medium.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace roughscatter {

enum class Side { Reflected, Transmitted };

template <typename Scalar = double>
struct SnellQuery {
    Side side{Side::Reflected};
    Vector2<Scalar> p{Vector2<Scalar>::Zero()};
    /// eps^(1-gamma)
    Scalar roughness{Scalar(0.1)};
    MediumConfig<Scalar> cfg{};
};

/// Thrown when the generalized law yields |sin(theta)| >= 1.
struct NoPropagatingAngle : std::domain_error {
    using std::domain_error::domain_error;
};

template <typename Scalar>
Scalar xi_factor(const SnellQuery<Scalar>& q)
{
    const Scalar sin_inc = q.cfg.c0 * q.cfg.k0.norm();
    if (!(sin_inc > 0)) throw std::domain_error("xi_factor: requires k0 != 0 (use normal_incidence_angle)");
    return q.roughness * q.cfg.c0 * q.cfg.c0 / (sin_inc * sin_inc);
}

namespace detail {

template <typename Scalar>
Scalar reference_angle(const SnellQuery<Scalar>& q)
{
    const auto g = observation_geometry(q.cfg);
    return q.side == Side::Reflected ? g.theta_inc : g.theta_tr0;
}

/// Xi(p) with the cosine of the reference angle and xi from the incident angle.
template <typename Scalar>
Scalar big_xi(const SnellQuery<Scalar>& q)
{
    using std::cos;
    const Scalar xi = xi_factor(q);
    const Scalar c = cos(reference_angle(q));
    const Vector2<Scalar> kp(-q.cfg.k0(1), q.cfg.k0(0));
    const Scalar a = 1 + xi * q.p.dot(q.cfg.k0) / (c * c);
    const Scalar b = xi * q.p.dot(kp);
    return a * a + b * b;
}

} // namespace detail

/// Speckle modulation factor C(p): sin(theta(p)) / sin(theta_0) - 1.
template <typename Scalar>
Scalar modulation_factor(const SnellQuery<Scalar>& q)
{
    using std::sin;
    using std::sqrt;
    const Scalar X = detail::big_xi(q);
    const Scalar s = sin(detail::reference_angle(q));
    return sqrt(X / (1 + s * s * (X - 1))) - 1;
}

/// Angle from the sine form of the generalized law.
template <typename Scalar>
Scalar generalized_angle_sine_form(const SnellQuery<Scalar>& q)
{
    using std::asin;
    const Scalar kn = q.cfg.k0.norm();
    const Scalar c = q.side == Side::Reflected ? q.cfg.c0 : q.cfg.c1;
    // sin(theta)/c = |k0| + |k0| C(p)
    const Scalar sn = c * (kn + kn * modulation_factor(q));
    if (!(sn < 1)) throw NoPropagatingAngle("generalized_angle: sine >= 1");
    return asin(sn);
}

/// Angle from the tangent-ratio form, tan(theta) = tan(theta_0) sqrt(Xi).
template <typename Scalar>
Scalar generalized_angle_tangent_form(const SnellQuery<Scalar>& q)
{
    using std::atan;
    using std::sqrt;
    using std::tan;
    return atan(tan(detail::reference_angle(q)) * sqrt(detail::big_xi(q)));
}

template <typename Scalar>
Scalar generalized_angle(const SnellQuery<Scalar>& q)
{
    using std::abs;
    const Scalar a = generalized_angle_sine_form(q);
    const Scalar b = generalized_angle_tangent_form(q);
    if (abs(a - b) > Scalar(1e-9)) throw std::logic_error("generalized_angle: sine and tangent forms disagree");
    return a;
}

template <typename Scalar>
Scalar normal_incidence_angle(Side side, const MediumConfig<Scalar>& cfg, const Vector2<Scalar>& p, Scalar roughness)
{
    using std::atan;
    if (cfg.k0.norm() != 0) throw std::domain_error("normal_incidence_angle: requires k0 = 0");
    const Scalar c = side == Side::Reflected ? cfg.c0 : cfg.c1;
    return atan(roughness * c * p.norm());
}

/// First-order coefficient convention for the small-roughness expansion.
enum class ExpansionCoefficient {
    /// Linearization of the exact law: dtheta = r c_j (p.k0hat) / cos(theta_0).
    Consistent,
    /// Coefficient r c_j (p.k0hat) / cos^3(theta_0).
    CosineCubed
};

template <typename Scalar>
Scalar small_roughness_angle(const SnellQuery<Scalar>& q, ExpansionCoefficient coef = ExpansionCoefficient::Consistent)
{
    using std::cos;
    const Scalar kn = q.cfg.k0.norm();
    if (!(kn > 0)) throw std::domain_error("small_roughness_angle: requires k0 != 0");
    const Scalar th0 = detail::reference_angle(q);
    const Scalar c = q.side == Side::Reflected ? q.cfg.c0 : q.cfg.c1;
    const Scalar ct = cos(th0);
    const Scalar denom = coef == ExpansionCoefficient::Consistent ? ct : ct * ct * ct;
    return th0 + q.roughness * c * q.p.dot(q.cfg.k0 / kn) / denom;
}

template <typename Scalar>
struct ExpansionReport {
    Scalar theta_exact;
    Scalar theta_approx;
    Scalar error;
    /// error / (r^2 |p|^2)
    Scalar ratio;
};

template <typename Scalar>
ExpansionReport<Scalar> small_roughness_expansion(const SnellQuery<Scalar>& q,
                                                  ExpansionCoefficient coef = ExpansionCoefficient::Consistent)
{
    using std::abs;
    ExpansionReport<Scalar> r;
    r.theta_exact = generalized_angle(q);
    r.theta_approx = small_roughness_angle(q, coef);
    r.error = abs(r.theta_exact - r.theta_approx);
    const Scalar scale = q.roughness * q.roughness * q.p.squaredNorm();
    r.ratio = scale > 0 ? r.error / scale : Scalar(0);
    return r;
}

template <typename Scalar>
Scalar grating_equation(Scalar lambda, Scalar d, Scalar theta_inc, Scalar m)
{
    using std::asin;
    using std::abs;
    using std::sin;
    const Scalar s = sin(theta_inc) + m * lambda / d;
    if (!(abs(s) <= 1)) throw std::domain_error("grating_equation: evanescent diffraction order");
    return asin(s);
}

/// Grating order equivalent to a scattering slowness p in the smooth limit (d -> correlation length).
template <typename Scalar>
Scalar equivalent_grating_order(const MediumConfig<Scalar>& cfg, const Vector2<Scalar>& p)
{
    return cfg.c0 * p.dot(cfg.k0 / cfg.k0.norm());
}

template <typename Scalar>
constexpr Scalar degrees(Scalar rad) { return rad * Scalar(180) / std::numbers::pi_v<Scalar>; }

} // namespace roughscatter
