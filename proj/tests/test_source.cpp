#include <doctest.h>

#include "roughscatter/source.hpp"

#include <cmath>

using namespace roughscatter;

namespace {

MediumConfig<double> anchor()
{
    MediumConfig<double> cfg;
    cfg.c0 = 1.5;
    cfg.c1 = 1.0;
    cfg.k0 = {0.3, 0.0};
    cfg.z_int = 0.5;
    cfg.z_tr = 1.0;
    return cfg;
}

} // namespace

TEST_CASE("temporal spectrum matches direct quadrature")
{
    const auto p = make_default_profile(2 * M_PI, 1.0, 0.5);
    for (double w : {0.0, 3.0, 2 * M_PI, 8.5}) {
        // trapezoid of int e^{i w s} psi(s) ds over [-20, 20]
        const int n = 40000;
        const double h = 40.0 / n;
        double re = 0;
        for (int j = 0; j <= n; ++j) {
            const double s = -20 + j * h;
            re += (j == 0 || j == n ? 0.5 : 1.0) * std::cos(w * s) * p.temporal(s);
        }
        CHECK(p.temporal_spectrum(w) == doctest::Approx(re * h).epsilon(1e-10));
    }
    CHECK(p.lateral_spectrum(Eigen::Vector2d(0, 0)) == doctest::Approx(2 * M_PI * 0.25));
}

TEST_CASE("validation")
{
    CHECK_THROWS_AS(make_default_profile(2.0, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(make_default_profile(2 * M_PI, 0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(make_default_profile(2 * M_PI, 1.0, -1.0), std::invalid_argument);
    CHECK_NOTHROW(make_default_profile(3.01, 1.0, 0.5));
}

TEST_CASE("declared band and q_max")
{
    const auto p = make_default_profile(2 * M_PI, 1.0, 0.5);
    CHECK(p.band_halfwidth_sigmas() == doctest::Approx(6.0697085175405854).epsilon(1e-14));
    CHECK(p.q_max() == doctest::Approx(7.4754638474661784).epsilon(1e-6));
    const auto narrow = make_default_profile(1.0, 0.15, 2.0);
    CHECK(narrow.q_max() == doctest::Approx(7.3375608597418062).epsilon(1e-6));

    const auto ok = propagating_mode_check(p, anchor(), 1e-3);
    CHECK(ok.ok);
    CHECK(ok.margin == doctest::Approx(1 - (std::sqrt(1e-3) * 1.5 * 7.4754638474661784 + 0.45)).epsilon(1e-6));
    // A narrow beam excites lateral modes beyond the propagating cone.
    const auto thin = make_default_profile(2 * M_PI, 1.0, 0.05);
    CHECK_FALSE(propagating_mode_check(thin, anchor(), 1e-3).ok);
}

TEST_CASE("band energy: analytic and sampled routes agree")
{
    const auto p = make_default_profile(2 * M_PI, 1.0, 0.5);
    const LateralGrid lat{64, 64, 0.1, 0.1};
    const OmegaGrid om{64, 0.39};
    const Eigen::MatrixXd x = sample(p, lat, om);
    const Eigen::VectorXd e = band_energy_sampled(x, lat, om);
    const double peak = p.band_energy(p.omega_c);
    int argmax = 0;
    e.tail(om.n / 2).maxCoeff(&argmax);
    CHECK(std::abs(om.omega(argmax + om.n / 2) - 2 * M_PI) <= om.d_omega);
    for (int m = 0; m < om.n; ++m)
        CHECK(std::abs(e(m) - p.band_energy(om.omega(m))) <= 1e-10 * peak);
    // Riemann sum of the sampled profile against the closed-form norm
    CHECK(x.squaredNorm() * lat.cell_area() * om.ds() == doctest::Approx(p.l2_norm_squared()).epsilon(1e-10));
}

TEST_CASE("scaled transform round trip and symmetry")
{
    const auto p = make_default_profile(2 * M_PI, 1.0, 0.5);
    const LateralGrid lat{64, 64, 0.2, 0.2};
    const OmegaGrid om{64, 0.39};
    const Eigen::MatrixXd x = sample(p, lat, om);
    const ScaledSpectrum spec = scaled_forward(x, lat, om);
    const Eigen::MatrixXd back = scaled_inverse(spec);
    CHECK((back - x).cwiseAbs().maxCoeff() <= 1e-8 * x.cwiseAbs().maxCoeff());
    CHECK(hermitian_defect(spec) <= 1e-12);

    // Spot values against the closed-form spectrum T(omega) L(kappa).
    for (int m : {40, 48, 50}) {
        const double w = om.omega(m);
        for (int k1 : {0, 1, 63}) {
            const Eigen::Vector2d kap(lat.wavenumber1(k1), lat.wavenumber2(2));
            const cplx v = spec.values(lat.index(k1, 2), m);
            const double ref = p.temporal_spectrum(w) * p.lateral_spectrum(kap);
            CHECK(std::abs(v - ref) <= 1e-9 * p.temporal_spectrum(p.omega_c) * p.lateral_spectrum(Eigen::Vector2d::Zero()));
        }
    }
}
