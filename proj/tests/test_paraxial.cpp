#include <doctest.h>

#include "roughscatter/paraxial.hpp"

#include <cmath>
#include <random>

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

SourceProfile default_source() { return make_default_profile(2 * M_PI, 1.0, 0.5); }

/// Narrower band, so that a 64-point omega grid keeps the time period well above the pulse spread.
SourceProfile anchor_source() { return make_default_profile(2 * M_PI, 0.8, 0.5); }

double rel_l2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).norm() / b.norm(); }

std::vector<double> s_nodes(const OmegaGrid& om)
{
    std::vector<double> s;
    for (int j = 0; j < om.n; ++j) s.push_back(om.s(j));
    return s;
}

WaveField source_field(const SourceProfile& p, const LateralGrid& lat, const OmegaGrid& om)
{
    WaveField f;
    f.lateral = lat;
    f.omega = om;
    f.spectrum = time_to_spectrum(sample(p, lat, om), om);
    return f;
}

InterfaceRealization constant_realization(const InterfaceGrid& g, double h)
{
    InterfaceRealization r;
    r.grid = g;
    r.values = Eigen::VectorXd::Constant(g.size(), h);
    return r;
}

} // namespace

TEST_CASE("frame maps are mutually inverse")
{
    const auto f = make_frame(FrameKind::Reflected, anchor(), 1e-3);
    const FramePoint p{0.7, {1.2, -0.4}};
    const FramePoint q = to_frame(f, to_lab(f, p));
    CHECK(q.s == doctest::Approx(p.s).epsilon(1e-9));
    CHECK((q.Y - p.Y).norm() < 1e-12);
}

TEST_CASE("time transforms round trip")
{
    const OmegaGrid om{64, 0.39};
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 64);
    const Eigen::MatrixXcd w = time_to_spectrum(x, om);
    CHECK((spectrum_to_time(w, om) - x).cwiseAbs().maxCoeff() < 1e-13);
    for (int m = 1; m < 64; ++m) CHECK(std::abs(w(2, 64 - m) - std::conj(w(2, m))) < 1e-12);
}

TEST_CASE("propagator: identity, semigroup, unitarity")
{
    const auto p = default_source();
    const LateralGrid lat{64, 64, 0.2, 0.2};
    const OmegaGrid om{64, 0.39};
    const WaveField f = source_field(p, lat, om);
    const auto cfg = anchor();
    const WaveField z0 = propagate(f, cfg, 0, 0.0);
    CHECK((z0.spectrum - f.spectrum).cwiseAbs().maxCoeff() < 1e-12 * f.spectrum.cwiseAbs().maxCoeff());
    const WaveField a = propagate(propagate(f, cfg, 0, 0.2), cfg, 0, 0.3);
    const WaveField b = propagate(f, cfg, 0, 0.5);
    CHECK((a.spectrum - b.spectrum).norm() <= 1e-12 * b.spectrum.norm());
    for (int m = 33; m < 64; ++m)
        CHECK(b.spectrum.col(m).norm() == doctest::Approx(f.spectrum.col(m).norm()).epsilon(1e-12));
    const WaveField back = propagate(b, cfg, 0, 0.5, Direction::Backward);
    CHECK((back.spectrum - f.spectrum).norm() <= 1e-12 * f.spectrum.norm());
}

TEST_CASE("propagator solves the lateral Schroedinger equation")
{
    // d/dz U = (i c / (2 omega)) div(A grad U): centered differences in z against the spectral operator.
    const auto p = default_source();
    const OmegaGrid om{64, 0.39};
    const auto cfg = anchor();
    const WaveField f = propagate(source_field(p, LateralGrid{128, 128, 0.1, 0.1}, om), cfg, 0, 0.3);
    const LateralGrid& lat = f.lateral;
    const Matrix2<double> a = paraxial_matrix(cfg, 0);
    const int m = 48;
    const double w = om.omega(m);
    const Eigen::VectorXcd col = f.spectrum.col(m);
    Eigen::VectorXcd lhs(col.size());
    // Centered differences in z converge at second order towards the reference derivative.
    double err[2];
    const double hs[2] = {0.02, 0.01};
    // reference derivative from a very small symmetric step
    const WaveField rp = propagate(f, cfg, 0, 1e-5), rm = propagate(f, cfg, 0, 1e-5, Direction::Backward);
    const Eigen::VectorXcd ref = (rp.spectrum.col(m) - rm.spectrum.col(m)) / 2e-5;
    for (int i = 0; i < 2; ++i) {
        const WaveField fp = propagate(f, cfg, 0, hs[i]), fm = propagate(f, cfg, 0, hs[i], Direction::Backward);
        lhs = (fp.spectrum.col(m) - fm.spectrum.col(m)) / (2 * hs[i]);
        err[i] = (lhs - ref).norm() / ref.norm();
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.05));
    // The derivative against a fourth-order finite-difference lateral operator.
    Eigen::VectorXcd op = Eigen::VectorXcd::Zero(col.size());
    const double c = cfg.c0;
    for (int i1 = 2; i1 < lat.n1 - 2; ++i1)
        for (int i2 = 2; i2 < lat.n2 - 2; ++i2) {
            const auto u = [&](int a1, int a2) { return col(lat.index(a1, a2)); };
            const cplx d11 = (-u(i1 + 2, i2) + 16.0 * u(i1 + 1, i2) - 30.0 * u(i1, i2) + 16.0 * u(i1 - 1, i2) - u(i1 - 2, i2)) / (12 * lat.d1 * lat.d1);
            const cplx d22 = (-u(i1, i2 + 2) + 16.0 * u(i1, i2 + 1) - 30.0 * u(i1, i2) + 16.0 * u(i1, i2 - 1) - u(i1, i2 - 2)) / (12 * lat.d2 * lat.d2);
            op(lat.index(i1, i2)) = cplx(0, c / (2 * w)) * (a(0, 0) * d11 + a(1, 1) * d22);
        }
    double num = 0, den = 0;
    for (int i1 = 8; i1 < lat.n1 - 8; ++i1)
        for (int i2 = 8; i2 < lat.n2 - 8; ++i2) {
            num += std::norm(op(lat.index(i1, i2)) - ref(lat.index(i1, i2)));
            den += std::norm(ref(lat.index(i1, i2)));
        }
    CHECK(std::sqrt(num / den) < 1e-3);
}

TEST_CASE("phase screen")
{
    const auto p = default_source();
    const auto cfg = anchor();
    const ScaleRegime<double> reg{1e-3, 0.75};
    const LateralGrid lat{64, 64, 0.2, 0.2};
    const OmegaGrid om{64, 0.39};
    const WaveField f = propagate(source_field(p, lat, om), cfg, 0, 0.5);
    const InterfaceGrid g = screen_grid(lat, cfg, reg);
    CHECK(g.d1 == doctest::Approx(0.2 / reg.ell()));
    const WaveField same = apply_phase_screen(f, flat_realization(g), 0.58, cfg, reg);
    CHECK((same.spectrum - f.spectrum).cwiseAbs().maxCoeff() == 0.0);
    InterfaceModel m;
    const auto r = synthesize(m, g, 3);
    const WaveField s = apply_phase_screen(f, r, 0.58, cfg, reg);
    for (int k = 0; k < om.n; ++k)
        CHECK(s.spectrum.col(k).norm() == doctest::Approx(f.spectrum.col(k).norm()).epsilon(1e-12));
    // a beam wider than the screen footprint is rejected
    const LateralGrid tiny{16, 16, 0.1, 0.1};
    const WaveField wide = source_field(p, tiny, om);
    CHECK_THROWS_AS(apply_phase_screen(wide, flat_realization(screen_grid(tiny, cfg, reg)), 0.58, cfg, reg),
                    std::runtime_error);
    // mismatched grids are rejected
    InterfaceGrid off = g;
    off.d1 *= 1.1;
    CHECK_THROWS_AS(apply_phase_screen(f, synthesize(m, off, 3), 0.58, cfg, reg), std::invalid_argument);
}

TEST_CASE("flat split-step matches the closed form")
{
    const auto p = anchor_source();
    const auto cfg = anchor();
    const ScaleRegime<double> reg{1e-3, 0.75};
    const SimulationGrid grid{{128, 128, 0.1875, 0.1875}, {64, 0.35}};
    const auto flat = flat_realization(screen_grid(grid.lateral, cfg, reg));
    SimulationReport rep;
    const WaveField ref = simulate_reflected(p, cfg, reg, flat, grid, &rep);
    CHECK(rep.slices_computed > 16);
    const Eigen::MatrixXd cf = flat_specular_closed_form(p, cfg, Side::Reflected, grid.lateral, s_nodes(grid.omega));
    CHECK(rel_l2(ref.time_domain(), cf) <= 1e-6);
    const WaveField tr = simulate_transmitted(p, cfg, reg, flat, grid);
    const Eigen::MatrixXd ct = flat_specular_closed_form(p, cfg, Side::Transmitted, grid.lateral, s_nodes(grid.omega));
    CHECK(rel_l2(tr.time_domain(), ct) <= 1e-6);
    // Parseval: flat reflected norm is |R|/2 times the source norm
    const double rn = ref.l2_norm();
    const double rr = reflection_transmission_coefficients(cfg).R;
    CHECK(rn == doctest::Approx(std::abs(rr) / 2 * std::sqrt(p.l2_norm_squared())).epsilon(1e-6));
    // determinism
    const WaveField again = simulate_reflected(p, cfg, reg, flat, grid);
    CHECK((again.spectrum - ref.spectrum).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constant elevation delays the pulse")
{
    const auto p = anchor_source();
    const auto cfg = anchor();
    const ScaleRegime<double> reg{1e-3, 0.75};
    const SimulationGrid grid{{96, 96, 0.25, 0.25}, {64, 0.35}};
    const double h = 0.8;
    const auto r = constant_realization(screen_grid(grid.lateral, cfg, reg), h);
    for (Side side : {Side::Reflected, Side::Transmitted}) {
        const double tau = screen_slowness(side, cfg);
        const WaveField f = side == Side::Reflected ? simulate_reflected(p, cfg, reg, r, grid)
                                                    : simulate_transmitted(p, cfg, reg, r, grid);
        std::vector<double> shifted = s_nodes(grid.omega);
        for (auto& s : shifted) s -= tau * h;
        const Eigen::MatrixXd cf = flat_specular_closed_form(p, cfg, side, grid.lateral, shifted);
        CHECK(rel_l2(f.time_domain(), cf) <= 1e-6);
    }
}

TEST_CASE("identical media transmit freely")
{
    const auto p = default_source();
    auto cfg = anchor();
    cfg.c1 = cfg.c0 * (1 - 1e-13);
    const ScaleRegime<double> reg{1e-3, 0.75};
    const SimulationGrid grid{{64, 64, 0.3, 0.3}, {64, 0.39}};
    const auto flat = flat_realization(screen_grid(grid.lateral, cfg, reg));
    const WaveField r = simulate_reflected(p, cfg, reg, flat, grid);
    CHECK(r.spectrum.cwiseAbs().maxCoeff() < 1e-10);
    const WaveField t = simulate_transmitted(p, cfg, reg, flat, grid);
    WaveField free = propagate(source_field(p, grid.lateral, grid.omega), cfg, 0, cfg.z_tr);
    CHECK(rel_l2(t.time_domain(), 0.5 * free.time_domain()) < 1e-8);
}

TEST_CASE("windowing")
{
    const auto p = anchor_source();
    const auto cfg = anchor();
    const ScaleRegime<double> reg{1e-3, 0.75};
    const SimulationGrid grid{{256, 256, 0.09375, 0.09375}, {64, 0.35}};
    const WaveField f = simulate_reflected(p, cfg, reg, flat_realization(screen_grid(grid.lateral, cfg, reg)), grid);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<WindowPoint> pts;
    std::vector<FramePoint> fps;
    for (int i = 0; i < 300; ++i) {
        WindowPoint w{1.5 * u(rng), {1.5 * u(rng), 1.5 * u(rng)}, {2 * u(rng), 2 * u(rng)}};
        pts.push_back(w);
        fps.push_back({w.s, w.y + reg.ell() * w.y_tilde});
    }
    const auto got = window_specular(f, reg, pts);
    const auto want = flat_specular_at(p, cfg, Side::Reflected, fps);
    double num = 0, den = 0;
    for (size_t i = 0; i < got.size(); ++i) {
        num += (got[i] - want[i]) * (got[i] - want[i]);
        den += want[i] * want[i];
    }
    CHECK(std::sqrt(num / den) <= 1e-4);
    CHECK_THROWS_AS(window_specular(f, reg, {WindowPoint{0.0, {30.0, 0.0}, {0, 0}}}), std::out_of_range);

    // k0 = 0: windowing at grid nodes is plain cropping
    auto normal = cfg;
    normal.k0.setZero();
    const WaveField g = simulate_reflected(p, normal, reg, flat_realization(screen_grid(grid.lateral, normal, reg)), grid);
    const Eigen::MatrixXd td = g.time_domain();
    std::vector<WindowPoint> nodes{{grid.omega.s(30), {grid.lateral.coord1(70), grid.lateral.coord2(60)}, {0, 0}}};
    CHECK(window_specular(g, reg, nodes)[0] == doctest::Approx(td(grid.lateral.index(70, 60), 30)).epsilon(1e-10));
}

TEST_CASE("probe evaluator agrees with the split-step solver")
{
    const auto p = make_default_profile(2.0, 0.3, 1.0);
    const auto cfg = anchor();
    const ScaleRegime<double> reg{1e-3, 0.5};
    const SimulationGrid grid{{128, 128, 0.125, 0.125}, {64, 0.125}};
    InterfaceModel m;
    const auto r = synthesize(m, screen_grid(grid.lateral, cfg, reg), 21);
    const WaveField ss = simulate_reflected(p, cfg, reg, r, grid);
    const WaveField pr = random_specular_prediction(p, cfg, reg, r, grid);
    CHECK(rel_l2(ss.time_domain(), pr.time_domain()) < 0.02);
    // flat probes against the closed form at off-grid points
    ProbeLayout layout{{-0.33, 0.0, 0.41}, {-0.2, 0.27}};
    const auto flat = flat_realization(screen_grid(grid.lateral, cfg, reg));
    const ProbeField pf = evaluate_probes(p, cfg, reg, flat, Side::Reflected, grid.lateral, grid.omega, layout);
    const Eigen::MatrixXd u = spectrum_to_time(pf.spectrum, grid.omega);
    std::vector<FramePoint> fps;
    for (double y1 : layout.y1)
        for (double y2 : layout.y2)
            for (int j = 0; j < grid.omega.n; ++j) fps.push_back({grid.omega.s(j), {y1, y2}});
    const auto want = flat_specular_at(p, cfg, Side::Reflected, fps);
    double num = 0, den = 0;
    for (int i = 0; i < layout.size(); ++i)
        for (int j = 0; j < grid.omega.n; ++j) {
            const double d = u(i, j) - want[i * grid.omega.n + j];
            num += d * d;
            den += want[i * grid.omega.n + j] * want[i * grid.omega.n + j];
        }
    CHECK(std::sqrt(num / den) < 1e-6);
}

TEST_CASE("jump and continuity relations")
{
    const auto p = default_source();
    const auto cfg = anchor();
    const auto r = jump_condition_check(p, cfg, 1e-3);
    CHECK(r.modes_checked > 500);
    CHECK(r.max() <= 1e-8);
    const auto z = jump_condition_check(p, cfg, 1e-3, 0.0);
    CHECK(z.max() == 0.0);
}

TEST_CASE("simulation preconditions")
{
    const auto cfg = anchor();
    const ScaleRegime<double> reg{1e-3, 0.75};
    const SimulationGrid grid{{64, 64, 0.3, 0.3}, {32, 0.39}};
    const auto flat = flat_realization(screen_grid(grid.lateral, cfg, reg));
    // band above the grid Nyquist frequency
    CHECK_THROWS_AS(simulate_reflected(default_source(), cfg, reg, flat, grid), std::invalid_argument);
    // non-propagating lateral modes
    const auto thin = make_default_profile(2 * M_PI, 1.0, 0.05);
    CHECK_THROWS_AS(simulate_reflected(thin, cfg, reg, flat, SimulationGrid{grid.lateral, {64, 0.39}}), std::domain_error);
}
