#include <doctest.h>

#include "roughscatter/speckle.hpp"

#include <cmath>
#include <random>

using namespace roughscatter;

namespace {

MediumConfig<double> reference()
{
    MediumConfig<double> cfg;
    cfg.c0 = 1.5;
    cfg.c1 = 1.0;
    cfg.k0 = {0.6, 0.0};
    cfg.z_int = 1.0;
    cfg.z_tr = 2.0;
    return cfg;
}

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

InterfaceModel flat_model()
{
    InterfaceModel m;
    m.sigma_v = 0;
    return m;
}

std::vector<double> centered(int n, double h)
{
    std::vector<double> t;
    for (int i = 0; i < n; ++i) t.push_back((i - n / 2) * h);
    return t;
}

} // namespace

TEST_CASE("speckle offsets and ellipse support")
{
    const auto cfg = reference();
    const auto o = speckle_offsets(Side::Reflected, cfg, {1.0, 0.0});
    CHECK(o.y(0) == doctest::Approx(18.112).epsilon(1e-4));
    CHECK(std::abs(o.y(1)) < 1e-14);
    CHECK(o.s == doctest::Approx(9.056).epsilon(1e-4));
    const auto zero = speckle_offsets(Side::Reflected, cfg, Eigen::Vector2d::Zero());
    CHECK(zero.y.norm() == 0.0);
    CHECK(zero.s == 0.0);

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int k = 0; k < 200; ++k) {
        const Eigen::Vector2d p(u(rng), u(rng));
        for (Side side : {Side::Reflected, Side::Transmitted}) {
            const auto off = speckle_offsets(side, cfg, p);
            CHECK(off.s >= 0);
            CHECK(off.s == doctest::Approx(p.dot(off.y) / 2).epsilon(1e-14));
            // y_p lies on the support ellipse of s_p
            const auto e = ellipse_support(side, cfg, off.s);
            const Eigen::Vector2d a = e.axes.transpose() * off.y;
            CHECK(std::pow(a(0) / e.semi_axes(0), 2) + std::pow(a(1) / e.semi_axes(1), 2) == doctest::Approx(1.0).epsilon(1e-10));
        }
    }

    const auto kern = kernel_C(Side::Reflected, cfg, InterfaceModel{}, make_default_profile(2 * M_PI, 1, 0.5), 0.1);
    CHECK(kern.support({1.0, 0.0}) == doctest::Approx(0.027606).epsilon(1e-4));
    const auto e = ellipse_support(Side::Reflected, cfg, kern.support({1.0, 0.0}));
    bool through = false;
    for (int k = 0; k < 4; ++k) through = through || (e.point(k * M_PI / 2) - Eigen::Vector2d(1, 0)).norm() < 1e-10;
    CHECK(through);
    CHECK(ellipse_support(Side::Reflected, cfg, 0.0).semi_axes.norm() == 0.0);
    CHECK_THROWS_AS(ellipse_support(Side::Reflected, cfg, -1e-3), std::invalid_argument);

    auto normal = cfg;
    normal.k0 = Eigen::Vector2d::Zero();
    const auto circle = ellipse_support(Side::Transmitted, normal, 0.3);
    CHECK(circle.semi_axes(0) == doctest::Approx(circle.semi_axes(1)).epsilon(1e-14));
}

TEST_CASE("mollifier")
{
    const double w = 0.3;
    double mass = 0;
    const int n = 4000;
    for (int i = 0; i <= n; ++i) {
        const double x = -w / 2 + i * w / n;
        mass += ((i == 0 || i == n) ? 0.5 : 1.0) * (w / n) * mollifier(x, w);
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(mollifier(0.2, w) == 0.0);
    CHECK(mollifier(0.05, w) == mollifier(-0.05, w));
    CHECK_THROWS_AS(mollifier(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("speckle kernel properties")
{
    const auto cfg = anchor();
    const auto prof = make_default_profile(2 * M_PI, 1, 0.5);
    const auto k = kernel_C(Side::Reflected, cfg, InterfaceModel{}, prof, 0.05);
    const Eigen::Vector2d yb(1.0, 0.3);
    const double t = k.integrated(yb, 0.4, {0.2, -0.1});
    // depends on differences only, and is even under a joint sign flip
    CHECK(k.integrated(yb, -0.4, {-0.2, 0.1}) == doctest::Approx(t).epsilon(1e-13));
    CHECK(k.integrated(yb, 0.0, Eigen::Vector2d::Zero()) > 0);
    // support and mollified profile
    const double sb = k.support(yb);
    CHECK(k(sb, yb, 0.4, {0.2, -0.1}) == doctest::Approx(mollifier(0, 0.05) * t));
    CHECK(k(sb + 0.05, yb, 0.4, {0.2, -0.1}) == 0.0);
    // the integrated kernel is the s_bar integral of the mollified one
    double acc = 0;
    for (int i = 0; i <= 400; ++i) {
        const double x = sb - 0.025 + i * 0.05 / 400;
        acc += ((i == 0 || i == 400) ? 0.5 : 1.0) * (0.05 / 400) * k(x, yb, 0.4, {0.2, -0.1});
    }
    CHECK(acc == doctest::Approx(t).epsilon(1e-8));
    // transmission uses medium 1 and the same construction
    const auto kt = kernel_C(Side::Transmitted, cfg, InterfaceModel{}, prof, 0.05);
    CHECK(kt.integrated(yb, 0.0, Eigen::Vector2d::Zero()) > 0);
    CHECK(scattering_slowness(Side::Transmitted, cfg) == doctest::Approx(screen_slowness(Side::Transmitted, cfg)));

    // a flat interface has no diffuse part: the kernel vanishes off the specular direction
    const auto kf = kernel_C(Side::Reflected, cfg, flat_model(), prof, 0.05);
    CHECK(kf.integrated(yb, 0.0, Eigen::Vector2d::Zero()) == 0.0);

    CHECK_THROWS_AS(kernel_C(Side::Reflected, cfg, InterfaceModel{}, prof, 0.0), std::invalid_argument);
}

TEST_CASE("speckle frame")
{
    const ScaleRegime<double> reg{1e-3, 0.75};
    const auto p = speckle_frame_point(reg, 0.3, Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), 0.2, Eigen::Vector2d::Zero());
    // lab time offset eps * s reduces to eps^{2(1 - gamma)} s_bar + eps s_tilde
    CHECK(1e-3 * p.s == doctest::Approx(std::pow(1e-3, 0.5) * 0.3 + 1e-3 * 0.2).epsilon(1e-14));
    CHECK(p.Y.norm() == 0.0);
    const auto q = speckle_frame_point(reg, 0.0, {1.0, 0.0}, {0.5, 0.0}, 0.0, {2.0, 0.0});
    CHECK(q.Y(0) == doctest::Approx(std::pow(1e-3, -0.25) + 0.5 + 2 * std::pow(1e-3, 0.25)).epsilon(1e-14));
    CHECK(speckle_prefactor(reg) == doctest::Approx(std::pow(1e-3, -0.5)));
    CHECK_THROWS_AS(speckle_layout(ScaleRegime<double>{1e-3, 0.5}, {1, 0}, {0, 0}, {0.0}, {0.0}), std::invalid_argument);
}

TEST_CASE("extract_speckle agrees with the probe evaluator")
{
    const auto cfg = anchor();
    const auto prof = make_default_profile(2 * M_PI, 0.8, 0.5);
    const ScaleRegime<double> reg{1e-2, 0.6};
    const LateralGrid lat{256, 256, 0.09375, 0.09375};
    const OmegaGrid om{64, 0.35};
    const auto real = synthesize(InterfaceModel{}, screen_grid(lat, cfg, reg), 21);
    const auto field = simulate_reflected(prof, cfg, reg, real, {lat, om});

    SpeckleWindow w;
    w.s_bar = 0.02;
    w.y_bar = {0.3, 0.1};
    w.s_tilde = {-1.0, 0.0, 0.5, 1.0};
    const auto t = centered(5, 0.5);
    for (double a : t)
        for (double b : t) w.y_tilde.push_back({a, b});
    const Eigen::MatrixXd ex = extract_speckle(field, cfg, reg, w);

    const auto layout = speckle_layout(reg, w.y_bar, w.y, t, t);
    const auto probes = evaluate_probes(prof, cfg, reg, real, Side::Reflected, lat, om, layout);
    std::vector<double> s;
    for (double st : w.s_tilde) s.push_back(speckle_prefactor(reg) * w.s_bar + st);
    const Eigen::MatrixXd direct = speckle_prefactor(reg) * probe_time_samples(probes, s);
    // two discretizations of the scattered field: split-step with interpolation and direct quadrature
    CHECK((ex - direct).norm() <= 2e-2 * direct.norm());

    w.y_bar = {40.0, 0.0};
    CHECK_THROWS_AS(extract_speckle(field, cfg, reg, w), std::out_of_range);
}

TEST_CASE("empirical correlation estimators")
{
    const auto cfg = anchor();
    const auto prof = make_default_profile(2 * M_PI, 0.8, 0.5);
    const ScaleRegime<double> reg{4e-3, 0.75};
    const double ell = reg.ell();
    const LateralGrid fp{256, 256, ell / 8, ell / 8};
    const OmegaGrid om{160, 0.16};
    const auto t = centered(9, 0.1);
    const auto layout = speckle_layout(reg, {1.0, 0.0}, Eigen::Vector2d::Zero(), t, t);
    const auto g = screen_grid(fp, cfg, reg);
    const auto real = synthesize(InterfaceModel{}, g, 8);
    const auto f = evaluate_probes(prof, cfg, reg, real, Side::Reflected, fp, om, layout);

    // the diagonal of the s_bar-integrated correlation is the time-integrated intensity over one period
    const auto diag = integrated_correlation(f, reg, {CorrelationCut{0, 0, {0.0}}});
    std::vector<double> s;
    const int n = 2 * om.n;
    for (int j = 0; j < n; ++j) s.push_back(j * om.period() / n);
    const Eigen::VectorXd inten = probe_intensity(f, s);
    CHECK(inten.minCoeff() >= 0);
    const double integral = speckle_prefactor(reg) * inten.sum() * om.period() / n;
    CHECK(diag[0](0) == doctest::Approx(integral).epsilon(1e-10));

    // the sample at offset -k and +k agree by symmetry of pair averaging
    const auto sym = integrated_correlation(f, reg, {CorrelationCut{2, 1, {0.3}}, CorrelationCut{-2, -1, {-0.3}}});
    CHECK(sym[0](0) == doctest::Approx(sym[1](0)).epsilon(1e-12));
    CHECK_THROWS_AS(integrated_correlation(f, reg, {CorrelationCut{9, 0, {0.0}}}), std::invalid_argument);

    // no roughness: nothing arrives off the specular cone
    const auto flat = evaluate_probes(prof, cfg, reg, flat_realization(g), Side::Reflected, fp, om, layout);
    const auto peak_layout = speckle_layout(reg, Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), {0.0}, {0.0});
    const auto spec = evaluate_probes(prof, cfg, reg, flat_realization(g), Side::Reflected, fp, om, peak_layout);
    const double spec_energy = integrated_correlation(spec, reg, {CorrelationCut{0, 0, {0.0}}})[0](0);
    const double off = integrated_correlation(flat, reg, {CorrelationCut{0, 0, {0.0}}})[0](0);
    CHECK(off <= 1e-6 * spec_energy);
    // with roughness, the scaled speckle carries energy of order one relative to the kernel
    const auto kern = kernel_C(Side::Reflected, cfg, InterfaceModel{}, prof, std::pow(reg.epsilon, 2 * reg.gamma - 1));
    const double ratio = diag[0](0) / kern.integrated({1.0, 0.0}, 0.0, Eigen::Vector2d::Zero());
    CHECK(ratio > 0.1);
    CHECK(ratio < 10);
}

TEST_CASE("ensemble accumulator")
{
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<Eigen::VectorXd> xs;
    for (int i = 0; i < 30; ++i) xs.push_back(Eigen::VectorXd::NullaryExpr(3, [&](Eigen::Index) { return n(rng); }));
    EnsembleAccumulator all, a, b, c;
    for (int i = 0; i < 30; ++i) {
        all.add(xs[i]);
        (i < 10 ? a : i < 17 ? b : c).add(xs[i]);
    }
    EnsembleAccumulator left = a, right = b;
    left.merge(b);
    left.merge(c);
    right.merge(c);
    EnsembleAccumulator other = a;
    other.merge(right);
    CHECK(left.count() == 30);
    CHECK((left.mean() - all.mean()).norm() < 1e-14);
    CHECK((other.mean() - all.mean()).norm() < 1e-14);
    CHECK((left.standard_error() - all.standard_error()).norm() < 1e-14);
    EnsembleAccumulator empty;
    CHECK_THROWS_AS(empty.mean(), std::logic_error);
    EnsembleAccumulator kept(true), part(true);
    kept.add(xs[0]);
    for (int i = 1; i < 11; ++i) part.add(xs[i]);
    kept.merge(part);
    CHECK(kept.samples().size() == 11);
    CHECK((kept.samples()[10] - xs[10]).norm() == 0.0);
    CHECK_THROWS_AS(kept.add(Eigen::VectorXd::Zero(2)), std::invalid_argument);
}

TEST_CASE("gaussianity and independence tests")
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd g(400, 6), h(400, 6);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = n(rng);
    for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = n(rng);
    const auto r = gaussianity_test(g);
    CHECK(r.pass());
    CHECK(r.kurtosis.value == doctest::Approx(3.0).epsilon(0.2));
    CHECK(r.probe_kurtosis.size() == 6);

    // uniform samples have kurtosis 1.8
    std::uniform_real_distribution<double> u(-1, 1);
    Eigen::MatrixXd un(400, 6);
    for (Eigen::Index i = 0; i < un.size(); ++i) un.data()[i] = u(rng);
    CHECK_FALSE(gaussianity_test(un).kurtosis.pass);
    // a shifted mean is detected
    CHECK_FALSE(gaussianity_test((g.array() + 0.5).matrix()).mean.pass);
    // skewed samples are detected
    CHECK_FALSE(gaussianity_test(g.cwiseAbs2()).third.pass);
    CHECK_THROWS_AS(gaussianity_test(g.topRows(99)), std::invalid_argument);

    CHECK(independence_test(g, h).pass());
    const auto same = independence_test(g, g);
    CHECK(same.correlation.value == doctest::Approx(1.0));
    CHECK_FALSE(same.pass());
    const auto none = independence_test(Eigen::MatrixXd::Zero(400, 6), h);
    CHECK_FALSE(none.applicable);
    CHECK(none.pass());

    const auto cal = calibrate_tests(200, 8, 100, 12345);
    CHECK(cal.seeds == 100);
    CHECK(cal.pass_rate() >= 0.95);
}

TEST_CASE("self-averaging report")
{
    const auto det = self_averaging_test({4e-3, 2e-3}, {{1.0, 1.0, 1.0}, {2.0, 2.0, 2.0}});
    CHECK(det.relative_variance[0] == 0.0);
    CHECK(det.relative_variance[1] == 0.0);
    CHECK(det.decreasing);
    const auto down = self_averaging_test({1e-3, 4e-3, 2e-3}, {{1.0, 1.1}, {1.0, 2.0}, {1.0, 1.5}});
    CHECK(down.decreasing);
    const auto up = self_averaging_test({4e-3, 2e-3}, {{1.0, 1.1}, {1.0, 2.0}});
    CHECK_FALSE(up.decreasing);
    CHECK_THROWS_AS(self_averaging_test({1e-3}, {{1.0, 2.0}}), std::invalid_argument);
}

TEST_CASE("homogenized specular prediction")
{
    const auto cfg = reference();
    const auto prof = make_default_profile(1.0, 0.15, 2.0);
    const double tau = screen_slowness(Side::Reflected, cfg);
    CHECK(characteristic_function(InterfaceModel{}, 1.0 * tau).real() == doctest::Approx(0.8446).epsilon(1e-4));

    std::vector<FramePoint> pts;
    for (double s : {-6.0, -2.0, 0.0, 1.0, 3.0})
        for (double y : {-1.0, 0.0, 2.0}) pts.push_back({s, {y, 0.5}});
    const auto flat = flat_specular_at(prof, cfg, Side::Reflected, pts);
    const auto none = homogenized_specular_at(Side::Reflected, prof, cfg, flat_model(), pts);
    for (size_t i = 0; i < pts.size(); ++i) CHECK(none[i] == doctest::Approx(flat[i]).epsilon(1e-14));

    for (Side side : {Side::Reflected, Side::Transmitted}) {
        const auto filt = homogenized_specular_at(side, prof, cfg, InterfaceModel{}, pts);
        const auto conv = homogenized_specular_by_convolution(side, prof, cfg, InterfaceModel{}, pts);
        double scale = 0;
        for (double v : filt) scale = std::max(scale, std::abs(v));
        for (size_t i = 0; i < pts.size(); ++i) CHECK(std::abs(filt[i] - conv[i]) <= 1e-8 * scale);
    }

    // damping is a contraction
    double fn = 0, hn = 0;
    const auto h = homogenized_specular_at(Side::Reflected, prof, cfg, InterfaceModel{}, pts);
    for (size_t i = 0; i < pts.size(); ++i) {
        fn += flat[i] * flat[i];
        hn += h[i] * h[i];
    }
    CHECK(hn < fn);
}

TEST_CASE("damping projection recovers a constant filter")
{
    const auto cfg = reference();
    const auto prof = make_default_profile(3.0, 0.4, 2.0);
    const ScaleRegime<double> reg{1e-3, 0.75};
    const LateralGrid fp{128, 128, 0.25, 0.25};
    const OmegaGrid om{128, 0.1};
    const ProbeLayout layout{centered(9, 0.5), centered(9, 0.5)};
    const auto g = screen_grid(fp, cfg, reg);
    const auto flat = evaluate_probes(prof, cfg, reg, flat_realization(g), Side::Reflected, fp, om, layout);
    InterfaceRealization shifted;
    shifted.grid = g;
    shifted.values = Eigen::VectorXd::Constant(g.size(), 0.4);
    const auto moved = evaluate_probes(prof, cfg, reg, shifted, Side::Reflected, fp, om, layout);
    const int m = om.n / 2 + 20;
    const cplx d = damping_projection(moved, flat, m);
    const double tau = screen_slowness(Side::Reflected, cfg);
    CHECK(std::abs(d - std::exp(cplx(0, om.omega(m) * tau * 0.4))) < 1e-10);
    CHECK_THROWS_AS(damping_projection(moved, flat, om.n), std::invalid_argument);
}
