#include "roughscatter/paraxial.hpp"

#include "roughscatter/fft.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace roughscatter {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double edge_threshold = 1e-6;

using RowMajorC = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// kappa^T A kappa on the FFT wavenumber grid (natural order, row-major).
Eigen::VectorXd quadratic_form(const LateralGrid& lat, const Matrix2<double>& a)
{
    Eigen::VectorXd q(lat.size());
    for (int k1 = 0; k1 < lat.n1; ++k1)
        for (int k2 = 0; k2 < lat.n2; ++k2) {
            const Eigen::Vector2d kap(lat.wavenumber1(k1), lat.wavenumber2(k2));
            q(lat.index(k1, k2)) = kap.dot(a * kap);
        }
    return q;
}

int edge_band(int n) { return std::max(1, n / 16); }

struct EdgeEnergy {
    double edge{0};
    double total{0};
};

/// Squared samples summed over the outer band of the grid and over the whole grid.
EdgeEnergy edge_energy(const cplx* data, const LateralGrid& lat)
{
    const int b1 = edge_band(lat.n1), b2 = edge_band(lat.n2);
    EdgeEnergy out;
    for (int i1 = 0; i1 < lat.n1; ++i1)
        for (int i2 = 0; i2 < lat.n2; ++i2) {
            const double e = std::norm(data[lat.index(i1, i2)]);
            out.total += e;
            if (i1 < b1 || i1 >= lat.n1 - b1 || i2 < b2 || i2 >= lat.n2 - b2) out.edge += e;
        }
    return out;
}

double ramp(int i, int n)
{
    const int b = edge_band(n);
    const int d = std::min(i, n - 1 - i);
    if (d >= b) return 1.0;
    const double x = std::sin(0.5 * pi * d / b);
    return x * x;
}

void apply_taper(cplx* data, const LateralGrid& lat)
{
    for (int i1 = 0; i1 < lat.n1; ++i1) {
        const double w1 = ramp(i1, lat.n1);
        for (int i2 = 0; i2 < lat.n2; ++i2) data[lat.index(i1, i2)] *= w1 * ramp(i2, lat.n2);
    }
}

bool is_diagonal(const Matrix2<double>& m) { return std::abs(m(0, 1)) <= 1e-14 * m.norm(); }

void require_match(const InterfaceGrid& have, const InterfaceGrid& want)
{
    const auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)) + 1e-12; };
    if (have.n1 != want.n1 || have.n2 != want.n2 || !close(have.d1, want.d1) || !close(have.d2, want.d2)
        || !close(have.origin(0), want.origin(0)) || !close(have.origin(1), want.origin(1)))
        throw std::invalid_argument("phase screen: realization grid does not coincide with the beam grid at the interface");
}

bool is_flat(const InterfaceRealization& r) { return r.values.size() == 0 || r.values.cwiseAbs().maxCoeff() == 0; }

struct Leg {
    int medium;
    double z;
};

struct SideSetup {
    Leg second;
    double tau;
    double prefactor;
    FrameKind frame;
    double z_out;
    /// Combined first + second leg matrix z c A for the flat closed form.
    Matrix2<double> total;
};

SideSetup side_setup(Side side, const MediumConfig<double>& cfg)
{
    const auto rt = reflection_transmission_coefficients(cfg);
    const double s0 = vertical_slowness(cfg, 0), s1 = vertical_slowness(cfg, 1);
    const Matrix2<double> p0 = cfg.z_int * cfg.c0 * paraxial_matrix(cfg, 0);
    if (side == Side::Reflected) return {{0, cfg.z_int}, 2 * s0, rt.R / 2, FrameKind::Reflected, 0.0, 2 * p0};
    const double dz = cfg.z_tr - cfg.z_int;
    return {{1, dz}, s0 - s1, rt.T / 2 * std::sqrt(s0 / s1), FrameKind::Transmitted, cfg.z_tr,
            p0 + dz * cfg.c1 * paraxial_matrix(cfg, 1)};
}

/// Positive-frequency slices of the omega grid carrying source energy above threshold; also checks that the
/// band is representable on the grid.
std::vector<int> active_slices(const SourceProfile& profile, const OmegaGrid& omega)
{
    if (omega.n % 2) throw std::invalid_argument("omega grid: n must be even");
    if (!(profile.band_hi() < (omega.n / 2) * omega.d_omega))
        throw std::invalid_argument("omega grid: declared source band exceeds the grid Nyquist frequency (carrier under-resolved)");
    const double peak = std::abs(profile.temporal_spectrum(profile.omega_c));
    std::vector<int> out;
    for (int m = omega.n / 2 + 1; m < omega.n; ++m)
        if (std::abs(profile.temporal_spectrum(omega.omega(m))) >= profile.threshold * peak) out.push_back(m);
    return out;
}

void fill_negative(Eigen::MatrixXcd& spec, const std::vector<int>& slices, int n)
{
    for (int m : slices) spec.col(n - m) = spec.col(m).conjugate();
}

WaveField simulate(Side side, const SourceProfile& profile, const MediumConfig<double>& cfg,
                   const ScaleRegime<double>& regime, const InterfaceRealization& realization,
                   const SimulationGrid& grid, SimulationReport* report)
{
    validate(cfg);
    validate(regime);
    validate(profile);
    const auto check = propagating_mode_check(profile, cfg, regime.epsilon);
    if (!check.ok) throw std::domain_error("simulate: declared source band excites non-propagating modes");
    const auto& lat = grid.lateral;
    const bool flat = is_flat(realization);
    if (!flat) require_match(realization.grid, screen_grid(lat, cfg, regime));
    const SideSetup setup = side_setup(side, cfg);

    Fft2d fft(lat.n1, lat.n2);
    const int nl = lat.size();
    // FFT of the sampled lateral source envelope, shared by all slices.
    std::vector<cplx> env(nl);
    for (int i1 = 0; i1 < lat.n1; ++i1)
        for (int i2 = 0; i2 < lat.n2; ++i2) env[lat.index(i1, i2)] = profile.lateral(lat.point(i1, i2));
    fft.forward(env.data());

    const Eigen::VectorXd q0 = quadratic_form(lat, paraxial_matrix(cfg, 0));
    const Eigen::VectorXd q2 = quadratic_form(lat, paraxial_matrix(cfg, setup.second.medium));
    const double c2 = cfg.speed(setup.second.medium);

    WaveField out;
    out.lateral = lat;
    out.omega = grid.omega;
    out.spectrum = Eigen::MatrixXcd::Zero(nl, grid.omega.n);
    out.z = setup.z_out;
    out.frame = make_frame(setup.frame, cfg, regime.epsilon);

    SimulationReport rep;
    const auto slices = active_slices(profile, grid.omega);
    std::vector<cplx> buf(nl);
    const double inv_n = 1.0 / nl;
    // Edge energy is measured against the most energetic slice (propagation is unitary per slice).
    double env_energy = 0;
    for (const auto& e : env) env_energy += std::norm(e);
    env_energy *= inv_n;
    double peak_slice = 0;
    for (int m : slices) peak_slice = std::max(peak_slice, std::norm(profile.temporal_spectrum(grid.omega.omega(m))) * env_energy);
    const auto edge_fraction = [&](const cplx* data) { return peak_slice > 0 ? edge_energy(data, lat).edge / peak_slice : 0.0; };
    for (int m : slices) {
        const double w = grid.omega.omega(m);
        const double t = profile.temporal_spectrum(w);
        for (int k = 0; k < nl; ++k)
            buf[k] = t * env[k] * std::exp(cplx(0, -cfg.z_int * cfg.c0 * q0(k) / (2 * w))) * inv_n;
        fft.backward(buf.data());
        double ef = edge_fraction(buf.data());
        bool tapered = false;
        if (ef > edge_threshold) {
            apply_taper(buf.data(), lat);
            tapered = true;
        }
        rep.max_edge_fraction = std::max(rep.max_edge_fraction, ef);
        if (!flat)
            for (int k = 0; k < nl; ++k) buf[k] *= std::exp(cplx(0, w * setup.tau * realization.values(k)));
        fft.forward(buf.data());
        for (int k = 0; k < nl; ++k)
            buf[k] *= std::exp(cplx(0, -setup.second.z * c2 * q2(k) / (2 * w))) * inv_n;
        fft.backward(buf.data());
        ef = edge_fraction(buf.data());
        rep.max_edge_fraction = std::max(rep.max_edge_fraction, ef);
        if (ef > edge_threshold) {
            apply_taper(buf.data(), lat);
            tapered = true;
        }
        for (int k = 0; k < nl; ++k) out.spectrum(k, m) = setup.prefactor * buf[k];
        rep.slices_computed++;
        if (tapered) rep.slices_tapered++;
    }
    fill_negative(out.spectrum, slices, grid.omega.n);
    if (report) *report = rep;
    return out;
}

/// Per-axis factor of the propagated Gaussian beam: omega w / sqrt(M) exp(-omega^2 y^2 / (2 M)), M = omega^2 w^2 + i omega P.
cplx beam_axis(double w, double width, double p, double y)
{
    const cplx m(w * w * width * width, w * p);
    return w * width / std::sqrt(m) * std::exp(-w * w * y * y / (2.0 * m));
}

struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
};

Quadrature band_quadrature(const SourceProfile& profile, int n)
{
    if (n < 2) throw std::invalid_argument("quadrature: need at least 2 nodes");
    const double lo = std::max(profile.band_lo(), 1e-9), hi = profile.band_hi();
    Quadrature q;
    const double h = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) {
        q.nodes.push_back(lo + i * h);
        q.weights.push_back((i == 0 || i == n - 1) ? h / 2 : h);
    }
    return q;
}

/// Samples of the second-leg Fresnel kernel per axis, sqrt(omega / (2 pi i p)) exp(i omega (y - y')^2 / (2 p)).
/// The kernel is cut off where its local wavenumber omega |y - y'| / p passes the Nyquist wavenumber of the
/// input grid: the sampled integrand carries no content there, and the undersampled chirp would alias.
RowMajorC fresnel_axis(double w, double p, const std::vector<double>& out, const std::vector<double>& in)
{
    RowMajorC e(out.size(), in.size());
    const cplx pre = std::sqrt(w / (2 * pi * p)) * std::exp(cplx(0, -pi / 4));
    const double nyquist = in.size() > 1 ? pi / std::abs(in[1] - in[0]) : std::numeric_limits<double>::infinity();
    for (size_t a = 0; a < out.size(); ++a)
        for (size_t i = 0; i < in.size(); ++i) {
            const double d = out[a] - in[i];
            const double r = w * std::abs(d) / (p * nyquist);
            if (r >= 1) {
                e(a, i) = 0;
                continue;
            }
            const double taper = r <= 0.8 ? 1.0 : std::pow(std::cos(pi / 2 * (r - 0.8) / 0.2), 2);
            e(a, i) = taper * pre * std::exp(cplx(0, w * d * d / (2 * p)));
        }
    return e;
}

} // namespace

WaveField propagate(const WaveField& field, const MediumConfig<double>& cfg, int medium, double z, Direction dir)
{
    if (!(z >= 0)) throw std::invalid_argument("propagate: z >= 0 required");
    const auto& lat = field.lateral;
    const Eigen::VectorXd q = quadratic_form(lat, paraxial_matrix(cfg, medium));
    const double c = cfg.speed(medium);
    const double sgn = dir == Direction::Forward ? -1.0 : 1.0;
    Fft2d fft(lat.n1, lat.n2);
    WaveField out = field;
    const int nl = lat.size();
    for (int m = 0; m < field.omega.n; ++m) {
        const double w = field.omega.omega(m);
        if (w == 0) continue;
        cplx* col = out.spectrum.col(m).data();
        fft.forward(col);
        for (int k = 0; k < nl; ++k) col[k] *= std::exp(cplx(0, sgn * z * c * q(k) / (2 * w))) / double(nl);
        fft.backward(col);
    }
    return out;
}

InterfaceGrid screen_grid(const LateralGrid& lat, const MediumConfig<double>& cfg, const ScaleRegime<double>& regime)
{
    const auto g = observation_geometry(cfg);
    const double ell = regime.ell();
    InterfaceGrid s;
    s.n1 = lat.n1;
    s.n2 = lat.n2;
    s.d1 = lat.d1 / ell;
    s.d2 = lat.d2 / ell;
    s.origin = g.x_int / regime.correlation_length();
    return s;
}

double screen_slowness(Side side, const MediumConfig<double>& cfg)
{
    const double s0 = vertical_slowness(cfg, 0);
    return side == Side::Reflected ? 2 * s0 : s0 - vertical_slowness(cfg, 1);
}

WaveField apply_phase_screen(const WaveField& field, const InterfaceRealization& realization, double tau,
                             const MediumConfig<double>& cfg, const ScaleRegime<double>& regime)
{
    const auto& lat = field.lateral;
    require_match(realization.grid, screen_grid(lat, cfg, regime));
    WaveField out = field;
    EdgeEnergy all;
    for (int m = 0; m < field.omega.n; ++m) {
        const EdgeEnergy e = edge_energy(field.spectrum.col(m).data(), lat);
        all.edge += e.edge;
        all.total += e.total;
    }
    if (all.total > 0 && all.edge > edge_threshold * all.total)
        throw std::runtime_error("apply_phase_screen: beam energy beyond the V footprint exceeds 1e-6");
    for (int m = 0; m < field.omega.n; ++m) {
        cplx* col = out.spectrum.col(m).data();
        const double w = field.omega.omega(m);
        for (int k = 0; k < lat.size(); ++k) col[k] *= std::exp(cplx(0, w * tau * realization.values(k)));
    }
    return out;
}

WaveField simulate_reflected(const SourceProfile& profile, const MediumConfig<double>& cfg,
                             const ScaleRegime<double>& regime, const InterfaceRealization& realization,
                             const SimulationGrid& grid, SimulationReport* report)
{
    return simulate(Side::Reflected, profile, cfg, regime, realization, grid, report);
}

WaveField simulate_transmitted(const SourceProfile& profile, const MediumConfig<double>& cfg,
                               const ScaleRegime<double>& regime, const InterfaceRealization& realization,
                               const SimulationGrid& grid, SimulationReport* report)
{
    return simulate(Side::Transmitted, profile, cfg, regime, realization, grid, report);
}

Eigen::MatrixXd flat_specular_closed_form(const SourceProfile& profile, const MediumConfig<double>& cfg, Side side,
                                          const LateralGrid& lat, const std::vector<double>& s, int n_quad,
                                          const SpectralDamping& damping)
{
    const SideSetup setup = side_setup(side, cfg);
    const Matrix2<double>& p = setup.total;
    if (!is_diagonal(p)) throw std::invalid_argument("flat_specular_closed_form: k0 must lie along a grid axis");
    const Quadrature quad = band_quadrature(profile, n_quad);
    const int nq = n_quad;
    // u(s, Y) = (1/pi) Re sum_q w_q e^{-i omega s} W(omega, Y), W = pref T(omega) g1(Y1) g2(Y2).
    Eigen::MatrixXcd e1(lat.n1, nq), e2(nq, lat.n2);
    Eigen::VectorXcd amp(nq);
    for (int q = 0; q < nq; ++q) {
        const double w = quad.nodes[q];
        double a = setup.prefactor * profile.temporal_spectrum(w) * quad.weights[q] / pi;
        if (damping) a *= damping(w);
        amp(q) = a;
        for (int i = 0; i < lat.n1; ++i) e1(i, q) = beam_axis(w, profile.beam_width, p(0, 0), lat.coord1(i));
        for (int i = 0; i < lat.n2; ++i) e2(q, i) = beam_axis(w, profile.beam_width, p(1, 1), lat.coord2(i));
    }
    Eigen::MatrixXd out(lat.size(), s.size());
    Eigen::MatrixXcd scaled(lat.n1, nq);
    for (size_t j = 0; j < s.size(); ++j) {
        for (int q = 0; q < nq; ++q) scaled.col(q) = e1.col(q) * (amp(q) * std::exp(cplx(0, -quad.nodes[q] * s[j])));
        const Eigen::MatrixXcd u = scaled * e2;
        for (int i1 = 0; i1 < lat.n1; ++i1)
            for (int i2 = 0; i2 < lat.n2; ++i2) out(lat.index(i1, i2), j) = u(i1, i2).real();
    }
    return out;
}

std::vector<double> flat_specular_at(const SourceProfile& profile, const MediumConfig<double>& cfg, Side side,
                                     const std::vector<FramePoint>& points, int n_quad, const SpectralDamping& damping)
{
    const SideSetup setup = side_setup(side, cfg);
    const Matrix2<double>& p = setup.total;
    if (!is_diagonal(p)) throw std::invalid_argument("flat_specular_at: k0 must lie along a grid axis");
    const Quadrature quad = band_quadrature(profile, n_quad);
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& pt : points) {
        cplx acc = 0;
        for (int q = 0; q < n_quad; ++q) {
            const double w = quad.nodes[q];
            double a = setup.prefactor * profile.temporal_spectrum(w) * quad.weights[q];
            if (damping) a *= damping(w);
            acc += a * std::exp(cplx(0, -w * pt.s)) * beam_axis(w, profile.beam_width, p(0, 0), pt.Y(0))
                   * beam_axis(w, profile.beam_width, p(1, 1), pt.Y(1));
        }
        out.push_back(acc.real() / pi);
    }
    return out;
}

std::vector<ProbeField> evaluate_probes(const SourceProfile& profile, const MediumConfig<double>& cfg,
                                        const ScaleRegime<double>& regime, const InterfaceRealization& realization,
                                        Side side, const LateralGrid& footprint, const OmegaGrid& omega,
                                        const std::vector<ProbeLayout>& layouts, SimulationReport* report)
{
    validate(cfg);
    validate(profile);
    const auto check = propagating_mode_check(profile, cfg, regime.epsilon);
    if (!check.ok) throw std::domain_error("evaluate_probes: declared source band excites non-propagating modes");
    const SideSetup setup = side_setup(side, cfg);
    const Matrix2<double> p1 = cfg.z_int * cfg.c0 * paraxial_matrix(cfg, 0);
    const Matrix2<double> p2 = setup.second.z * cfg.speed(setup.second.medium) * paraxial_matrix(cfg, setup.second.medium);
    if (!is_diagonal(p1) || !is_diagonal(p2)) throw std::invalid_argument("evaluate_probes: k0 must lie along a grid axis");
    const bool flat = is_flat(realization);
    if (!flat) require_match(realization.grid, screen_grid(footprint, cfg, regime));

    std::vector<double> y1(footprint.n1), y2(footprint.n2);
    for (int i = 0; i < footprint.n1; ++i) y1[i] = footprint.coord1(i);
    for (int i = 0; i < footprint.n2; ++i) y2[i] = footprint.coord2(i);

    // Second-axis probe coordinates shared by all layouts; the footprint is contracted against them once per slice.
    std::vector<double> y2_all;
    std::vector<std::vector<int>> y2_col(layouts.size());
    for (size_t l = 0; l < layouts.size(); ++l)
        for (double v : layouts[l].y2) {
            auto it = std::find(y2_all.begin(), y2_all.end(), v);
            if (it == y2_all.end()) {
                y2_col[l].push_back(static_cast<int>(y2_all.size()));
                y2_all.push_back(v);
            } else {
                y2_col[l].push_back(static_cast<int>(it - y2_all.begin()));
            }
        }

    std::vector<ProbeField> out(layouts.size());
    for (size_t l = 0; l < layouts.size(); ++l) {
        out[l].layout = layouts[l];
        out[l].omega = omega;
        out[l].spectrum = Eigen::MatrixXcd::Zero(layouts[l].size(), omega.n);
        out[l].frame = make_frame(setup.frame, cfg, regime.epsilon);
    }

    SimulationReport rep;
    const auto slices = active_slices(profile, omega);
    const double t_peak = profile.temporal_spectrum(profile.omega_c);
    RowMajorC h(footprint.n1, footprint.n2);
    RowMajorC screen(footprint.n1, footprint.n2), step(footprint.n1, footprint.n2);
    int prev = -2;
    for (int m : slices) {
        const double w = omega.omega(m);
        // e^{i omega tau V} advanced by a unit-modulus step between consecutive slices.
        if (!flat) {
            if (m == prev + 1) {
                screen = screen.cwiseProduct(step);
            } else {
                for (int i = 0; i < footprint.size(); ++i) {
                    screen.data()[i] = std::exp(cplx(0, w * setup.tau * realization.values(i)));
                    step.data()[i] = std::exp(cplx(0, omega.d_omega * setup.tau * realization.values(i)));
                }
            }
        }
        prev = m;
        const double t = profile.temporal_spectrum(w);
        Eigen::VectorXcd g1(footprint.n1), g2(footprint.n2);
        for (int i = 0; i < footprint.n1; ++i) g1(i) = beam_axis(w, profile.beam_width, p1(0, 0), y1[i]);
        for (int i = 0; i < footprint.n2; ++i) g2(i) = t * beam_axis(w, profile.beam_width, p1(1, 1), y2[i]);
        h = g1 * g2.transpose();
        const EdgeEnergy ee = edge_energy(h.data(), footprint);
        const double ef = ee.total > 0 ? std::norm(t / t_peak) * ee.edge / ee.total : 0.0;
        rep.max_edge_fraction = std::max(rep.max_edge_fraction, ef);
        if (ef > edge_threshold)
            throw std::runtime_error("evaluate_probes: beam energy beyond the footprint exceeds 1e-6");
        if (!flat) h = h.cwiseProduct(screen);
        const RowMajorC e2 = fresnel_axis(w, p2(1, 1), y2_all, y2);
        const Eigen::MatrixXcd hm = h * e2.transpose();
        const double scale = setup.prefactor * footprint.cell_area();
        for (size_t l = 0; l < layouts.size(); ++l) {
            const auto& layout = layouts[l];
            const RowMajorC e1 = fresnel_axis(w, p2(0, 0), layout.y1, y1);
            const Eigen::MatrixXcd u = e1 * hm;
            const size_t n2 = layout.y2.size();
            for (size_t a = 0; a < layout.y1.size(); ++a)
                for (size_t b = 0; b < n2; ++b) out[l].spectrum(a * n2 + b, m) = scale * u(a, y2_col[l][b]);
        }
        rep.slices_computed++;
    }
    for (auto& f : out) fill_negative(f.spectrum, slices, omega.n);
    if (report) *report = rep;
    return out;
}

ProbeField evaluate_probes(const SourceProfile& profile, const MediumConfig<double>& cfg,
                           const ScaleRegime<double>& regime, const InterfaceRealization& realization, Side side,
                           const LateralGrid& footprint, const OmegaGrid& omega, const ProbeLayout& layout,
                           SimulationReport* report)
{
    return evaluate_probes(profile, cfg, regime, realization, side, footprint, omega,
                           std::vector<ProbeLayout>{layout}, report)
        .front();
}

Eigen::MatrixXd probe_time_samples(const ProbeField& field, const std::vector<double>& s)
{
    const auto& om = field.omega;
    Eigen::MatrixXcd phase(om.n, s.size());
    for (int m = 0; m < om.n; ++m)
        for (size_t j = 0; j < s.size(); ++j) phase(m, j) = std::exp(cplx(0, -om.omega(m) * s[j]));
    // The unpaired Nyquist column carries no band energy and is left out.
    phase.row(0).setZero();
    return (field.spectrum * phase).real() * (om.d_omega / (2 * pi));
}

WaveField random_specular_prediction(const SourceProfile& profile, const MediumConfig<double>& cfg,
                                     const ScaleRegime<double>& regime, const InterfaceRealization& realization,
                                     const SimulationGrid& grid, Side side)
{
    ProbeLayout layout;
    for (int i = 0; i < grid.lateral.n1; ++i) layout.y1.push_back(grid.lateral.coord1(i));
    for (int i = 0; i < grid.lateral.n2; ++i) layout.y2.push_back(grid.lateral.coord2(i));
    const ProbeField pf = evaluate_probes(profile, cfg, regime, realization, side, grid.lateral, grid.omega, layout);
    WaveField out;
    out.lateral = grid.lateral;
    out.omega = grid.omega;
    out.spectrum = pf.spectrum;
    out.frame = pf.frame;
    out.z = side == Side::Reflected ? 0.0 : cfg.z_tr;
    return out;
}

std::vector<double> window_specular(const WaveField& field, const ScaleRegime<double>& regime,
                                    const std::vector<WindowPoint>& points)
{
    const auto& lat = field.lateral;
    const auto& om = field.omega;
    const Frame& f = field.frame;
    const double se = std::sqrt(f.epsilon);
    const double eg = regime.correlation_length();
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& wp : points) {
        // Lab coordinates of the window point, then back into the field's own frame.
        LabPoint lab{f.t_obs + se * f.k0.dot(wp.y) + eg * f.k0.dot(wp.y_tilde) + f.epsilon * wp.s,
                     f.x_obs + se * wp.y + eg * wp.y_tilde};
        const FramePoint fp = to_frame(f, lab);
        if (std::abs(fp.s) > om.period() / 2) throw std::out_of_range("window_specular: time outside the simulated window");
        const double x1 = fp.Y(0) / lat.d1 + lat.n1 / 2;
        const double x2 = fp.Y(1) / lat.d2 + lat.n2 / 2;
        const int b1 = static_cast<int>(std::floor(x1)) - 1;
        const int b2 = static_cast<int>(std::floor(x2)) - 1;
        if (b1 < 0 || b2 < 0 || b1 + 3 >= lat.n1 || b2 + 3 >= lat.n2)
            throw std::out_of_range("window_specular: point outside the simulated lateral grid");
        const auto weights = [](double x, int base) {
            std::array<double, 4> w{};
            for (int a = 0; a < 4; ++a) {
                double v = 1;
                for (int b = 0; b < 4; ++b)
                    if (b != a) v *= (x - (base + b)) / double(a - b);
                w[a] = v;
            }
            return w;
        };
        const auto w1 = weights(x1, b1);
        const auto w2 = weights(x2, b2);
        Eigen::VectorXcd phase(om.n);
        for (int m = 0; m < om.n; ++m) phase(m) = std::exp(cplx(0, -om.omega(m) * fp.s));
        double acc = 0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                const int i = lat.index(b1 + a, b2 + b);
                const cplx u = field.spectrum.row(i).transpose().cwiseProduct(phase).sum();
                acc += w1[a] * w2[b] * u.real();
            }
        out.push_back(acc * om.d_omega / (2 * pi));
    }
    return out;
}

double JumpResiduals::max() const
{
    return std::max({source_jump, source_derivative_jump, interface_value, interface_derivative});
}

JumpResiduals jump_condition_check(const SourceProfile& profile, const MediumConfig<double>& cfg, double epsilon,
                                   double source_scale)
{
    validate(cfg);
    JumpResiduals r;
    const double se = std::sqrt(epsilon);
    const double lo = std::max(profile.band_lo(), 1e-3), hi = profile.band_hi();
    const double qm = profile.q_max();
    const double peak = std::abs(source_scale * profile.spectrum(profile.omega_c, Eigen::Vector2d::Zero()));
    for (int iw = 0; iw < 17; ++iw) {
        const double w = lo + (hi - lo) * iw / 16.0;
        for (int iq = 0; iq < 49; ++iq) {
            const Eigen::Vector2d q(qm * ((iq / 7) - 3) / 3.0, qm * ((iq % 7) - 3) / 3.0);
            const Eigen::Vector2d k = cfg.k0 / se + q;
            double s0, s1;
            try {
                s0 = vertical_slowness_eps(cfg, 0, k, epsilon);
                s1 = vertical_slowness_eps(cfg, 1, k, epsilon);
            } catch (const std::domain_error&) {
                continue;
            }
            const cplx psi = source_scale * profile.spectrum(w, q);
            const double e2 = epsilon * epsilon;
            const double r0 = std::sqrt(w * s0), r1 = std::sqrt(w * s1);
            const double ratio = std::sqrt(s0 / s1);
            const double tp = (ratio + 1 / ratio) / 2, tm = (ratio - 1 / ratio) / 2;
            const cplx carrier = std::exp(cplx(0, w * s0 * cfg.z_int / epsilon));
            const cplx a0 = e2 * r0 / 2 * psi * carrier;
            const cplx b_ref = tm / tp * a0;
            const cplx a_tr = a0 / tp;
            const cplx b0 = -e2 * r0 / 2 * psi + b_ref * carrier;
            const cplx ik0(0, w * s0 / epsilon), ik1(0, w * s1 / epsilon);
            // Values and z-derivatives at z = 0^-, 0^+, z_int^-, z_int^+.
            const cplx u0m = b0 / r0;
            const cplx du0m = -ik0 * b0 / r0;
            const cplx up = a0 / r0 / carrier, bp = b_ref / r0 * carrier;
            const cplx u0p = up + bp;
            const cplx du0p = ik0 * (up - bp);
            const cplx uim = (a0 + b_ref) / r0;
            const cplx duim = ik0 * (a0 - b_ref) / r0;
            const cplx uip = a_tr / r1;
            const cplx duip = ik1 * a_tr / r1;
            const double scale = e2 * std::max(peak, 1e-300);
            const double dscale = scale * w * s0 / epsilon;
            r.source_jump = std::max(r.source_jump, std::abs(u0p - u0m - e2 * psi) / scale);
            r.source_derivative_jump = std::max(r.source_derivative_jump, std::abs(du0p - du0m) / dscale);
            r.interface_value = std::max(r.interface_value, std::abs(uip - uim) / scale);
            r.interface_derivative = std::max(r.interface_derivative, std::abs(duip - duim) / dscale);
            r.modes_checked++;
        }
    }
    if (peak == 0) r = JumpResiduals{0, 0, 0, 0, r.modes_checked};
    return r;
}

} // namespace roughscatter
