#include "roughscatter/ensemble.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace roughscatter {

using nlohmann::json;

namespace {

constexpr double pi = 3.14159265358979323846;

const std::map<OutputKind, std::string>& output_names()
{
    static const std::map<OutputKind, std::string> names{
        {OutputKind::Specular, "specular"},         {OutputKind::SpeckleStats, "speckle-stats"},
        {OutputKind::SnellTables, "snell-tables"},  {OutputKind::ScatteringDist, "scattering-dist"},
        {OutputKind::Validation, "validation"},     {OutputKind::Ellipses, "ellipses"}};
    return names;
}

/// Rejects keys of `j` outside `allowed`.
void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) throw ConfigError(where + ": object expected");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out)
{
    if (j.contains(key)) out = j.at(key).get<T>();
}

Eigen::Vector2d read_vec2(const json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 2) throw ConfigError(where + ": two-element array expected");
    return {j[0].get<double>(), j[1].get<double>()};
}

json vec2(const Eigen::Vector2d& v) { return json::array({v(0), v(1)}); }

std::vector<double> centered(int n, double h)
{
    std::vector<double> t;
    for (int i = 0; i < n; ++i) t.push_back((i - n / 2) * h);
    return t;
}

std::string side_name(Side s) { return s == Side::Reflected ? "reflected" : "transmitted"; }

/// Nearest omega-grid index of a positive frequency.
int omega_index(const OmegaGrid& om, double w)
{
    const int m = static_cast<int>(std::lround(w / om.d_omega)) + om.n / 2;
    if (m <= om.n / 2 || m >= om.n) throw std::invalid_argument("omega outside the positive half of the grid");
    return m;
}

LateralGrid speckle_footprint(const ExperimentConfig& cfg)
{
    LateralGrid fp = cfg.speckle.footprint;
    if (fp.d1 <= 0 || fp.d2 <= 0) fp.d1 = fp.d2 = cfg.regime.ell() / 8;
    return fp;
}

} // namespace

std::string to_string(OutputKind k) { return output_names().at(k); }

OutputKind output_kind_from_string(const std::string& s)
{
    for (const auto& [k, name] : output_names())
        if (name == s) return k;
    throw ConfigError("outputs: unknown output '" + s + "'");
}

void validate(const ExperimentConfig& c)
{
    try {
        validate(c.medium);
        validate(c.regime);
        validate(c.interface);
        validate(c.source);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const auto prop = propagating_mode_check(c.source, c.medium, c.regime.epsilon);
    if (!prop.ok)
        throw ConfigError("source: declared band excites non-propagating modes (margin " + format_double(prop.margin)
                          + ")");
    if (c.lateral.n1 < 8 || c.lateral.n2 < 8 || !(c.lateral.d1 > 0) || !(c.lateral.d2 > 0))
        throw ConfigError("grid: lateral grid needs n >= 8 and d > 0");
    if (c.omega.n < 8 || c.omega.n % 2 || !(c.omega.d_omega > 0))
        throw ConfigError("grid: omega grid needs an even n >= 8 and d_omega > 0");
    if (c.omega.n / 2 * c.omega.d_omega <= c.source.band_hi())
        throw ConfigError("grid: omega Nyquist must exceed the declared band edge " + format_double(c.source.band_hi()));
    if (c.p_grid.n < 8 || !(c.p_grid.dp > 0)) throw ConfigError("scattering: p grid needs n >= 8 and dp > 0");
    if (!(c.scattering_omega > 0)) throw ConfigError("scattering: omega > 0 required");
    if (c.realizations < 1) throw ConfigError("realizations >= 1 required");
    if (c.outputs.empty()) throw ConfigError("outputs: at least one output required");
    for (double s : c.ellipse_s_bar)
        if (!(s >= 0)) throw ConfigError("ellipse_s_bar: values >= 0 required");
    if (c.snell.p_n < 2 || !(c.snell.p_max > 0) || c.snell.roughness < 0)
        throw ConfigError("snell: p_n >= 2, p_max > 0 and roughness >= 0 required");
    const bool speckle = std::count(c.outputs.begin(), c.outputs.end(), OutputKind::SpeckleStats) > 0;
    if (speckle) {
        if (!(c.regime.gamma > 0.5)) throw ConfigError("speckle-stats: gamma > 1/2 required");
        if (c.realizations < 100) throw ConfigError("speckle-stats: at least 100 realizations required");
        if (c.speckle.y_bars.empty()) throw ConfigError("speckle: at least one y_bar required");
        if (c.speckle.n_tilde < 5 || c.speckle.n_tilde % 2 == 0 || !(c.speckle.tilde_step > 0))
            throw ConfigError("speckle: odd n_tilde >= 5 and tilde_step > 0 required");
    }
}

ExperimentConfig parse_config(const std::string& text)
{
    ExperimentConfig c;
    try {
        const json j = json::parse(text);
        check_keys(j, "config", {"schema_version", "name", "medium", "regime", "interface", "source", "grid",
                                 "scattering", "realizations", "master_seed", "outputs", "snell", "speckle",
                                 "ellipse_s_bar"});
        if (!j.contains("schema_version") || j.at("schema_version").get<int>() != ExperimentConfig::schema_version)
            throw ConfigError("config: schema_version 1 required");
        read(j, "name", c.name);
        if (j.contains("medium")) {
            const auto& m = j.at("medium");
            check_keys(m, "medium", {"c0", "c1", "z_int", "z_tr", "k0"});
            read(m, "c0", c.medium.c0);
            read(m, "c1", c.medium.c1);
            read(m, "z_int", c.medium.z_int);
            read(m, "z_tr", c.medium.z_tr);
            if (m.contains("k0")) c.medium.k0 = read_vec2(m.at("k0"), "medium.k0");
        }
        if (j.contains("regime")) {
            const auto& r = j.at("regime");
            check_keys(r, "regime", {"epsilon", "gamma"});
            read(r, "epsilon", c.regime.epsilon);
            read(r, "gamma", c.regime.gamma);
        }
        if (j.contains("interface")) {
            const auto& i = j.at("interface");
            check_keys(i, "interface", {"sigma_v", "correlation_radius", "family", "marginal"});
            read(i, "sigma_v", c.interface.sigma_v);
            read(i, "correlation_radius", c.interface.correlation_radius);
            if (i.contains("family") && i.at("family").get<std::string>() != "gaussian")
                throw ConfigError("interface.family: only 'gaussian' is available");
            if (i.contains("marginal") && i.at("marginal").get<std::string>() != "gaussian")
                throw ConfigError("interface.marginal: only 'gaussian' is available");
        }
        if (j.contains("source")) {
            const auto& s = j.at("source");
            check_keys(s, "source", {"omega_c", "bandwidth", "beam_width"});
            read(s, "omega_c", c.source.omega_c);
            read(s, "bandwidth", c.source.bandwidth);
            read(s, "beam_width", c.source.beam_width);
        }
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            check_keys(g, "grid", {"lateral_n", "lateral_d", "omega_n", "d_omega"});
            if (g.contains("lateral_n")) {
                const auto n = g.at("lateral_n").get<std::vector<int>>();
                if (n.size() != 2) throw ConfigError("grid.lateral_n: two-element array expected");
                c.lateral.n1 = n[0];
                c.lateral.n2 = n[1];
            }
            if (g.contains("lateral_d")) {
                const auto d = read_vec2(g.at("lateral_d"), "grid.lateral_d");
                c.lateral.d1 = d(0);
                c.lateral.d2 = d(1);
            }
            read(g, "omega_n", c.omega.n);
            read(g, "d_omega", c.omega.d_omega);
        }
        if (j.contains("scattering")) {
            const auto& s = j.at("scattering");
            check_keys(s, "scattering", {"p_n", "dp", "omega"});
            read(s, "p_n", c.p_grid.n);
            read(s, "dp", c.p_grid.dp);
            read(s, "omega", c.scattering_omega);
        }
        read(j, "realizations", c.realizations);
        read(j, "master_seed", c.master_seed);
        if (j.contains("outputs")) {
            c.outputs.clear();
            for (const auto& o : j.at("outputs")) c.outputs.push_back(output_kind_from_string(o.get<std::string>()));
        }
        if (j.contains("snell")) {
            const auto& s = j.at("snell");
            check_keys(s, "snell", {"roughness", "p_max", "p_n"});
            read(s, "roughness", c.snell.roughness);
            read(s, "p_max", c.snell.p_max);
            read(s, "p_n", c.snell.p_n);
        }
        if (j.contains("speckle")) {
            const auto& s = j.at("speckle");
            check_keys(s, "speckle", {"y_bars", "n_tilde", "tilde_step", "footprint_n", "footprint_d", "omega_n",
                                      "d_omega"});
            if (s.contains("y_bars")) {
                c.speckle.y_bars.clear();
                for (const auto& y : s.at("y_bars")) c.speckle.y_bars.push_back(read_vec2(y, "speckle.y_bars"));
            }
            read(s, "n_tilde", c.speckle.n_tilde);
            read(s, "tilde_step", c.speckle.tilde_step);
            if (s.contains("footprint_n")) c.speckle.footprint.n1 = c.speckle.footprint.n2 = s.at("footprint_n").get<int>();
            if (s.contains("footprint_d")) c.speckle.footprint.d1 = c.speckle.footprint.d2 = s.at("footprint_d").get<double>();
            read(s, "omega_n", c.speckle.omega.n);
            read(s, "d_omega", c.speckle.omega.d_omega);
        }
        read(j, "ellipse_s_bar", c.ellipse_s_bar);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c)
{
    json j;
    j["schema_version"] = ExperimentConfig::schema_version;
    j["name"] = c.name;
    j["medium"] = {{"c0", c.medium.c0}, {"c1", c.medium.c1}, {"z_int", c.medium.z_int}, {"z_tr", c.medium.z_tr},
                   {"k0", vec2(c.medium.k0)}};
    j["regime"] = {{"epsilon", c.regime.epsilon}, {"gamma", c.regime.gamma}};
    j["interface"] = {{"sigma_v", c.interface.sigma_v}, {"correlation_radius", c.interface.correlation_radius},
                      {"family", "gaussian"}, {"marginal", "gaussian"}};
    j["source"] = {{"omega_c", c.source.omega_c}, {"bandwidth", c.source.bandwidth},
                   {"beam_width", c.source.beam_width}};
    j["grid"] = {{"lateral_n", {c.lateral.n1, c.lateral.n2}}, {"lateral_d", {c.lateral.d1, c.lateral.d2}},
                 {"omega_n", c.omega.n}, {"d_omega", c.omega.d_omega}};
    j["scattering"] = {{"p_n", c.p_grid.n}, {"dp", c.p_grid.dp}, {"omega", c.scattering_omega}};
    j["realizations"] = c.realizations;
    j["master_seed"] = c.master_seed;
    json outs = json::array();
    for (auto o : c.outputs) outs.push_back(to_string(o));
    j["outputs"] = outs;
    j["snell"] = {{"roughness", c.snell.roughness}, {"p_max", c.snell.p_max}, {"p_n", c.snell.p_n}};
    json ys = json::array();
    for (const auto& y : c.speckle.y_bars) ys.push_back(vec2(y));
    j["speckle"] = {{"y_bars", ys},
                    {"n_tilde", c.speckle.n_tilde},
                    {"tilde_step", c.speckle.tilde_step},
                    {"footprint_n", c.speckle.footprint.n1},
                    {"footprint_d", c.speckle.footprint.d1},
                    {"omega_n", c.speckle.omega.n},
                    {"d_omega", c.speckle.omega.d_omega}};
    j["ellipse_s_bar"] = c.ellipse_s_bar;
    return j.dump(2);
}

ExperimentConfig preset(const std::string& name)
{
    ExperimentConfig c;
    c.name = name;
    if (name == "flat-anchor" || name == "speckle-default") {
        c.medium.c0 = 1.5;
        c.medium.c1 = 1.0;
        c.medium.k0 = {0.3, 0.0};
        c.medium.z_int = 0.5;
        c.medium.z_tr = 1.0;
        c.regime = {1e-3, 0.75};
        c.lateral = {256, 256, 0.09375, 0.09375};
        c.omega = {64, 0.35};
        if (name == "flat-anchor") {
            c.source = make_default_profile(2 * pi, 0.8, 0.5);
            c.outputs = {OutputKind::Validation};
            c.realizations = 1;
        } else {
            c.source = make_default_profile(2 * pi, 1.0, 0.5);
            c.outputs = {OutputKind::SpeckleStats};
            c.realizations = 200;
            c.omega = {320, 0.08};
        }
        return c;
    }
    if (name == "fig-speckle-ellipses") {
        c.medium.c0 = 1.5;
        c.medium.c1 = 1.0;
        c.medium.k0 = {0.9 / 1.5, 0.0};
        c.medium.z_int = 1.0;
        c.medium.z_tr = 2.0;
        c.source = make_default_profile(3.0, 0.4, 2.0);
        c.omega = {128, 0.1};
        c.outputs = {OutputKind::Ellipses};
        c.ellipse_s_bar = {0.005, 0.01, 0.02, 0.04, 0.08, 0.16};
        return c;
    }
    if (name == "fig-angles") {
        c.medium.c0 = 1.5;
        c.medium.c1 = 1.0;
        c.medium.k0 = {std::sin(pi / 4) / 1.5, 0.0};
        c.medium.z_int = 1.0;
        c.medium.z_tr = 2.0;
        c.regime = {1e-3, 1.0};
        c.source = make_default_profile(3.0, 0.4, 2.0);
        c.omega = {128, 0.1};
        c.outputs = {OutputKind::SnellTables};
        // gamma = 1 puts the wavelength at the correlation length
        c.snell = {1.0, 0.5, 41};
        return c;
    }
    throw ConfigError("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() { return {"flat-anchor", "fig-speckle-ellipses", "fig-angles", "speckle-default"}; }

void parallel_for_realizations(int n, int jobs, const std::function<void(int)>& body)
{
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

FlatAnchorReport flat_anchor_check(const SourceProfile& profile, const MediumConfig<double>& cfg,
                                   const ScaleRegime<double>& regime, const SimulationGrid& grid)
{
    const auto flat = flat_realization(screen_grid(grid.lateral, cfg, regime));
    std::vector<double> s;
    for (int j = 0; j < grid.omega.n; ++j) s.push_back(grid.omega.s(j));
    FlatAnchorReport r;
    const auto rel = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).norm() / b.norm(); };
    const WaveField ref = simulate_reflected(profile, cfg, regime, flat, grid);
    r.reflected_error = rel(ref.time_domain(), flat_specular_closed_form(profile, cfg, Side::Reflected, grid.lateral, s));
    const WaveField tr = simulate_transmitted(profile, cfg, regime, flat, grid);
    r.transmitted_error = rel(tr.time_domain(), flat_specular_closed_form(profile, cfg, Side::Transmitted, grid.lateral, s));
    return r;
}

SpecularStudyResult run_specular_study(const SpecularStudySpec& spec)
{
    const auto g = screen_grid(spec.footprint, spec.cfg, spec.regime);
    const auto flat = evaluate_probes(spec.source, spec.cfg, spec.regime, flat_realization(g), spec.side,
                                      spec.footprint, spec.omega, spec.layout);
    std::vector<int> slices;
    for (double w : spec.damping_omegas) slices.push_back(omega_index(spec.omega, w));

    const int n = spec.realizations;
    std::vector<Eigen::VectorXd> wave(n), damp(n);
    SpecularStudyResult out;
    for (int i = 0; i < n; ++i) out.seeds.push_back(realization_seed(spec.master_seed, 0, i));
    parallel_for_realizations(n, spec.jobs, [&](int i) {
        const auto real = synthesize(spec.model, g, out.seeds[i]);
        const auto pf = evaluate_probes(spec.source, spec.cfg, spec.regime, real, spec.side, spec.footprint,
                                        spec.omega, spec.layout);
        const Eigen::MatrixXd u = probe_time_samples(pf, spec.s);
        wave[i] = Eigen::Map<const Eigen::VectorXd>(u.data(), u.size());
        damp[i].resize(slices.size());
        for (size_t k = 0; k < slices.size(); ++k) damp[i](k) = damping_projection(pf, flat, slices[k]).real();
    });
    EnsembleAccumulator wa, da;
    for (int i = 0; i < n; ++i) {
        wa.add(wave[i]);
        if (!slices.empty()) da.add(damp[i]);
    }
    const int np = spec.layout.size(), ns = static_cast<int>(spec.s.size());
    out.mean = Eigen::Map<const Eigen::MatrixXd>(wa.mean().data(), np, ns);
    out.standard_error = n > 1 ? Eigen::MatrixXd(Eigen::Map<const Eigen::MatrixXd>(wa.standard_error().data(), np, ns))
                               : Eigen::MatrixXd::Zero(np, ns);
    std::vector<FramePoint> pts;
    for (int j = 0; j < ns; ++j)
        for (size_t a = 0; a < spec.layout.y1.size(); ++a)
            for (size_t b = 0; b < spec.layout.y2.size(); ++b)
                pts.push_back({spec.s[j], {spec.layout.y1[a], spec.layout.y2[b]}});
    const auto pred = homogenized_specular_at(spec.side, spec.source, spec.cfg, spec.model, pts);
    out.prediction = Eigen::Map<const Eigen::MatrixXd>(pred.data(), np, ns);
    out.relative_l2 = (out.mean - out.prediction).norm() / out.prediction.norm();
    const double tau = screen_slowness(spec.side, spec.cfg);
    for (size_t k = 0; k < slices.size(); ++k) {
        DampingEstimate d;
        d.omega = spec.omega.omega(slices[k]);
        d.mean = da.mean()(k);
        d.standard_error = n > 1 ? da.standard_error()(k) : 0.0;
        d.expected = characteristic_function(spec.model, d.omega * tau).real();
        out.damping.push_back(d);
    }
    return out;
}

double CutComparison::relative_l2() const { return (mean - kernel).norm() / kernel.norm(); }

SpeckleStudyResult run_speckle_study(const SpeckleStudySpec& spec)
{
    const auto& reg = spec.regime;
    const double pre = speckle_prefactor(reg);
    const double width = std::pow(reg.epsilon, 2 * reg.gamma - 1);
    const auto kern = kernel_C(spec.side, spec.cfg, spec.model, spec.source, width);
    const int nt = spec.n_tilde, half = nt / 2;
    const auto t = centered(nt, spec.tilde_step);

    std::vector<CorrelationCut> cuts{{0, 0, spec.time_lags}, {spec.shifted_k, 0, spec.time_lags}};
    for (int k = 0; k <= half; ++k) cuts.push_back({k, 0, {0.0}});
    for (int k = 0; k <= half; ++k) cuts.push_back({0, k, {0.0}});

    std::vector<ProbeLayout> layouts;
    std::vector<double> supports;
    std::vector<std::vector<double>> profile_s;
    for (const auto& yb : spec.y_bars) {
        layouts.push_back(speckle_layout(reg, yb, Eigen::Vector2d::Zero(), t, t));
        supports.push_back(kern.support(yb));
        std::vector<double> s;
        for (int j = -160; j <= 160; ++j) s.push_back(pre * supports.back() + 0.05 * j);
        profile_s.push_back(s);
    }
    // independence probes at the middle y_bar, separated along e2 on the beam scale
    const size_t mid = spec.y_bars.size() / 2;
    std::vector<double> t_ind;
    for (int a = -2; a <= 2; ++a) t_ind.push_back(a * (half / 2) * spec.tilde_step);
    layouts.push_back(speckle_layout(reg, spec.y_bars[mid], {0.0, -spec.independence_offset}, t_ind, {0.0}));
    layouts.push_back(speckle_layout(reg, spec.y_bars[mid], {0.0, spec.independence_offset}, t_ind, {0.0}));

    // moment probes: every quarter of the y_tilde_1 axis on the two outer y_tilde_2 rows
    std::vector<int> moment_rows;
    for (int a = 0; a < nt; a += std::max(1, half / 2))
        for (int b : {0, nt - 1}) moment_rows.push_back(a * nt + b);

    const int n = spec.realizations, ny = static_cast<int>(spec.y_bars.size());
    const auto g = screen_grid(spec.footprint, spec.cfg, reg);
    struct Sample {
        std::vector<std::vector<Eigen::VectorXd>> cuts;
        std::vector<Eigen::VectorXd> profile;
        Eigen::VectorXd moments, ind_a, ind_b;
    };
    std::vector<Sample> samples(n);
    SpeckleStudyResult out;
    for (int i = 0; i < n; ++i) out.seeds.push_back(realization_seed(spec.master_seed, 0, i));
    parallel_for_realizations(n, spec.jobs, [&](int i) {
        const auto real = synthesize(spec.model, g, out.seeds[i]);
        const auto fields = evaluate_probes(spec.source, spec.cfg, reg, real, spec.side, spec.footprint, spec.omega,
                                            layouts);
        Sample& smp = samples[i];
        std::vector<double> mom;
        for (int l = 0; l < ny; ++l) {
            smp.cuts.push_back(integrated_correlation(fields[l], reg, cuts));
            smp.profile.push_back(probe_intensity(fields[l], profile_s[l]));
            std::vector<double> st;
            for (double dt : spec.sample_times) st.push_back(pre * supports[l] + dt);
            const Eigen::MatrixXd u = pre * probe_time_samples(fields[l], st);
            for (int r : moment_rows)
                for (Eigen::Index c = 0; c < u.cols(); ++c) mom.push_back(u(r, c));
        }
        smp.moments = Eigen::Map<const Eigen::VectorXd>(mom.data(), mom.size());
        std::vector<double> st;
        for (double dt : spec.sample_times) st.push_back(pre * supports[mid] + dt);
        const Eigen::MatrixXd a = pre * probe_time_samples(fields[ny], st);
        const Eigen::MatrixXd b = pre * probe_time_samples(fields[ny + 1], st);
        smp.ind_a = Eigen::Map<const Eigen::VectorXd>(a.data(), a.size());
        smp.ind_b = Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
    });

    out.moment_samples.resize(n, samples[0].moments.size());
    out.independence_a.resize(n, samples[0].ind_a.size());
    out.independence_b.resize(n, samples[0].ind_b.size());
    for (int i = 0; i < n; ++i) {
        out.moment_samples.row(i) = samples[i].moments.transpose();
        out.independence_a.row(i) = samples[i].ind_a.transpose();
        out.independence_b.row(i) = samples[i].ind_b.transpose();
    }
    for (int l = 0; l < ny; ++l) {
        SpeckleProbeResult pr;
        pr.y_bar = spec.y_bars[l];
        pr.support = supports[l];
        pr.mollifier_width = width;
        std::vector<EnsembleAccumulator> acc(cuts.size());
        EnsembleAccumulator prof;
        for (int i = 0; i < n; ++i) {
            for (size_t c = 0; c < cuts.size(); ++c) acc[c].add(samples[i].cuts[l][c]);
            prof.add(samples[i].profile[l]);
        }
        const auto make = [&](const std::string& name, const std::vector<int>& idx, bool time_axis) {
            CutComparison cc;
            cc.name = name;
            std::vector<double> m, se, k;
            for (int c : idx) {
                const auto mean = acc[c].mean();
                const auto err = n > 1 ? acc[c].standard_error() : Eigen::VectorXd::Zero(mean.size()).eval();
                for (size_t q = 0; q < cuts[c].ds.size(); ++q) {
                    const Eigen::Vector2d dy = Eigen::Vector2d(cuts[c].k1, cuts[c].k2) * spec.tilde_step;
                    cc.coordinate.push_back(time_axis ? cuts[c].ds[q] : dy.norm());
                    m.push_back(mean(q));
                    se.push_back(err(q));
                    // the estimator pairs (first, second) at offset (second - first); the kernel takes first - second
                    k.push_back(kern.integrated(pr.y_bar, -cuts[c].ds[q], -dy));
                }
            }
            cc.mean = Eigen::Map<Eigen::VectorXd>(m.data(), m.size());
            cc.standard_error = Eigen::Map<Eigen::VectorXd>(se.data(), se.size());
            cc.kernel = Eigen::Map<Eigen::VectorXd>(k.data(), k.size());
            return cc;
        };
        std::vector<int> e1, e2;
        for (int k = 0; k <= half; ++k) {
            e1.push_back(2 + k);
            e2.push_back(3 + half + k);
        }
        pr.cuts.push_back(make("time", {0}, true));
        pr.cuts.push_back(make("time-shifted", {1}, true));
        pr.cuts.push_back(make("y1", e1, false));
        pr.cuts.push_back(make("y2", e2, false));

        // mean intensity against s_bar, mollified over the window width (pre * width in s)
        const Eigen::VectorXd m = prof.mean();
        const auto& s = profile_s[l];
        const double ws = pre * width, h = s[1] - s[0];
        double best = -1;
        for (size_t j = 0; j < s.size(); ++j) {
            double acc_v = 0;
            for (size_t q = 0; q < s.size(); ++q) acc_v += h * mollifier(s[j] - s[q], ws) * m(q);
            pr.profile_s_bar.push_back(s[j] / pre);
            pr.profile.push_back(acc_v);
            if (acc_v > best) {
                best = acc_v;
                pr.peak_s_bar = s[j] / pre;
            }
        }
        out.probes.push_back(pr);
    }
    return out;
}

std::vector<SuiteResult> run_validation_suites(const ExperimentConfig& c)
{
    std::vector<SuiteResult> out;
    const auto add = [&](const std::string& name, bool pass, const std::string& detail) {
        out.push_back({name, pass, detail});
    };
    std::mt19937_64 rng(c.master_seed);
    std::uniform_real_distribution<double> u(0, 1);

    // medium algebra over random valid configurations
    double worst = 0;
    for (int k = 0; k < 200; ++k) {
        MediumConfig<double> m;
        m.c0 = 0.5 + 2 * u(rng);
        m.c1 = m.c0 * (0.1 + 0.89 * u(rng));
        const double a = 2 * pi * u(rng), r = 0.95 * u(rng) / m.c0;
        m.k0 = {r * std::cos(a), r * std::sin(a)};
        const auto rt = reflection_transmission_coefficients(m);
        worst = std::max(worst, std::abs(rt.R * rt.R + rt.T * rt.T - 1));
        for (int j = 0; j < 2; ++j)
            worst = std::max(worst, (paraxial_matrix(m, j) * paraxial_matrix_inverse(m, j)
                                     - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff());
        const auto geo = observation_geometry(m);
        worst = std::max(worst, std::abs(std::sin(geo.theta_inc) / m.c0 - std::sin(geo.theta_tr0) / m.c1));
    }
    add("medium", worst <= 1e-12, "max identity residual " + format_double(worst));

    // Snell: sine and tangent forms
    worst = 0;
    for (int k = 0; k < 1000; ++k) {
        SnellQuery<double> q;
        q.cfg = c.medium;
        if (q.cfg.k0.norm() == 0) q.cfg.k0 = {0.3, 0.0};
        q.side = k % 2 ? Side::Reflected : Side::Transmitted;
        q.roughness = 0.01 + 0.1 * u(rng);
        q.p = {u(rng) - 0.5, u(rng) - 0.5};
        try {
            worst = std::max(worst, std::abs(generalized_angle_sine_form(q) - generalized_angle_tangent_form(q)));
        } catch (const NoPropagatingAngle&) {
        }
    }
    add("snell", worst <= 1e-10, "max sine/tangent gap " + format_double(worst) + " rad");

    // interface: closed-form atom and Bochner positivity
    {
        const double v = scattering_slowness(Side::Reflected, c.medium), w = c.scattering_omega;
        const auto sd = scattering_distribution(c.interface, v, w, c.p_grid);
        const double atom = 4 * pi * pi * std::norm(characteristic_function(c.interface, w * v)) / (w * w);
        const double peak = sd.density.size() ? sd.density.maxCoeff() : 0.0;
        const bool ok = std::abs(sd.atom - atom) <= 1e-10 * atom && sd.density.minCoeff() >= -1e-8 * std::max(peak, 1e-300);
        add("interface", ok, "atom " + format_double(sd.atom) + " vs " + format_double(atom));
    }

    // characteristic function Monte Carlo over a seed sweep
    {
        int passed = 0;
        const double uu = 2 * c.scattering_omega * vertical_slowness(c.medium, 0);
        for (int k = 0; k < 100; ++k) {
            std::mt19937_64 g(realization_seed(c.master_seed, 11, k));
            std::normal_distribution<double> nd(0.0, c.interface.sigma_v);
            Eigen::VectorXd x(2000);
            for (auto& v : x) v = nd(g);
            const auto est = characteristic_function_mc(x, uu);
            const double ref = characteristic_function(c.interface, uu).real();
            passed += std::abs(est.mean.real() - ref) <= 3 * est.se_real + 1e-15;
        }
        add("interface-mc", passed >= 99, std::to_string(passed) + "/100 seeds within 3 standard errors");
    }

    // Gaussianity test calibration
    {
        const auto cal = calibrate_tests(200, 8, 200, c.master_seed);
        add("speckle-calibration", cal.pass_rate() >= 0.99, "pass rate " + format_double(cal.pass_rate()));
    }

    // flat anchor and jump conditions on the configured grid
    {
        const auto r = flat_anchor_check(c.source, c.medium, c.regime, {c.lateral, c.omega});
        add("flat-anchor", r.pass(), "reflected " + format_double(r.reflected_error) + ", transmitted "
                                         + format_double(r.transmitted_error));
        const auto jr = jump_condition_check(c.source, c.medium, c.regime.epsilon);
        add("jump-conditions", jr.max() <= 1e-8, "max residual " + format_double(jr.max()));
    }
    return out;
}

std::string tool_version() { return "roughscatter 1.0.0"; }

std::string RunManifest::to_json() const
{
    json j;
    j["config_hash"] = config_hash;
    j["master_seed"] = master_seed;
    j["realization_seeds"] = realization_seeds;
    j["tool_version"] = tool_version;
    json files = json::array();
    for (const auto& o : outputs) files.push_back({{"file", o.file}, {"sha256", o.sha256}});
    j["outputs"] = files;
    j["wall_seconds"] = wall_seconds;
    return j.dump(2);
}

std::vector<std::string> write_snell_tables(const ExperimentConfig& c, const std::filesystem::path& out)
{
    const double r = c.snell.roughness > 0 ? c.snell.roughness : c.regime.roughness_ratio();
    std::vector<std::string> files;
    const auto geo = observation_geometry(c.medium);
    for (Side side : {Side::Reflected, Side::Transmitted}) {
        std::vector<std::vector<double>> rows;
        for (int a = 0; a < c.snell.p_n; ++a)
            for (int b = 0; b < c.snell.p_n; ++b) {
                const double h = 2 * c.snell.p_max / (c.snell.p_n - 1);
                const Eigen::Vector2d p(-c.snell.p_max + a * h, -c.snell.p_max + b * h);
                double theta = std::numeric_limits<double>::quiet_NaN();
                try {
                    if (c.medium.k0.norm() == 0) {
                        theta = normal_incidence_angle(side, c.medium, p, r);
                    } else {
                        SnellQuery<double> q{side, p, r, c.medium};
                        theta = generalized_angle(q);
                    }
                } catch (const NoPropagatingAngle&) {
                }
                rows.push_back({p(0), p(1), theta, theta * 180 / pi});
            }
        const std::string name = "snell_" + side_name(side) + ".csv";
        write_csv(out / name, {"p1", "p2", "theta_rad", "theta_deg"}, rows);
        files.push_back(name);
    }
    json j = {{"roughness", r},
              {"theta_inc_rad", geo.theta_inc},
              {"theta_tr0_rad", geo.theta_tr0},
              {"theta_inc_deg", geo.theta_inc * 180 / pi},
              {"theta_tr0_deg", geo.theta_tr0 * 180 / pi}};
    write_text(out / "snell.json", j.dump(2) + "\n");
    files.push_back("snell.json");
    return files;
}

std::vector<std::string> write_scattering_distribution(const ExperimentConfig& c, const std::filesystem::path& out)
{
    std::vector<std::string> files;
    json report;
    for (Side side : {Side::Reflected, Side::Transmitted}) {
        const double v = scattering_slowness(side, c.medium);
        const auto sd = scattering_distribution(c.interface, v, c.scattering_omega, c.p_grid);
        std::vector<std::vector<double>> rows;
        for (int a = 0; a < c.p_grid.n; ++a)
            for (int b = 0; b < c.p_grid.n; ++b) rows.push_back({c.p_grid.coord(a), c.p_grid.coord(b), sd.density(a, b)});
        const std::string name = "scattering_" + side_name(side) + ".csv";
        write_csv(out / name, {"p1", "p2", "density"}, rows);
        files.push_back(name);
        report[side_name(side)] = {{"v", v},          {"omega", c.scattering_omega}, {"atom", sd.atom},
                                   {"mass", sd.mass}, {"warnings", sd.warnings}};
    }
    write_text(out / "scattering.json", report.dump(2) + "\n");
    files.push_back("scattering.json");
    return files;
}

std::vector<std::string> write_ellipses(const ExperimentConfig& c, const std::filesystem::path& out)
{
    std::vector<std::string> files;
    for (Side side : {Side::Reflected, Side::Transmitted}) {
        std::vector<std::vector<double>> rows;
        for (double sb : c.ellipse_s_bar) {
            const auto e = ellipse_support(side, c.medium, sb);
            for (int k = 0; k <= 180; ++k) {
                const double a = 2 * pi * k / 180;
                const Eigen::Vector2d y = e.point(a);
                rows.push_back({sb, a, y(0), y(1)});
            }
        }
        const std::string name = "ellipses_" + side_name(side) + ".csv";
        write_csv(out / name, {"s_bar", "angle", "y_bar1", "y_bar2"}, rows);
        files.push_back(name);
    }
    return files;
}

std::vector<std::string> write_realizations(const ExperimentConfig& c, const std::filesystem::path& out)
{
    std::vector<std::string> files;
    const auto g = screen_grid(c.lateral, c.medium, c.regime);
    for (int i = 0; i < c.realizations; ++i) {
        const auto r = synthesize(c.interface, g, realization_seed(c.master_seed, 0, i));
        char name[64];
        std::snprintf(name, sizeof name, "realization_%04d.bin", i);
        write_realization(out / name, r);
        files.push_back(name);
        if (i == 0) {
            std::vector<std::vector<double>> rows;
            for (int a = 0; a < g.n1; ++a)
                for (int b = 0; b < g.n2; ++b) {
                    const auto p = g.position(a, b);
                    rows.push_back({p(0), p(1), r.at(a, b)});
                }
            write_csv(out / "realization_0000.csv", {"y1", "y2", "V"}, rows);
            files.push_back("realization_0000.csv");
        }
    }
    return files;
}

namespace {

std::vector<std::string> write_validation(const ExperimentConfig& c, const std::filesystem::path& out)
{
    const auto r = flat_anchor_check(c.source, c.medium, c.regime, {c.lateral, c.omega});
    json j = {{"reflected_error", r.reflected_error},
              {"transmitted_error", r.transmitted_error},
              {"tolerance", r.tolerance},
              {"pass", r.pass()}};
    write_text(out / "validation.json", j.dump(2) + "\n");
    if (!r.pass())
        throw ResolutionError("flat anchor exceeds tolerance: reflected " + format_double(r.reflected_error)
                              + ", transmitted " + format_double(r.transmitted_error));
    return {"validation.json"};
}

std::vector<std::string> write_specular(const ExperimentConfig& c, const std::filesystem::path& out, int jobs)
{
    SpecularStudySpec spec;
    spec.cfg = c.medium;
    spec.regime = c.regime;
    spec.model = c.interface;
    spec.source = c.source;
    spec.footprint = c.lateral;
    spec.omega = c.omega;
    spec.layout = {centered(25, 0.25 * c.source.beam_width), {0.0}};
    for (int j = 0; j < c.omega.n; ++j) spec.s.push_back(c.omega.s(j));
    spec.damping_omegas = {c.source.omega_c};
    spec.realizations = c.realizations;
    spec.master_seed = c.master_seed;
    spec.jobs = jobs;
    const auto r = run_specular_study(spec);
    std::vector<std::vector<double>> rows;
    for (size_t a = 0; a < spec.layout.y1.size(); ++a)
        for (size_t j = 0; j < spec.s.size(); ++j)
            rows.push_back({spec.layout.y1[a], spec.s[j], r.mean(a, j), r.standard_error(a, j), r.prediction(a, j)});
    write_csv(out / "specular_mean.csv", {"Y1", "s", "mean", "standard_error", "homogenized"}, rows);
    json j = {{"relative_l2", r.relative_l2}, {"realizations", c.realizations}};
    for (const auto& d : r.damping)
        j["damping"].push_back({{"omega", d.omega}, {"mean", d.mean}, {"standard_error", d.standard_error},
                                {"expected", d.expected}});
    write_text(out / "specular.json", j.dump(2) + "\n");
    return {"specular_mean.csv", "specular.json"};
}

json moment_json(const MomentStatistic& m)
{
    return {{"value", m.value}, {"standard_error", m.standard_error}, {"expected", m.expected}, {"pass", m.pass}};
}

std::vector<std::string> write_speckle(const ExperimentConfig& c, const std::filesystem::path& out, int jobs)
{
    SpeckleStudySpec spec;
    spec.cfg = c.medium;
    spec.regime = c.regime;
    spec.model = c.interface;
    spec.source = c.source;
    spec.footprint = speckle_footprint(c);
    spec.omega = c.speckle.omega;
    spec.y_bars = c.speckle.y_bars;
    spec.n_tilde = c.speckle.n_tilde;
    spec.tilde_step = c.speckle.tilde_step;
    for (int k = -12; k <= 12; ++k) spec.time_lags.push_back(0.25 * k);
    spec.realizations = c.realizations;
    spec.master_seed = c.master_seed;
    spec.jobs = jobs;
    const auto r = run_speckle_study(spec);
    std::vector<std::string> files;
    json j;
    for (size_t l = 0; l < r.probes.size(); ++l) {
        const auto& p = r.probes[l];
        json pj = {{"y_bar", vec2(p.y_bar)},
                   {"support_s_bar", p.support},
                   {"peak_s_bar", p.peak_s_bar},
                   {"mollifier_width", p.mollifier_width}};
        for (const auto& cut : p.cuts) {
            std::vector<std::vector<double>> rows;
            for (Eigen::Index q = 0; q < cut.mean.size(); ++q)
                rows.push_back({cut.coordinate[q], cut.mean(q), cut.standard_error(q), cut.kernel(q)});
            const std::string name = "speckle_probe" + std::to_string(l) + "_" + cut.name + ".csv";
            write_csv(out / name, {"offset", "mean", "standard_error", "kernel"}, rows);
            files.push_back(name);
            pj["relative_l2"][cut.name] = cut.relative_l2();
        }
        std::vector<std::vector<double>> rows;
        for (size_t q = 0; q < p.profile.size(); ++q) rows.push_back({p.profile_s_bar[q], p.profile[q]});
        const std::string name = "speckle_probe" + std::to_string(l) + "_intensity.csv";
        write_csv(out / name, {"s_bar", "mollified_intensity"}, rows);
        files.push_back(name);
        j["probes"].push_back(pj);
    }
    const auto g = gaussianity_test(r.moment_samples);
    const auto ind = independence_test(r.independence_a, r.independence_b);
    j["gaussianity"] = {{"realizations", g.realizations}, {"probes", g.probes}, {"mean", moment_json(g.mean)},
                        {"third", moment_json(g.third)},  {"kurtosis", moment_json(g.kurtosis)}, {"pass", g.pass()}};
    j["independence"] = {{"applicable", ind.applicable}, {"correlation", moment_json(ind.correlation)},
                         {"pass", ind.pass()}};
    write_text(out / "speckle.json", j.dump(2) + "\n");
    files.push_back("speckle.json");
    return files;
}

} // namespace

RunManifest run_experiment(const ExperimentConfig& c, const std::filesystem::path& out, int jobs)
{
    validate(c);
    const auto t0 = std::chrono::steady_clock::now();
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
    const std::string cfg_text = config_to_json(c);
    write_text(out / "config.json", cfg_text + "\n");
    std::vector<std::string> files{"config.json"};
    const auto append = [&](const std::vector<std::string>& f) { files.insert(files.end(), f.begin(), f.end()); };
    for (auto kind : c.outputs) {
        switch (kind) {
        case OutputKind::Validation: append(write_validation(c, out)); break;
        case OutputKind::Specular: append(write_specular(c, out, jobs)); break;
        case OutputKind::SpeckleStats: append(write_speckle(c, out, jobs)); break;
        case OutputKind::SnellTables: append(write_snell_tables(c, out)); break;
        case OutputKind::ScatteringDist: append(write_scattering_distribution(c, out)); break;
        case OutputKind::Ellipses: append(write_ellipses(c, out)); break;
        }
    }
    RunManifest m;
    m.config_hash = sha256_hex(cfg_text);
    m.master_seed = c.master_seed;
    const bool random = std::count(c.outputs.begin(), c.outputs.end(), OutputKind::Specular)
                        || std::count(c.outputs.begin(), c.outputs.end(), OutputKind::SpeckleStats);
    if (random)
        for (int i = 0; i < c.realizations; ++i) m.realization_seeds.push_back(realization_seed(c.master_seed, 0, i));
    m.tool_version = tool_version();
    for (const auto& f : files) m.outputs.push_back({f, sha256_file(out / f)});
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_text(out / "manifest.json", m.to_json() + "\n");
    return m;
}

} // namespace roughscatter
