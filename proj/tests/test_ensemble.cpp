#include <doctest.h>

#include "roughscatter/ensemble.hpp"

#include <atomic>
#include <fstream>
#include <sstream>

using namespace roughscatter;

namespace {

std::filesystem::path scratch(const std::string& name)
{
    auto p = std::filesystem::temp_directory_path() / ("roughscatter_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig small_specular()
{
    ExperimentConfig c = preset("fig-speckle-ellipses");
    c.name = "small-specular";
    c.regime = {1e-3, 0.5};
    c.lateral = {128, 128, 0.25, 0.25};
    c.omega = {64, 0.2};
    c.outputs = {OutputKind::Specular};
    c.realizations = 5;
    c.master_seed = 77;
    return c;
}

} // namespace

TEST_CASE("config round trip through JSON")
{
    for (const auto& name : preset_names()) {
        const auto c = preset(name);
        CHECK_NOTHROW(validate(c));
        const auto back = parse_config(config_to_json(c));
        CHECK(config_to_json(back) == config_to_json(c));
        CHECK(back.medium.c0 == c.medium.c0);
        CHECK(back.medium.k0 == c.medium.k0);
        CHECK(back.regime.gamma == c.regime.gamma);
        CHECK(back.outputs == c.outputs);
    }
}

TEST_CASE("config loading rejects bad input")
{
    const std::string base = R"({"schema_version": 1, "medium": {"c0": 1.5, "c1": 1.0, "k0": [0.3, 0.0]}})";
    CHECK_NOTHROW(parse_config(base));
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "colour": 3})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "medium": {"c2": 1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 2})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"medium": {}})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "outputs": ["pictures"]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "interface": {"family": "exponential"}})"), ConfigError);
    CHECK_THROWS_AS(preset("nope"), ConfigError);

    SUBCASE("invariant named in the message")
    {
        try {
            load_config(std::filesystem::path(ROUGHSCATTER_TEST_DATA) / "invalid_c1_gt_c0.json");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("c1 < c0") != std::string::npos);
        }
    }
    SUBCASE("regime and source preconditions")
    {
        auto c = preset("flat-anchor");
        c.regime.gamma = 1.2;
        CHECK_THROWS_AS(validate(c), ConfigError);
        c = preset("flat-anchor");
        c.source.omega_c = 1.0;
        CHECK_THROWS_AS(validate(c), ConfigError);
        c = preset("flat-anchor");
        c.omega = {16, 0.35};
        CHECK_THROWS_AS(validate(c), ConfigError);
        c = preset("speckle-default");
        c.realizations = 50;
        CHECK_THROWS_AS(validate(c), ConfigError);
    }
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoError);
}

TEST_CASE("parallel runner visits every index once and forwards errors")
{
    std::vector<std::atomic<int>> hits(57);
    parallel_for_realizations(57, 4, [&](int i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for_realizations(10, 3,
                                              [](int i) {
                                                  if (i == 7) throw std::runtime_error("boom");
                                              }),
                    std::runtime_error);
}

TEST_CASE("outputs are byte-identical across job counts and hashed in the manifest")
{
    const auto c = small_specular();
    const auto a = scratch("jobs1"), b = scratch("jobs3");
    const auto ma = run_experiment(c, a, 1);
    const auto mb = run_experiment(c, b, 3);
    REQUIRE(ma.outputs.size() == mb.outputs.size());
    for (size_t i = 0; i < ma.outputs.size(); ++i) {
        CHECK(ma.outputs[i].file == mb.outputs[i].file);
        CHECK(ma.outputs[i].sha256 == mb.outputs[i].sha256);
        CHECK(slurp(a / ma.outputs[i].file) == slurp(b / mb.outputs[i].file));
        CHECK(sha256_file(a / ma.outputs[i].file) == ma.outputs[i].sha256);
    }
    CHECK(ma.realization_seeds.size() == 5);
    CHECK(ma.realization_seeds[2] == realization_seed(77, 0, 2));
    CHECK(ma.config_hash == sha256_hex(config_to_json(c)));
    CHECK(std::filesystem::exists(a / "manifest.json"));

    auto other = c;
    other.master_seed = 78;
    const auto mc = run_experiment(other, scratch("seed78"), 2);
    CHECK(mc.outputs[1].sha256 != ma.outputs[1].sha256);
}

TEST_CASE("specular study over flat interfaces reproduces the flat wavefront")
{
    auto c = small_specular();
    c.interface.sigma_v = 0;
    SpecularStudySpec spec;
    spec.cfg = c.medium;
    spec.regime = c.regime;
    spec.model = c.interface;
    spec.source = c.source;
    spec.footprint = {128, 128, 0.25, 0.25};
    spec.omega = {128, 0.1};
    spec.layout = {{-1.0, 0.0, 1.5}, {0.0, 0.5}};
    spec.s = {-1.0, -0.25, 0.0, 0.4};
    spec.damping_omegas = {3.0};
    spec.realizations = 3;
    const auto r = run_specular_study(spec);
    CHECK(r.relative_l2 < 1e-4);
    CHECK(r.standard_error.cwiseAbs().maxCoeff() < 1e-6 * r.mean.cwiseAbs().maxCoeff());
    REQUIRE(r.damping.size() == 1);
    CHECK(r.damping[0].mean == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.damping[0].expected == doctest::Approx(1.0));
}

TEST_CASE("snell, scattering and ellipse pipelines")
{
    const auto out = scratch("pipelines");
    const auto c = preset("fig-angles");
    const auto files = write_snell_tables(c, out);
    CHECK(files.size() == 3);
    const auto t = read_csv(out / "snell_transmitted.csv");
    CHECK(t.rows.size() == 41 * 41);
    // p = 0 reproduces the flat transmission angle
    const auto& centre = t.rows[20 * 41 + 20];
    CHECK(centre[0] == 0.0);
    CHECK(centre[2] == doctest::Approx(observation_geometry(c.medium).theta_tr0).epsilon(1e-12));

    const auto s = write_scattering_distribution(preset("flat-anchor"), out);
    CHECK(s.size() == 3);
    CHECK(read_csv(out / "scattering_reflected.csv").rows.size() == 128 * 128);

    const auto e = write_ellipses(preset("fig-speckle-ellipses"), out);
    const auto tab = read_csv(out / "ellipses_reflected.csv");
    CHECK(tab.rows.size() == 6 * 181);
    const auto cfg = preset("fig-speckle-ellipses").medium;
    const Eigen::Matrix2d ai = paraxial_matrix_inverse(cfg, 0);
    for (const auto& row : tab.rows) {
        const Eigen::Vector2d y(row[2], row[3]);
        CHECK(y.dot(ai * y) == doctest::Approx(2 * cfg.z_int * cfg.c0 * row[0]).epsilon(1e-10));
    }
}

TEST_CASE("realization and field files round trip exactly")
{
    const auto out = scratch("io");
    auto c = preset("flat-anchor");
    c.lateral = {16, 12, 0.1, 0.2};
    c.realizations = 2;
    const auto files = write_realizations(c, out);
    CHECK(files.size() == 3);
    const auto g = screen_grid(c.lateral, c.medium, c.regime);
    const auto r = synthesize(c.interface, g, realization_seed(c.master_seed, 0, 1));
    const auto back = read_realization(out / "realization_0001.bin");
    CHECK(back.seed == r.seed);
    CHECK(back.grid.n1 == 16);
    CHECK(back.grid.d2 == g.d2);
    CHECK((back.values - r.values).cwiseAbs().maxCoeff() == 0.0);

    WaveField f;
    f.lateral = {4, 6, 0.3, 0.7};
    f.omega = {8, 0.5};
    f.spectrum = Eigen::MatrixXcd::Random(24, 8);
    f.frame = make_frame(FrameKind::Transmitted, c.medium, 1e-3);
    f.z = 1.25;
    write_field(out / "field.bin", f);
    const auto fb = read_field(out / "field.bin");
    CHECK(fb.spectrum == f.spectrum);
    CHECK(fb.z == f.z);
    CHECK(fb.lateral.d2 == f.lateral.d2);
    CHECK(fb.omega.d_omega == f.omega.d_omega);
    CHECK(fb.frame.kind == FrameKind::Transmitted);

    CHECK_THROWS_AS(read_realization(out / "field.bin"), IoError);
    CHECK_THROWS_AS(read_field("/nonexistent/file.bin"), IoError);
}

TEST_CASE("CSV keeps full double precision")
{
    const auto out = scratch("csv");
    const double x = 0.1 + 0.2, y = 1.0 / 3.0, z = -6.02214076e23;
    write_csv(out / "a.csv", {"x", "y", "z"}, {{x, y, z}});
    const auto t = read_csv(out / "a.csv");
    REQUIRE(t.header.size() == 3);
    CHECK(t.rows[0][0] == x);
    CHECK(t.rows[0][1] == y);
    CHECK(t.rows[0][2] == z);
    CHECK_THROWS_AS(write_csv(out / "b.csv", {"x"}, {{1.0, 2.0}}), std::invalid_argument);
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
