#pragma once

#include "roughscatter/io.hpp"
#include "roughscatter/speckle.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace roughscatter {

/// Configuration rejected on load; the message names the violated invariant.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A resolution check (V = 0 anchor) exceeded its tolerance.
struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class OutputKind { Specular, SpeckleStats, SnellTables, ScatteringDist, Validation, Ellipses };

std::string to_string(OutputKind k);
OutputKind output_kind_from_string(const std::string& s);

struct SnellTableSpec {
    /// eps^(1 - gamma); when absent it is taken from the regime.
    double roughness{0};
    double p_max{1.0};
    int p_n{41};
};

struct SpeckleSpec {
    std::vector<Eigen::Vector2d> y_bars{{0.8, 0.0}, {1.2, 0.0}, {0.0, 1.0}};
    int n_tilde{17};
    double tilde_step{0.1};
    LateralGrid footprint{400, 400, 0, 0};
    OmegaGrid omega{320, 0.08};
};

struct ExperimentConfig {
    static constexpr int schema_version = 1;
    std::string name{"custom"};
    MediumConfig<double> medium;
    ScaleRegime<double> regime;
    InterfaceModel interface;
    SourceProfile source;
    /// Split-step grid in beam-width units and the omega grid.
    LateralGrid lateral{128, 128, 0.1875, 0.1875};
    OmegaGrid omega{80, 0.35};
    PGrid p_grid{128, 0.05};
    double scattering_omega{2.0};
    int realizations{16};
    std::uint64_t master_seed{1};
    std::vector<OutputKind> outputs{OutputKind::Validation};
    SnellTableSpec snell;
    SpeckleSpec speckle;
    std::vector<double> ellipse_s_bar{0.01, 0.02, 0.04, 0.08};
};

/// Checks every module precondition up front; throws ConfigError.
void validate(const ExperimentConfig& cfg);

/// JSON (schema_version 1). Unknown keys are rejected; missing keys take the defaults above.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& cfg);

/// Named presets: flat-anchor, fig-speckle-ellipses, fig-angles, speckle-default.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Runs realizations [0, n) in fixed chunks on `jobs` threads; results land in index order, so reductions over
/// them are independent of the job count.
void parallel_for_realizations(int n, int jobs, const std::function<void(int)>& body);

struct FlatAnchorReport {
    double reflected_error{0};
    double transmitted_error{0};
    double tolerance{1e-6};
    bool pass() const { return reflected_error <= tolerance && transmitted_error <= tolerance; }
};

/// V = 0 split-step wavefronts against the closed-form quadrature (relative L2 over the grid).
FlatAnchorReport flat_anchor_check(const SourceProfile& profile, const MediumConfig<double>& cfg,
                                   const ScaleRegime<double>& regime, const SimulationGrid& grid);

struct DampingEstimate {
    double omega{0};
    double mean{0};
    double standard_error{0};
    double expected{0};
};

struct SpecularStudySpec {
    Side side{Side::Reflected};
    MediumConfig<double> cfg;
    ScaleRegime<double> regime;
    InterfaceModel model;
    SourceProfile source;
    LateralGrid footprint;
    OmegaGrid omega;
    ProbeLayout layout;
    std::vector<double> s;
    /// Omega values (snapped to the grid) at which the damping is estimated.
    std::vector<double> damping_omegas;
    int realizations{200};
    std::uint64_t master_seed{1};
    int jobs{1};
};

struct SpecularStudyResult {
    /// Probes x times.
    Eigen::MatrixXd mean;
    Eigen::MatrixXd standard_error;
    Eigen::MatrixXd prediction;
    double relative_l2{0};
    std::vector<DampingEstimate> damping;
    std::vector<std::uint64_t> seeds;
};

/// Ensemble-mean specular wavefront against the homogenized prediction, and per-omega damping.
SpecularStudyResult run_specular_study(const SpecularStudySpec& spec);

struct SpeckleStudySpec {
    Side side{Side::Reflected};
    MediumConfig<double> cfg;
    ScaleRegime<double> regime;
    InterfaceModel model;
    SourceProfile source;
    LateralGrid footprint;
    OmegaGrid omega;
    std::vector<Eigen::Vector2d> y_bars;
    int n_tilde{17};
    double tilde_step{0.1};
    std::vector<double> time_lags;
    /// Offset (grid steps along y_tilde_1) of the shifted time cut.
    int shifted_k{4};
    /// Frame times around the support used by the moment tests.
    std::vector<double> sample_times{-1.0, 0.0, 1.0};
    /// Beam-scale separation (along e2) of the independence probes.
    double independence_offset{1.0};
    int realizations{200};
    std::uint64_t master_seed{1};
    int jobs{1};
};

struct CutComparison {
    std::string name;
    std::vector<double> coordinate;
    Eigen::VectorXd mean;
    Eigen::VectorXd standard_error;
    Eigen::VectorXd kernel;
    double relative_l2() const;
};

struct SpeckleProbeResult {
    Eigen::Vector2d y_bar{Eigen::Vector2d::Zero()};
    std::vector<CutComparison> cuts;
    double support{0};
    double mollifier_width{0};
    /// s_bar of the maximum of the mollified mean intensity.
    double peak_s_bar{0};
    std::vector<double> profile_s_bar;
    std::vector<double> profile;
};

struct SpeckleStudyResult {
    std::vector<SpeckleProbeResult> probes;
    /// Realizations x probes, scaled speckle samples at the support times.
    Eigen::MatrixXd moment_samples;
    Eigen::MatrixXd independence_a;
    Eigen::MatrixXd independence_b;
    std::vector<std::uint64_t> seeds;
};

SpeckleStudyResult run_speckle_study(const SpeckleStudySpec& spec);

struct SuiteResult {
    std::string name;
    bool pass{false};
    std::string detail;
};

/// Desk-scale property suites of all modules for a configuration.
std::vector<SuiteResult> run_validation_suites(const ExperimentConfig& cfg);

struct OutputEntry {
    std::string file;
    std::string sha256;
};

struct RunManifest {
    std::string config_hash;
    std::uint64_t master_seed{0};
    std::vector<std::uint64_t> realization_seeds;
    std::string tool_version;
    std::vector<OutputEntry> outputs;
    double wall_seconds{0};
    std::string to_json() const;
};

std::string tool_version();

/// Executes the requested pipelines, writing outputs and manifest.json into `out`. Throws ConfigError,
/// ResolutionError or IoError.
RunManifest run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out, int jobs);

/// Individual pipelines (each returns the files it wrote, relative to `out`).
std::vector<std::string> write_snell_tables(const ExperimentConfig& cfg, const std::filesystem::path& out);
std::vector<std::string> write_scattering_distribution(const ExperimentConfig& cfg, const std::filesystem::path& out);
std::vector<std::string> write_ellipses(const ExperimentConfig& cfg, const std::filesystem::path& out);
std::vector<std::string> write_realizations(const ExperimentConfig& cfg, const std::filesystem::path& out);

} // namespace roughscatter
