#include "roughscatter/speckle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

namespace roughscatter {

namespace {

/// Grouped (delete-one-group) jackknife of a statistic over the rows of the data.
MomentStatistic jackknife(const Eigen::MatrixXd& data, int groups,
                          const std::function<double(const Eigen::MatrixXd&)>& stat)
{
    const int n = static_cast<int>(data.rows());
    if (groups <= 0) groups = n;
    if (groups < 2 || groups > n) throw std::invalid_argument("jackknife: 2 <= groups <= rows required");
    MomentStatistic out;
    out.value = stat(data);
    std::vector<double> leave(groups);
    for (int g = 0; g < groups; ++g) {
        const int lo = g * n / groups, hi = (g + 1) * n / groups;
        Eigen::MatrixXd rest(n - (hi - lo), data.cols());
        rest << data.topRows(lo), data.bottomRows(n - hi);
        leave[g] = stat(rest);
    }
    double mean = 0;
    for (double v : leave) mean += v;
    mean /= groups;
    double ss = 0;
    for (double v : leave) ss += (v - mean) * (v - mean);
    out.standard_error = std::sqrt(ss * (groups - 1) / groups);
    return out;
}

/// Probe average of a per-column statistic computed from central moments.
double column_average(const Eigen::MatrixXd& x, const std::function<double(double, double, double, double)>& f)
{
    double acc = 0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double mu = x.col(c).mean();
        const Eigen::ArrayXd d = x.col(c).array() - mu;
        const double m2 = d.square().mean(), m3 = d.cube().mean(), m4 = d.square().square().mean();
        acc += f(mu, m2, m3, m4);
    }
    return acc / x.cols();
}

void decide(MomentStatistic& s, double expected, double threshold)
{
    s.expected = expected;
    s.pass = std::abs(s.value - expected) <= threshold * s.standard_error;
}

} // namespace

GaussianityReport gaussianity_test(const Eigen::MatrixXd& samples, int groups, double threshold)
{
    if (samples.rows() < 100) throw std::invalid_argument("gaussianity_test: at least 100 realizations required");
    if (samples.cols() < 1) throw std::invalid_argument("gaussianity_test: no probes");
    GaussianityReport r;
    r.realizations = static_cast<int>(samples.rows());
    r.probes = static_cast<int>(samples.cols());
    const auto safe = [](double num, double den) { return den > 0 ? num / den : 0.0; };
    r.mean = jackknife(samples, groups, [&](const Eigen::MatrixXd& x) {
        return column_average(x, [&](double mu, double m2, double, double) { return safe(mu, std::sqrt(m2)); });
    });
    r.third = jackknife(samples, groups, [&](const Eigen::MatrixXd& x) {
        return column_average(x, [&](double, double m2, double m3, double) { return safe(m3, std::pow(m2, 1.5)); });
    });
    // The kurtosis b is tested through log(b - 1), where its sampling law is close to symmetric (b >= 1).
    const auto log_kurtosis = jackknife(samples, groups, [&](const Eigen::MatrixXd& x) {
        return std::log(column_average(x, [&](double, double m2, double, double m4) { return safe(m4, m2 * m2); }) - 1);
    });
    decide(r.mean, 0.0, threshold);
    decide(r.third, 0.0, threshold);
    // Exact mean of m4 / m2^2 for n Gaussian samples.
    const double n = static_cast<double>(samples.rows());
    r.kurtosis.value = 1 + std::exp(log_kurtosis.value);
    r.kurtosis.expected = 3.0 * (n - 1) / (n + 1);
    // The jackknife error of a fourth-moment ratio is itself noisy; it is floored at the exact Gaussian sampling
    // error of the probe average (independent probes).
    const double null_var = 24 * n * (n - 2) * (n - 3) / ((n + 1) * (n + 1) * (n + 3) * (n + 5)) / samples.cols();
    const double se_log = std::max(log_kurtosis.standard_error, std::sqrt(null_var) / (r.kurtosis.expected - 1));
    r.kurtosis.standard_error = (r.kurtosis.value - 1) * se_log;
    r.kurtosis.pass = std::abs(log_kurtosis.value - std::log(r.kurtosis.expected - 1)) <= threshold * se_log;
    r.probe_kurtosis.resize(samples.cols());
    for (Eigen::Index c = 0; c < samples.cols(); ++c)
        r.probe_kurtosis(c) = column_average(samples.col(c), [&](double, double m2, double, double m4) { return safe(m4, m2 * m2); });
    return r;
}

IndependenceReport independence_test(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int groups, double threshold)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("independence_test: shape mismatch");
    if (a.rows() < 100) throw std::invalid_argument("independence_test: at least 100 realizations required");
    IndependenceReport r;
    const auto variance = [](const Eigen::VectorXd& x) { return (x.array() - x.mean()).square().mean(); };
    for (Eigen::Index c = 0; c < a.cols(); ++c)
        if (!(variance(a.col(c)) > 0) || !(variance(b.col(c)) > 0)) {
            r.applicable = false;
            return r;
        }
    const Eigen::Index k = a.cols();
    Eigen::MatrixXd joined(a.rows(), 2 * k);
    joined << a, b;
    r.correlation = jackknife(joined, groups, [k](const Eigen::MatrixXd& x) {
        double acc = 0;
        for (Eigen::Index c = 0; c < k; ++c) {
            const Eigen::ArrayXd u = x.col(c).array() - x.col(c).mean();
            const Eigen::ArrayXd v = x.col(c + k).array() - x.col(c + k).mean();
            const double den = std::sqrt(u.square().sum() * v.square().sum());
            acc += den > 0 ? (u * v).sum() / den : 0.0;
        }
        return acc / k;
    });
    decide(r.correlation, 0.0, threshold);
    return r;
}

CalibrationReport calibrate_tests(int realizations, int probes, int seeds, std::uint64_t master_seed, int groups,
                                  double threshold)
{
    CalibrationReport r;
    for (int k = 0; k < seeds; ++k) {
        std::mt19937_64 rng(realization_seed(master_seed, 7, k));
        std::normal_distribution<double> n(0.0, 1.0);
        Eigen::MatrixXd x(realizations, probes), y(realizations, probes);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
        for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = n(rng);
        const bool g = gaussianity_test(x, groups, threshold).pass();
        const bool i = independence_test(x, y, groups, threshold).pass();
        ++r.seeds;
        r.gaussianity_passed += g;
        r.independence_passed += i;
        r.passed += g && i;
    }
    return r;
}

SelfAveragingReport self_averaging_test(const std::vector<double>& epsilon,
                                        const std::vector<std::vector<double>>& functionals)
{
    if (epsilon.size() < 2 || epsilon.size() != functionals.size())
        throw std::invalid_argument("self_averaging_test: need matching ensembles at two or more epsilon values");
    SelfAveragingReport r;
    r.epsilon = epsilon;
    for (const auto& f : functionals) {
        if (f.size() < 2) throw std::invalid_argument("self_averaging_test: need two realizations per epsilon");
        double mean = 0;
        for (double v : f) mean += v;
        mean /= f.size();
        double var = 0;
        for (double v : f) var += (v - mean) * (v - mean);
        var /= (f.size() - 1);
        r.relative_variance.push_back(mean != 0 ? var / (mean * mean) : 0.0);
    }
    // Order by decreasing epsilon, then require the variance to shrink at each step (or stay at zero).
    std::vector<size_t> order(epsilon.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return epsilon[a] > epsilon[b]; });
    r.decreasing = true;
    for (size_t i = 1; i < order.size(); ++i) {
        const double prev = r.relative_variance[order[i - 1]], cur = r.relative_variance[order[i]];
        if (!(cur < prev || (cur == 0 && prev == 0))) r.decreasing = false;
    }
    return r;
}

} // namespace roughscatter
