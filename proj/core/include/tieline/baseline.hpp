#pragma once

// Baseline (free-running) ACL load estimation by quadratic regression on
// weather and enrolled capacity, plus the online correction driven by the
// aggregate SOA.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>

namespace tieline {

inline constexpr std::size_t kFeatureCount = 8;
using FeatureVector = std::array<double, kFeatureCount>;

/// Names of the regression terms; T = outdoor temperature, Q = solar
/// irradiance, R = total rated power.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "1", "T", "Q", "R", "T^2", "Q^2", "T*Q", "T*R",
};

FeatureVector build_features(double t_out, double solar, double total_rated);

struct TrainingSample {
    double t_out = 0.0;       // degC
    double solar = 0.0;       // W/m^2
    double total_rated = 0.0; // kW
    double p_ac_free = 0.0;   // kW
};

struct BaselineModel {
    FeatureVector coefficients{};
};

/// Ordinary least squares via column-scaled normal equations. Throws
/// FitError listing the degenerate feature columns when the design matrix is
/// (numerically) rank deficient, or when fewer than kFeatureCount samples
/// are given.
BaselineModel fit_baseline_model(std::span<const TrainingSample> samples);

double predict_baseline_raw(const BaselineModel& m, double t_out, double solar, double total_rated);

/// Prediction clamped to [0, total_rated].
double predict_baseline(const BaselineModel& m, double t_out, double solar, double total_rated);

double in_sample_rmse(const BaselineModel& m, std::span<const TrainingSample> samples);

/// One coefficient per line, each followed by a `# <feature>` comment.
void write_baseline_model(std::ostream& os, const BaselineModel& m);
BaselineModel read_baseline_model(std::istream& is);

struct CorrectionParams {
    double s1 = 0.5;
    double s2 = 0.8;
    double s3 = 1.0;
    double dp1 = 1.0; // percent
    double dp2 = 2.0;
    double dp3 = 3.0;
    double gamma = 0.02;
};

void validate(const CorrectionParams& p);

/// Proportional correction coefficient (percent) as an odd, piecewise-linear
/// function of the aggregate SOA; zero for |s| < s1, saturating at dp3.
double delta_p_adj(double s, const CorrectionParams& p);

struct CorrectionState {
    double p_adj_prev = 0.0; // kW
};

struct CorrectedBaseline {
    double p_base = 0.0; // kW
    double p_adj = 0.0;  // kW
    CorrectionState state;
};

CorrectedBaseline correct_baseline(double p_base0, double s, CorrectionState st, const CorrectionParams& p);

} // namespace tieline
