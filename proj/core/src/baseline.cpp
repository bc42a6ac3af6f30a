#include "tieline/baseline.hpp"

#include "tieline/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace tieline {

namespace {

constexpr double kPivotThreshold = 1e-10;
constexpr int kRefinementSteps = 3;

using Matrix = std::array<std::array<double, kFeatureCount>, kFeatureCount>;

// Lower-triangular Cholesky factor of a unit-diagonal SPD matrix, recording
// columns whose pivot collapses below the threshold.
std::vector<std::size_t> cholesky(const Matrix& a, Matrix& l) {
    std::vector<std::size_t> degenerate;
    l = Matrix{};
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        long double d = a[j][j];
        for (std::size_t k = 0; k < j; ++k) d -= static_cast<long double>(l[j][k]) * l[j][k];
        if (!(d > kPivotThreshold)) {
            degenerate.push_back(j);
            continue; // leave the column zero so later columns can still be checked
        }
        l[j][j] = static_cast<double>(std::sqrt(d));
        for (std::size_t i = j + 1; i < kFeatureCount; ++i) {
            long double v = a[i][j];
            for (std::size_t k = 0; k < j; ++k) v -= static_cast<long double>(l[i][k]) * l[j][k];
            l[i][j] = static_cast<double>(v / l[j][j]);
        }
    }
    return degenerate;
}

FeatureVector cholesky_solve(const Matrix& l, const FeatureVector& b) {
    FeatureVector y{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        long double v = b[i];
        for (std::size_t k = 0; k < i; ++k) v -= static_cast<long double>(l[i][k]) * y[k];
        y[i] = static_cast<double>(v / l[i][i]);
    }
    FeatureVector x{};
    for (std::size_t ii = kFeatureCount; ii-- > 0;) {
        long double v = y[ii];
        for (std::size_t k = ii + 1; k < kFeatureCount; ++k) v -= static_cast<long double>(l[k][ii]) * x[k];
        x[ii] = static_cast<double>(v / l[ii][ii]);
    }
    return x;
}

} // namespace

FeatureVector build_features(double t_out, double solar, double total_rated) {
    return {1.0, t_out, solar, total_rated, t_out * t_out, solar * solar, t_out * solar, t_out * total_rated};
}

BaselineModel fit_baseline_model(std::span<const TrainingSample> samples) {
    if (samples.size() < kFeatureCount) {
        throw FitError(fmt::format("fit_baseline_model: need at least {} samples, got {}", kFeatureCount,
                                   samples.size()),
                       {});
    }

    std::vector<FeatureVector> rows;
    rows.reserve(samples.size());
    for (const auto& s : samples) rows.push_back(build_features(s.t_out, s.solar, s.total_rated));

    FeatureVector scale{};
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        long double ss = 0.0L;
        for (const auto& r : rows) ss += static_cast<long double>(r[j]) * r[j];
        scale[j] = static_cast<double>(std::sqrt(ss));
    }

    std::vector<std::string> zero_columns;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        if (!(scale[j] > 0.0)) zero_columns.emplace_back(kFeatureNames[j]);
    }
    if (!zero_columns.empty()) {
        throw FitError("fit_baseline_model: identically zero feature columns", zero_columns);
    }

    Matrix normal{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            long double acc = 0.0L;
            for (const auto& r : rows) acc += static_cast<long double>(r[i] / scale[i]) * (r[j] / scale[j]);
            normal[i][j] = normal[j][i] = static_cast<double>(acc);
        }
    }

    Matrix l;
    const auto degenerate = cholesky(normal, l);
    if (!degenerate.empty()) {
        std::vector<std::string> names;
        std::string joined;
        for (std::size_t j : degenerate) {
            names.emplace_back(kFeatureNames[j]);
            joined += (joined.empty() ? "" : ", ") + names.back();
        }
        throw FitError("fit_baseline_model: rank-deficient design, degenerate columns: " + joined, names);
    }

    // scaled coefficients z, with beta_j = z_j / scale_j; refine on the residual
    FeatureVector z{};
    for (int iter = 0; iter <= kRefinementSteps; ++iter) {
        FeatureVector rhs{};
        for (std::size_t idx = 0; idx < rows.size(); ++idx) {
            const auto& r = rows[idx];
            long double pred = 0.0L;
            for (std::size_t j = 0; j < kFeatureCount; ++j) pred += static_cast<long double>(r[j] / scale[j]) * z[j];
            const long double resid = static_cast<long double>(samples[idx].p_ac_free) - pred;
            for (std::size_t j = 0; j < kFeatureCount; ++j) rhs[j] += static_cast<double>(resid * (r[j] / scale[j]));
        }
        const FeatureVector dz = cholesky_solve(l, rhs);
        for (std::size_t j = 0; j < kFeatureCount; ++j) z[j] += dz[j];
    }

    BaselineModel m;
    for (std::size_t j = 0; j < kFeatureCount; ++j) m.coefficients[j] = z[j] / scale[j];
    return m;
}

double predict_baseline_raw(const BaselineModel& m, double t_out, double solar, double total_rated) {
    const FeatureVector f = build_features(t_out, solar, total_rated);
    double acc = 0.0;
    for (std::size_t j = 0; j < kFeatureCount; ++j) acc += m.coefficients[j] * f[j];
    return acc;
}

double predict_baseline(const BaselineModel& m, double t_out, double solar, double total_rated) {
    return std::clamp(predict_baseline_raw(m, t_out, solar, total_rated), 0.0, std::max(total_rated, 0.0));
}

double in_sample_rmse(const BaselineModel& m, std::span<const TrainingSample> samples) {
    if (samples.empty()) return 0.0;
    double ss = 0.0;
    for (const auto& s : samples) {
        const double e = predict_baseline(m, s.t_out, s.solar, s.total_rated) - s.p_ac_free;
        ss += e * e;
    }
    return std::sqrt(ss / static_cast<double>(samples.size()));
}

void write_baseline_model(std::ostream& os, const BaselineModel& m) {
    os << "# baseline regression coefficients, kW per feature unit\n";
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        os << fmt::format("{:.17g} # {}\n", m.coefficients[j], kFeatureNames[j]);
    }
}

BaselineModel read_baseline_model(std::istream& is) {
    BaselineModel m;
    std::size_t count = 0;
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        std::string body = line.substr(0, hash);
        body.erase(0, body.find_first_not_of(" \t\r"));
        body.erase(body.find_last_not_of(" \t\r") + 1);
        if (body.empty()) continue;
        if (count >= kFeatureCount) throw FormatError("baseline model: too many coefficients");
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(body, &used);
        } catch (const std::exception&) {
            throw FormatError("baseline model: bad coefficient '" + body + "'");
        }
        if (used != body.size() || !std::isfinite(v)) {
            throw FormatError("baseline model: bad coefficient '" + body + "'");
        }
        m.coefficients[count++] = v;
    }
    if (count != kFeatureCount) {
        throw FormatError(fmt::format("baseline model: expected {} coefficients, got {}", kFeatureCount, count));
    }
    return m;
}

void validate(const CorrectionParams& p) {
    if (!(0.0 < p.s1 && p.s1 < p.s2 && p.s2 < p.s3 && p.s3 <= 1.0)) {
        throw ParameterDomainError("correction breakpoints must satisfy 0 < s1 < s2 < s3 <= 1");
    }
    if (!(0.0 < p.dp1 && p.dp1 <= p.dp2 && p.dp2 <= p.dp3)) {
        throw ParameterDomainError("correction percentages must satisfy 0 < dp1 <= dp2 <= dp3");
    }
    if (!(p.gamma > 0.0)) throw ParameterDomainError("gamma must be positive");
}

double delta_p_adj(double s, const CorrectionParams& p) {
    const double mag = std::abs(s);
    double v = 0.0;
    if (mag < p.s1) {
        v = 0.0;
    } else if (mag < p.s2) {
        v = p.dp1 + (p.dp2 - p.dp1) / (p.s2 - p.s1) * (mag - p.s1);
    } else if (mag <= p.s3) {
        v = p.dp2 + (p.dp3 - p.dp2) / (p.s3 - p.s2) * (mag - p.s2);
    } else {
        v = p.dp3;
    }
    return s < 0.0 ? -v : v;
}

CorrectedBaseline correct_baseline(double p_base0, double s, CorrectionState st, const CorrectionParams& p) {
    const double p_adj = delta_p_adj(s, p) / 100.0 * p_base0 + st.p_adj_prev * std::exp(-p.gamma);
    return CorrectedBaseline{p_base0 + p_adj, p_adj, CorrectionState{p_adj}};
}

} // namespace tieline
