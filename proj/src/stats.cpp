#include "qfund/stats.hpp"

#include "qfund/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <set>

namespace qf::stats {

double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double population_stdev(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size()));
}

double sample_stdev(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::optional<LineFit> ols_line(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw DomainError("ols_line: length mismatch");
    if (xs.size() < 2) return std::nullopt;
    const double mx = mean(xs), my = mean(ys);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) return std::nullopt;
    const double slope = sxy / sxx;
    return LineFit{slope, my - slope * mx};
}

std::optional<QuadraticFit> quadratic_fit(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw DomainError("quadratic_fit: length mismatch");
    if (std::set<double>(xs.begin(), xs.end()).size() < 3) return std::nullopt;

    const auto n = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd a(n, 3);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a(i, 0) = 1.0;
        a(i, 1) = xs[i];
        a(i, 2) = xs[i] * xs[i];
        b(i) = ys[i];
    }
    const Eigen::Vector3d beta = a.colPivHouseholderQr().solve(b);

    QuadraticFit fit{beta(0), beta(1), beta(2), 0.0};
    const double my = mean(ys);
    double ss_res = 0.0, ss_tot = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double r = b(i) - (a.row(i) * beta)(0);
        ss_res += r * r;
        ss_tot += (b(i) - my) * (b(i) - my);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

} // namespace qf::stats
