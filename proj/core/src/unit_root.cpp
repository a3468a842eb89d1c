#include "panelecm/unit_root.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "panelecm/distributions.hpp"
#include "panelecm/error.hpp"
#include "panelecm/random.hpp"
#include "panelecm/regression.hpp"

namespace panelecm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr int kMomentReplications = 20000;

// ---------------------------------------------------------------------------
// Response-surface coefficients, one I(1) regressor (MacKinnon 1994, as
// distributed with statsmodels' adfvalues). Polynomials are in tau, lowest
// order first; p = Phi(poly(tau)).
// ---------------------------------------------------------------------------

struct Surface {
    double tau_min;
    double tau_star;
    double tau_max;
    std::array<double, 3> small;
    std::array<double, 4> large;
};

constexpr Surface kSurfaceNone{-19.04, -1.04, std::numeric_limits<double>::infinity(),
                               {0.6344, 1.2378, 3.2496e-2},
                               {0.4797, 9.3557e-1, -0.6999e-1, 3.3066e-2}};
constexpr Surface kSurfaceIntercept{-18.83, -1.61, 2.74,
                                    {2.1659, 1.4412, 3.8269e-2},
                                    {1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2}};
constexpr Surface kSurfaceTrend{-16.18, -2.89, 0.70,
                                {3.2512, 1.6047, 4.9588e-2},
                                {2.5261, 6.1654e-1, -3.7956e-1, -6.0285e-2}};

const Surface& surface(Deterministic det) {
    switch (det) {
        case Deterministic::none: return kSurfaceNone;
        case Deterministic::intercept: return kSurfaceIntercept;
        case Deterministic::intercept_and_trend: return kSurfaceTrend;
    }
    return kSurfaceIntercept;
}

// ---------------------------------------------------------------------------
// Regression building blocks
// ---------------------------------------------------------------------------

/// Fills deterministic columns for observation time index t.
void put_deterministic(Eigen::MatrixXd& X, Eigen::Index row, Deterministic det, double t) {
    if (det == Deterministic::none) return;
    X(row, 0) = 1.0;
    if (det == Deterministic::intercept_and_trend) X(row, 1) = t;
}

/// ADF design over rows t = first..T-1 (0-based time), columns
/// [deterministic..., y_{t-1}, dy_{t-1}, ..., dy_{t-lags}], response dy_t.
void adf_design(std::span<const double> y, int lags, Deterministic det, std::size_t first, Eigen::MatrixXd& X,
                Eigen::VectorXd& dy) {
    const auto T = y.size();
    const auto n = static_cast<Eigen::Index>(T - first);
    const int d = deterministic_terms(det);
    X.resize(n, d + 1 + lags);
    dy.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const std::size_t t = first + static_cast<std::size_t>(r);
        put_deterministic(X, r, det, static_cast<double>(t));
        X(r, d) = y[t - 1];
        for (int j = 1; j <= lags; ++j) X(r, d + j) = y[t - j] - y[t - j - 1];
        dy(r) = y[t] - y[t - 1];
    }
}

void require_finite(std::span<const double> y) {
    for (double v : y)
        if (!std::isfinite(v)) throw DataError("unit-root input contains missing or non-finite values");
}

Eigen::VectorXd residualize(const Eigen::MatrixXd& Z, const Eigen::VectorXd& v) {
    if (Z.cols() == 0) return v;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Z);
    return v - Z * qr.solve(v);
}

/// Residuals of y on the deterministic terms (t = 0..T-1).
Eigen::VectorXd detrend(std::span<const double> y, Deterministic det) {
    const auto T = static_cast<Eigen::Index>(y.size());
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(y.data(), T);
    const int d = deterministic_terms(det);
    if (d == 0) return v;
    Eigen::MatrixXd Z(T, d);
    for (Eigen::Index t = 0; t < T; ++t) put_deterministic(Z, t, det, static_cast<double>(t));
    return residualize(Z, v);
}

int resolve_lag(std::span<const double> y, Deterministic det, const LagSelection& sel) {
    if (sel.mode == LagSelection::Mode::fixed) return sel.fixed_lag;
    int pmax = default_max_lag(y.size(), det);
    if (sel.max_lag) pmax = std::min(pmax, *sel.max_lag);
    return select_adf_lag(y, det, std::max(pmax, 0));
}

void require_panel(const SeriesPanel& panel) {
    if (panel.empty()) throw std::invalid_argument("panel test needs at least one entity");
    const auto T = panel.front().size();
    for (const auto& s : panel) {
        if (s.size() != T) throw std::invalid_argument("panel series must share one length");
        require_finite(s);
    }
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

std::uint64_t moment_seed(std::uint64_t tag, std::size_t length, int lags, Deterministic det) {
    std::uint64_t h = 0x9E3779B97F4A7C15ull ^ tag;
    for (std::uint64_t v : {static_cast<std::uint64_t>(length), static_cast<std::uint64_t>(lags),
                            static_cast<std::uint64_t>(det)}) {
        h ^= v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    }
    return h;
}

std::vector<double> simulated_random_walk(const RandomStreams& rng, std::uint64_t rep, std::size_t length) {
    std::vector<double> y(length);
    double level = 0.0;
    for (std::size_t t = 0; t < length; ++t) {
        if (t > 0) level += rng.normal(rep, t);
        y[t] = level;
    }
    return y;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

std::string to_string(Deterministic d) {
    switch (d) {
        case Deterministic::none: return "none";
        case Deterministic::intercept: return "intercept";
        case Deterministic::intercept_and_trend: return "intercept_and_trend";
    }
    return "?";
}

int deterministic_terms(Deterministic d) noexcept {
    return d == Deterministic::none ? 0 : d == Deterministic::intercept ? 1 : 2;
}

void UnitRootConfig::validate(std::size_t series_length) const {
    if (!(significance > 0.0 && significance <= 0.5)) {
        throw std::invalid_argument("unit-root significance must lie in (0, 0.5]");
    }
    if (lags.mode == LagSelection::Mode::fixed) {
        if (lags.fixed_lag < 0 || 3 * lags.fixed_lag > static_cast<int>(series_length)) {
            throw std::invalid_argument("fixed lag " + std::to_string(lags.fixed_lag) + " exceeds T/3");
        }
    }
    if (bandwidth && *bandwidth < 0) throw std::invalid_argument("bandwidth must be non-negative");
}

int default_max_lag(std::size_t series_length, Deterministic det) {
    const auto T = static_cast<double>(series_length);
    const int rule = static_cast<int>(std::floor(std::min(T / 3.0, 12.0) * std::pow(T / 100.0, 0.25)));
    // Selection regression: T-1-p rows, d+1+p columns; keep at least 2 residual df.
    const int cap = (static_cast<int>(series_length) - deterministic_terms(det) - 4) / 2;
    return std::max(0, std::min(rule, cap));
}

// ---------------------------------------------------------------------------
// ADF
// ---------------------------------------------------------------------------

double mackinnon_p_value(double tau, Deterministic det) {
    if (std::isnan(tau)) return kNaN;
    const Surface& s = surface(det);
    if (tau > s.tau_max) return 1.0;
    if (tau < s.tau_min) return 0.0;
    double poly = 0.0;
    if (tau <= s.tau_star) {
        poly = s.small[0] + tau * (s.small[1] + tau * s.small[2]);
    } else {
        poly = s.large[0] + tau * (s.large[1] + tau * (s.large[2] + tau * s.large[3]));
    }
    return normal_cdf(poly);
}

AdfResult adf_regression(std::span<const double> series, int lags, Deterministic det) {
    require_finite(series);
    if (lags < 0) throw std::invalid_argument("adf_regression: negative lag order");
    const int d = deterministic_terms(det);
    const auto T = static_cast<int>(series.size());
    const int n = T - 1 - lags;
    const int k = d + 1 + lags;
    if (n <= k) {
        throw std::invalid_argument("adf_regression: " + std::to_string(T) + " observations are too few for " +
                                    std::to_string(lags) + " lags");
    }
    Eigen::MatrixXd X;
    Eigen::VectorXd dy;
    adf_design(series, lags, det, static_cast<std::size_t>(lags + 1), X, dy);
    auto ls = solve_least_squares(X, dy);
    const double s2 = ls.ssr / static_cast<double>(n - k);
    AdfResult out;
    out.lags = lags;
    out.n_obs = static_cast<std::size_t>(n);
    out.residual_sd = std::sqrt(s2);
    const double se = std::sqrt(s2 * ls.xtx_inverse(d, d));
    out.statistic = ls.coefficients(d) / se;
    out.p_value = mackinnon_p_value(out.statistic, det);
    return out;
}

int select_adf_lag(std::span<const double> series, Deterministic det, int max_lag) {
    require_finite(series);
    if (max_lag <= 0) return 0;
    const int d = deterministic_terms(det);
    const auto first = static_cast<std::size_t>(max_lag + 1);
    if (series.size() <= first + static_cast<std::size_t>(d + 1 + max_lag)) {
        throw std::invalid_argument("select_adf_lag: series too short for the lag search");
    }
    Eigen::MatrixXd X;
    Eigen::VectorXd dy;
    adf_design(series, max_lag, det, first, X, dy);
    const auto n = X.rows();
    const auto K = X.cols();
    Eigen::MatrixXd aug(n, K + 1);
    aug << X, dy;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(aug);
    const Eigen::MatrixXd& R = qr.matrixQR();
    // SSR of the model on the first m columns = sum_{j >= m} R(j, K)^2.
    Eigen::VectorXd tail(K + 2);
    tail(K + 1) = 0.0;
    for (Eigen::Index j = K; j >= 0; --j) tail(j) = tail(j + 1) + R(j, K) * R(j, K);
    const double ln_n = std::log(static_cast<double>(n));
    int best = 0;
    double best_sic = std::numeric_limits<double>::infinity();
    for (int p = 0; p <= max_lag; ++p) {
        const Eigen::Index m = d + 1 + p;
        const double ssr = tail(m);
        if (!(ssr > 0.0)) continue;
        const double sic = std::log(ssr / static_cast<double>(n)) + static_cast<double>(m) * ln_n / static_cast<double>(n);
        if (sic < best_sic) {
            best_sic = sic;
            best = p;
        }
    }
    return best;
}

AdfResult adf_test(std::span<const double> series, Deterministic det, const LagSelection& lags) {
    return adf_regression(series, resolve_lag(series, det, lags), det);
}

// ---------------------------------------------------------------------------
// Kernel long-run variance and PP
// ---------------------------------------------------------------------------

double bartlett_long_run_variance(std::span<const double> e, int bandwidth) {
    const auto n = e.size();
    if (n == 0) throw std::invalid_argument("long-run variance of an empty series");
    auto gamma = [&](std::size_t j) {
        double s = 0.0;
        for (std::size_t t = j; t < n; ++t) s += e[t] * e[t - j];
        return s / static_cast<double>(n);
    };
    double lrv = gamma(0);
    const auto m = static_cast<std::size_t>(std::clamp(bandwidth, 0, static_cast<int>(n) - 1));
    for (std::size_t j = 1; j <= m; ++j) {
        lrv += 2.0 * (1.0 - static_cast<double>(j) / static_cast<double>(m + 1)) * gamma(j);
    }
    return lrv;
}

int newey_west_bandwidth(std::span<const double> e) {
    const auto n = e.size();
    if (n < 2) return 0;
    const auto nd = static_cast<double>(n);
    const auto pilot = std::min<std::size_t>(static_cast<std::size_t>(std::floor(4.0 * std::pow(nd / 100.0, 2.0 / 9.0))), n - 1);
    double s0 = 0.0;
    double s1 = 0.0;
    for (std::size_t j = 0; j <= pilot; ++j) {
        double g = 0.0;
        for (std::size_t t = j; t < n; ++t) g += e[t] * e[t - j];
        g /= nd;
        s0 += j == 0 ? g : 2.0 * g;
        s1 += 2.0 * static_cast<double>(j) * g;
    }
    if (!(s0 > 0.0)) return 0;
    const double gamma_hat = 1.1447 * std::cbrt((s1 / s0) * (s1 / s0));
    const auto m = static_cast<int>(std::floor(gamma_hat * std::cbrt(nd)));
    return std::clamp(m, 0, static_cast<int>(n) - 1);
}

PpResult pp_regression(std::span<const double> series, Deterministic det, std::optional<int> bandwidth) {
    require_finite(series);
    const int d = deterministic_terms(det);
    const auto T = static_cast<int>(series.size());
    const int n = T - 1;
    const int k = d + 1;
    if (n <= k + 1) throw std::invalid_argument("pp_regression: series too short");
    Eigen::MatrixXd X;
    Eigen::VectorXd dy;
    adf_design(series, 0, det, 1, X, dy);
    auto ls = solve_least_squares(X, dy);
    const double nd = n;
    const double s2 = ls.ssr / (nd - k);
    const double s = std::sqrt(s2);
    const double se = std::sqrt(s2 * ls.xtx_inverse(d, d));
    const double t_alpha = ls.coefficients(d) / se;
    const std::span<const double> u(ls.residuals.data(), static_cast<std::size_t>(ls.residuals.size()));
    const int m = bandwidth ? *bandwidth : newey_west_bandwidth(u);
    const double gamma0 = ls.ssr / nd;
    const double f0 = bartlett_long_run_variance(u, m);
    PpResult out;
    out.bandwidth = m;
    out.statistic = t_alpha * std::sqrt(gamma0 / f0) - nd * (f0 - gamma0) * se / (2.0 * std::sqrt(f0) * s);
    out.p_value = mackinnon_p_value(out.statistic, det);
    return out;
}

// ---------------------------------------------------------------------------
// Simulated null moments
// ---------------------------------------------------------------------------

DfMoments ips_moments(std::size_t series_length, int lags, Deterministic det) {
    static std::mutex mu;
    static std::map<std::tuple<std::size_t, int, Deterministic>, DfMoments> cache;
    const auto key = std::make_tuple(series_length, lags, det);
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;

    const RandomStreams rng(moment_seed(0x495053ull, series_length, lags, det));
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int r = 0; r < kMomentReplications; ++r) {
        const auto y = simulated_random_walk(rng, static_cast<std::uint64_t>(r), series_length);
        const double t = adf_regression(y, lags, det).statistic;
        sum += t;
        sum_sq += t * t;
    }
    const double R = kMomentReplications;
    DfMoments m{sum / R, (sum_sq - sum * sum / R) / (R - 1.0)};
    cache.emplace(key, m);
    return m;
}

namespace {

/// Per-entity LLC quantities on normalised residuals.
struct LlcEntity {
    Eigen::VectorXd e;  ///< normalised dy residuals
    Eigen::VectorXd v;  ///< normalised y_{t-1} residuals
    double s_ratio = 1.0;
    int lags = 0;
};

LlcEntity llc_entity(std::span<const double> y, int lags, Deterministic det, std::optional<int> bandwidth,
                     bool with_ratio) {
    Eigen::MatrixXd X;
    Eigen::VectorXd dy;
    adf_design(y, lags, det, static_cast<std::size_t>(lags + 1), X, dy);
    const int d = deterministic_terms(det);
    const auto n = X.rows();
    Eigen::MatrixXd Z(n, d + lags);
    if (d > 0) Z.leftCols(d) = X.leftCols(d);
    if (lags > 0) Z.rightCols(lags) = X.rightCols(lags);
    Eigen::VectorXd e = residualize(Z, dy);
    Eigen::VectorXd v = residualize(Z, X.col(d));
    const double vv = v.squaredNorm();
    if (!(vv > 0.0)) throw std::invalid_argument("llc_test: degenerate lagged level");
    const double delta = e.dot(v) / vv;
    const double sigma2 = (e - delta * v).squaredNorm() / static_cast<double>(n);
    if (!(sigma2 > 0.0)) throw std::invalid_argument("llc_test: zero residual variance");
    const double sigma = std::sqrt(sigma2);

    LlcEntity out;
    out.e = e / sigma;
    out.v = v / sigma;
    out.lags = lags;
    if (with_ratio) {
        // Long-run variance of dy (demeaned unless no deterministic terms).
        const auto T = y.size();
        std::vector<double> diff(T - 1);
        for (std::size_t t = 1; t < T; ++t) diff[t - 1] = y[t] - y[t - 1];
        if (det != Deterministic::none) {
            const double mu = mean_of(diff);
            for (auto& x : diff) x -= mu;
        }
        const int kbar = bandwidth ? *bandwidth : static_cast<int>(std::floor(3.21 * std::cbrt(static_cast<double>(T))));
        const double lrv = bartlett_long_run_variance(diff, kbar);
        out.s_ratio = std::sqrt(std::max(lrv, 0.0)) / sigma;
    }
    return out;
}

}  // namespace

LlcAdjustment llc_adjustment(std::size_t t_tilde, Deterministic det) {
    static std::mutex mu;
    static std::map<std::pair<std::size_t, Deterministic>, LlcAdjustment> cache;
    const auto key = std::make_pair(t_tilde, det);
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;

    const RandomStreams rng(moment_seed(0x4C4C43ull, t_tilde, 0, det));
    double s_num = 0.0, s_num2 = 0.0, s_den = 0.0, s_sq = 0.0;
    double s_ratio = 0.0, s_ratio2 = 0.0, s_cross = 0.0;
    for (int r = 0; r < kMomentReplications; ++r) {
        const auto y = simulated_random_walk(rng, static_cast<std::uint64_t>(r), t_tilde + 1);
        const auto ent = llc_entity(y, 0, det, std::nullopt, true);
        const double num = ent.e.dot(ent.v);
        s_num += num;
        s_num2 += num * num;
        s_den += ent.v.squaredNorm();
        s_sq += ent.e.squaredNorm();
        s_ratio += ent.s_ratio;
        s_ratio2 += ent.s_ratio * ent.s_ratio;
        s_cross += num * ent.s_ratio;
    }
    const double R = kMomentReplications;
    const double Tt = static_cast<double>(t_tilde);
    const double mean_num = s_num / R;
    const double mean_ratio = s_ratio / R;
    const double mean_den = s_den / R;
    // The mean term is scaled by the average kernel ratio so the bias of the
    // Bartlett estimate cancels under the null; the variance term covers the
    // centred numerator num - Tt * mu * s_ratio.
    const double mu_star = mean_num / (Tt * mean_ratio);
    const double var_num = (s_num2 - s_num * s_num / R) / (R - 1.0);
    const double var_ratio = (s_ratio2 - s_ratio * s_ratio / R) / (R - 1.0);
    const double cov = (s_cross - s_num * s_ratio / R) / (R - 1.0);
    const double var_centred = var_num - 2.0 * Tt * mu_star * cov + Tt * Tt * mu_star * mu_star * var_ratio;
    const double delta = mean_num / mean_den;
    const double s2 = (s_sq / R - 2.0 * delta * mean_num + delta * delta * mean_den) / Tt;
    LlcAdjustment adj{mu_star, std::sqrt(var_centred / (mean_den * s2))};
    cache.emplace(key, adj);
    return adj;
}

// ---------------------------------------------------------------------------
// Panel tests
// ---------------------------------------------------------------------------

PanelTestResult llc_test(const SeriesPanel& panel, const UnitRootConfig& config) {
    require_panel(panel);
    config.validate(panel.front().size());
    const auto det = config.deterministic;
    const auto T = panel.front().size();
    std::vector<LlcEntity> ents;
    ents.reserve(panel.size());
    for (const auto& s : panel) {
        ents.push_back(llc_entity(s, resolve_lag(s, det, config.lags), det, config.bandwidth, true));
    }
    const auto N = static_cast<double>(panel.size());
    double num = 0.0, den = 0.0, s_sum = 0.0, lag_sum = 0.0, count = 0.0;
    for (const auto& e : ents) {
        num += e.e.dot(e.v);
        den += e.v.squaredNorm();
        s_sum += e.s_ratio;
        lag_sum += e.lags;
        count += static_cast<double>(e.e.size());
    }
    const double delta = num / den;
    double ssr = 0.0;
    for (const auto& e : ents) ssr += (e.e - delta * e.v).squaredNorm();
    const double p_bar = lag_sum / N;
    const double t_tilde = static_cast<double>(T) - p_bar - 1.0;
    const double sigma2 = ssr / (N * t_tilde);
    const double std_delta = std::sqrt(sigma2 / den);
    const double t_delta = delta / std_delta;
    const double s_n = s_sum / N;
    const auto adj = llc_adjustment(static_cast<std::size_t>(std::lround(t_tilde)), det);
    PanelTestResult out;
    out.statistic = (t_delta - N * t_tilde * s_n * std_delta * adj.mean / sigma2) / adj.sd;
    out.p_value = normal_cdf(out.statistic);
    return out;
}

PanelTestResult breitung_test(const SeriesPanel& panel, const UnitRootConfig& config) {
    require_panel(panel);
    config.validate(panel.front().size());
    const auto det = config.deterministic;
    if (det == Deterministic::none) throw std::invalid_argument("breitung_test requires deterministic terms");
    const bool trend = det == Deterministic::intercept_and_trend;
    double cross = 0.0, level_sq = 0.0, diff_sq = 0.0, count = 0.0;
    for (const auto& y : panel) {
        const int p = resolve_lag(y, det, config.lags);
        const double sd = adf_regression(y, p, det).residual_sd;
        const auto T = y.size();
        // Prewhitening coefficients from dy_t on its own lags (plus a drift when trending).
        std::vector<double> beta(static_cast<std::size_t>(p), 0.0);
        if (p > 0) {
            Eigen::MatrixXd X;
            Eigen::VectorXd dy;
            adf_design(y, p, trend ? Deterministic::intercept : Deterministic::none, static_cast<std::size_t>(p + 1), X, dy);
            const int d = trend ? 1 : 0;
            Eigen::MatrixXd Z(X.rows(), d + p);
            if (d) Z.col(0) = X.col(0);
            Z.rightCols(p) = X.rightCols(p);
            const Eigen::VectorXd b = Z.householderQr().solve(dy);
            for (int j = 0; j < p; ++j) beta[static_cast<std::size_t>(j)] = b(d + j);
        }
        // Filtered levels x_k = y_t - sum beta_j dy_{t-j} and filtered
        // differences e_k = dy_t - sum beta_j dy_{t-j}, both scaled by sd.
        const std::size_t first = p == 0 ? 0 : static_cast<std::size_t>(p + 1);
        auto filtered_lags = [&](std::size_t t) {
            double v = 0.0;
            for (int j = 1; j <= p; ++j) {
                const auto lag = t - static_cast<std::size_t>(j);
                v += beta[static_cast<std::size_t>(j - 1)] * (y[lag] - y[lag - 1]);
            }
            return v;
        };
        if (T < first + 4) throw std::invalid_argument("breitung_test: series too short");
        const std::size_t m = T - first - 1;
        std::vector<double> x(m + 1);
        std::vector<double> e(m + 1, 0.0);
        for (std::size_t k = 0; k <= m; ++k) {
            const std::size_t t = first + k;
            const double f = filtered_lags(t);
            x[k] = (y[t] - f) / sd;
            if (k > 0) e[k] = (y[t] - y[t - 1] - f) / sd;
        }
        std::vector<double> suffix(m + 2, 0.0);
        for (std::size_t k = m; k >= 1; --k) suffix[k] = suffix[k + 1] + e[k];
        const std::size_t last = trend ? m - 1 : m;
        for (std::size_t k = 1; k <= last; ++k) {
            double es = e[k];
            double xs = x[k - 1] - x[0];
            if (trend) {
                const double rest = static_cast<double>(m - k);
                es = std::sqrt(rest / (rest + 1.0)) * (e[k] - suffix[k + 1] / rest);
                xs -= (static_cast<double>(k - 1) / static_cast<double>(m)) * (x[m] - x[0]);
            }
            cross += es * xs;
            level_sq += xs * xs;
            diff_sq += es * es;
            count += 1.0;
        }
    }
    // Residual variance of the pooled proxy regression.
    const double sigma2 = (diff_sq - cross * cross / level_sq) / (count - 1.0);
    PanelTestResult out;
    out.statistic = cross / std::sqrt(sigma2 * level_sq);
    out.p_value = normal_cdf(out.statistic);
    return out;
}

PanelTestResult ips_test(const SeriesPanel& panel, const UnitRootConfig& config) {
    require_panel(panel);
    config.validate(panel.front().size());
    const auto det = config.deterministic;
    const auto T = panel.front().size();
    double t_sum = 0.0, mean_sum = 0.0, var_sum = 0.0;
    for (const auto& y : panel) {
        const auto r = adf_test(y, det, config.lags);
        const auto mom = ips_moments(T, r.lags, det);
        t_sum += r.statistic;
        mean_sum += mom.mean;
        var_sum += mom.variance;
    }
    const auto N = static_cast<double>(panel.size());
    PanelTestResult out;
    out.statistic = std::sqrt(N) * (t_sum / N - mean_sum / N) / std::sqrt(var_sum / N);
    out.p_value = normal_cdf(out.statistic);
    return out;
}

PanelTestResult fisher_combine(std::span<const double> p_values) {
    if (p_values.empty()) throw std::invalid_argument("fisher_combine: no p-values");
    double stat = 0.0;
    for (double p : p_values) {
        if (!(p > 0.0 && p <= 1.0)) {
            throw std::invalid_argument("fisher_combine: p-values must lie in (0, 1], got " + std::to_string(p));
        }
        stat -= 2.0 * std::log(p);
    }
    PanelTestResult out;
    out.statistic = stat;
    out.p_value = chi_square_sf(stat, 2.0 * static_cast<double>(p_values.size()));
    return out;
}

namespace {

// Response-surface p-values reach exactly 0 below the tabulated range; the
// Fisher statistic needs a positive floor.
double positive(double p) { return std::max(p, std::numeric_limits<double>::min()); }

}  // namespace

PanelTestResult adf_fisher_test(const SeriesPanel& panel, const UnitRootConfig& config) {
    require_panel(panel);
    config.validate(panel.front().size());
    std::vector<double> p;
    p.reserve(panel.size());
    for (const auto& y : panel) p.push_back(positive(adf_test(y, config.deterministic, config.lags).p_value));
    return fisher_combine(p);
}

PanelTestResult pp_fisher_test(const SeriesPanel& panel, const UnitRootConfig& config) {
    require_panel(panel);
    config.validate(panel.front().size());
    std::vector<double> p;
    p.reserve(panel.size());
    for (const auto& y : panel) p.push_back(positive(pp_regression(y, config.deterministic, config.bandwidth).p_value));
    return fisher_combine(p);
}

namespace {

double hadri_lm(std::span<const double> y, Deterministic det, std::optional<int> bandwidth) {
    const Eigen::VectorXd e = detrend(y, det);
    const std::span<const double> es(e.data(), static_cast<std::size_t>(e.size()));
    const int m = bandwidth ? *bandwidth : newey_west_bandwidth(es);
    const double lrv = bartlett_long_run_variance(es, m);
    if (!(lrv > 0.0)) throw std::invalid_argument("hadri_test: zero long-run variance");
    double partial = 0.0;
    double ss = 0.0;
    for (Eigen::Index t = 0; t < e.size(); ++t) {
        partial += e(t);
        ss += partial * partial;
    }
    const auto T = static_cast<double>(y.size());
    return ss / (T * T * lrv);
}

}  // namespace

DfMoments hadri_moments(std::size_t series_length, Deterministic det, std::optional<int> bandwidth) {
    if (det == Deterministic::none) throw std::invalid_argument("hadri_test requires deterministic terms");
    static std::mutex mu;
    static std::map<std::tuple<std::size_t, Deterministic, int>, DfMoments> cache;
    const int bw = bandwidth ? *bandwidth : -1;
    const auto key = std::make_tuple(series_length, det, bw);
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;

    const RandomStreams rng(moment_seed(0x484452ull, series_length, bw, det));
    std::vector<double> y(series_length);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int r = 0; r < kMomentReplications; ++r) {
        for (std::size_t t = 0; t < series_length; ++t) y[t] = rng.normal(static_cast<std::uint64_t>(r), t);
        const double lm = hadri_lm(y, det, bandwidth);
        sum += lm;
        sum_sq += lm * lm;
    }
    const double R = kMomentReplications;
    DfMoments m{sum / R, (sum_sq - sum * sum / R) / (R - 1.0)};
    cache.emplace(key, m);
    return m;
}

PanelTestResult hadri_test(const SeriesPanel& panel, const UnitRootConfig& config) {
    require_panel(panel);
    config.validate(panel.front().size());
    const auto det = config.deterministic;
    if (det == Deterministic::none) throw std::invalid_argument("hadri_test requires deterministic terms");
    double lm_sum = 0.0;
    for (const auto& y : panel) lm_sum += hadri_lm(y, det, config.bandwidth);
    const auto N = static_cast<double>(panel.size());
    const auto mom = hadri_moments(panel.front().size(), det, config.bandwidth);
    PanelTestResult out;
    out.statistic = std::sqrt(N) * (lm_sum / N - mom.mean) / std::sqrt(mom.variance);
    out.p_value = 1.0 - normal_cdf(out.statistic);
    return out;
}

// ---------------------------------------------------------------------------
// Battery and summary window
// ---------------------------------------------------------------------------

std::string to_string(UnitRootTest t) {
    switch (t) {
        case UnitRootTest::llc: return "LLC";
        case UnitRootTest::breitung: return "Breitung";
        case UnitRootTest::ips: return "IPS";
        case UnitRootTest::adf_fisher: return "ADF-Fisher";
        case UnitRootTest::pp_fisher: return "PP-Fisher";
        case UnitRootTest::hadri: return "Hadri";
    }
    return "?";
}

UnitRootTest parse_unit_root_test(const std::string& name) {
    std::string n;
    for (char c : name) {
        if (c != '-' && c != '_' && c != ' ') n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (n == "llc") return UnitRootTest::llc;
    if (n == "breitung") return UnitRootTest::breitung;
    if (n == "ips") return UnitRootTest::ips;
    if (n == "adffisher" || n == "adf") return UnitRootTest::adf_fisher;
    if (n == "ppfisher" || n == "pp") return UnitRootTest::pp_fisher;
    if (n == "hadri") return UnitRootTest::hadri;
    throw std::invalid_argument("unknown unit-root test '" + name + "'");
}

bool counts_in_summary(UnitRootTest t, Deterministic det) noexcept {
    switch (t) {
        case UnitRootTest::llc:
        case UnitRootTest::adf_fisher:
        case UnitRootTest::pp_fisher: return true;
        case UnitRootTest::ips: return det != Deterministic::none;
        case UnitRootTest::breitung: return det == Deterministic::intercept_and_trend;
        case UnitRootTest::hadri: return false;
    }
    return false;
}

int applicable_test_count(Deterministic det) noexcept {
    int n = 0;
    for (auto t : kUnitRootTests) n += counts_in_summary(t, det) ? 1 : 0;
    return n;
}

PanelTestResult run_test(UnitRootTest test, const SeriesPanel& panel, const UnitRootConfig& config) {
    switch (test) {
        case UnitRootTest::llc: return llc_test(panel, config);
        case UnitRootTest::breitung: return breitung_test(panel, config);
        case UnitRootTest::ips: return ips_test(panel, config);
        case UnitRootTest::adf_fisher: return adf_fisher_test(panel, config);
        case UnitRootTest::pp_fisher: return pp_fisher_test(panel, config);
        case UnitRootTest::hadri: return hadri_test(panel, config);
    }
    throw std::invalid_argument("unknown unit-root test");
}

Decision decide(double p_value, double alpha) noexcept {
    if (std::isnan(p_value)) return Decision::not_applicable;
    return p_value < alpha ? Decision::reject : Decision::fail_to_reject;
}

bool UnitRootSummary::hadri_footnote() const noexcept {
    return hadri_level.decision == Decision::reject && hadri_difference.decision == Decision::fail_to_reject;
}

const SummaryBlock& UnitRootSummary::block(Deterministic det, bool differenced) const {
    const auto& blocks = differenced ? first_difference : level;
    for (const auto& b : blocks)
        if (b.deterministic == det) return b;
    throw std::logic_error("missing summary block");
}

namespace {

SummaryCell run_cell(UnitRootTest test, Deterministic det, const SeriesPanel& panel, const UnitRootConfig& base) {
    UnitRootConfig cfg = base;
    cfg.deterministic = det;
    SummaryCell cell;
    cell.test = test;
    cell.deterministic = det;
    try {
        const auto r = run_test(test, panel, cfg);
        cell.statistic = r.statistic;
        cell.p_value = r.p_value;
        cell.decision = decide(r.p_value, cfg.significance);
    } catch (const std::exception& ex) {
        cell.statistic = kNaN;
        cell.p_value = kNaN;
        cell.decision = Decision::fail_to_reject;
        cell.error = ex.what();
    }
    return cell;
}

SummaryBlock run_block(const SeriesPanel& panel, Deterministic det, const UnitRootConfig& config) {
    SummaryBlock block;
    block.deterministic = det;
    for (auto test : kUnitRootTests) {
        if (!counts_in_summary(test, det)) continue;
        block.cells.push_back(run_cell(test, det, panel, config));
        ++block.applicable;
        if (block.cells.back().decision == Decision::reject) ++block.rejections;
    }
    return block;
}

std::array<SummaryBlock, 3> run_blocks(const SeriesPanel& panel, const UnitRootConfig& config) {
    std::array<SummaryBlock, 3> blocks;
    for (std::size_t b = 0; b < kSummaryOrder.size(); ++b) blocks[b] = run_block(panel, kSummaryOrder[b], config);
    return blocks;
}

}  // namespace

SummaryBlock summarize_block(const SeriesPanel& panel, Deterministic det, const UnitRootConfig& config) {
    require_panel(panel);
    if (!(config.significance > 0.0 && config.significance <= 0.5)) {
        throw std::invalid_argument("unit-root significance must lie in (0, 0.5]");
    }
    return run_block(panel, det, config);
}

UnitRootSummary summarize_series(const SeriesPanel& levels, const std::string& name, const UnitRootConfig& config) {
    require_panel(levels);
    if (!(config.significance > 0.0 && config.significance <= 0.5)) {
        throw std::invalid_argument("unit-root significance must lie in (0, 0.5]");
    }
    const auto diffs = difference(levels);
    UnitRootSummary s;
    s.variable = name;
    s.level = run_blocks(levels, config);
    s.first_difference = run_blocks(diffs, config);
    s.hadri_level = run_cell(UnitRootTest::hadri, Deterministic::intercept, levels, config);
    s.hadri_difference = run_cell(UnitRootTest::hadri, Deterministic::intercept, diffs, config);
    return s;
}

SeriesPanel panel_series(const PanelDataset& ds, const std::string& variable) {
    SeriesPanel out;
    out.reserve(ds.n_entities());
    for (std::size_t i = 0; i < ds.n_entities(); ++i) {
        auto s = ds.series(variable, i);
        for (std::size_t t = 0; t < s.size(); ++t) {
            if (std::isnan(s[t])) {
                throw DataError("variable '" + variable + "' is missing for " + ds.entities()[i] + " in " +
                                std::to_string(ds.periods()[t]) + " (interpolate first)");
            }
        }
        out.emplace_back(s.begin(), s.end());
    }
    return out;
}

SeriesPanel difference(const SeriesPanel& panel) {
    SeriesPanel out;
    out.reserve(panel.size());
    for (const auto& s : panel) {
        if (s.size() < 2) throw std::invalid_argument("difference: series needs at least two points");
        std::vector<double> d(s.size() - 1);
        for (std::size_t t = 1; t < s.size(); ++t) d[t - 1] = s[t] - s[t - 1];
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<UnitRootSummary> summary_window(const PanelDataset& ds, const std::vector<std::string>& variables,
                                            const UnitRootConfig& config) {
    std::vector<UnitRootSummary> out;
    out.reserve(variables.size());
    for (const auto& v : variables) out.push_back(summarize_series(panel_series(ds, v), v, config));
    return out;
}

void render_summary_window(std::ostream& out, const std::vector<UnitRootSummary>& rows, double significance) {
    std::ostringstream alpha;
    alpha << significance * 100.0 << "%";
    out << "Stationarity tests - summary window (alpha = " << alpha.str() << ")\n";
    out << std::left << std::setw(16) << "" << std::setw(42) << "Tests rejecting unit root: level"
        << "Tests rejecting unit root: 1st difference\n";
    out << std::left << std::setw(16) << "Variable";
    for (int pass = 0; pass < 2; ++pass) {
        out << std::setw(14) << "Intercept" << std::setw(14) << "Int.+trend" << std::setw(14) << "None";
    }
    out << '\n';
    bool any_footnote = false;
    for (const auto& r : rows) {
        std::string label = r.variable;
        if (r.hadri_footnote()) {
            label += "*";
            any_footnote = true;
        }
        out << std::setw(16) << label;
        for (const auto* blocks : {&r.level, &r.first_difference}) {
            for (const auto& b : *blocks) {
                out << std::setw(14) << (std::to_string(b.rejections) + " of " + std::to_string(b.applicable));
            }
        }
        out << '\n';
    }
    if (any_footnote) {
        out << "*Hadri test rejects the stationarity hypothesis at level and accepts it after the first difference.\n";
    }
    out.flush();
}

}  // namespace panelecm
