#include "panelecm/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/beta.hpp>

#include "panelecm/random.hpp"

namespace panelecm {

namespace {

std::vector<std::string> entity_names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::ostringstream s;
        s << 'E' << std::setw(2) << std::setfill('0') << i + 1;
        out.push_back(s.str());
    }
    return out;
}

PanelDataset make_dataset(const DgpSpec& spec, const std::vector<std::pair<std::string, Eigen::MatrixXd>>& vars) {
    std::vector<int> periods(spec.n_periods);
    for (std::size_t t = 0; t < spec.n_periods; ++t) periods[t] = spec.first_period + static_cast<int>(t);
    std::map<std::string, PanelDataset::Variable> m;
    for (const auto& [name, mat] : vars) {
        PanelDataset::Variable v;
        v.values.resize(static_cast<std::size_t>(mat.size()));
        for (Eigen::Index i = 0; i < mat.rows(); ++i)
            for (Eigen::Index t = 0; t < mat.cols(); ++t)
                v.values[static_cast<std::size_t>(i * mat.cols() + t)] = mat(i, t);
        v.provenance.assign(v.values.size(), Provenance::observed);
        m.emplace(name, std::move(v));
    }
    return PanelDataset(entity_names(spec.n_entities), std::move(periods), std::move(m));
}

// Stream ids: one per (entity, variable) so draws do not depend on panel shape.
std::uint64_t stream_id(std::size_t entity, std::size_t variable) {
    return (static_cast<std::uint64_t>(entity) << 16) | static_cast<std::uint64_t>(variable);
}

constexpr std::size_t kFactorStream = 0xFFFF;

PanelDataset known_ecm(const DgpSpec& spec) {
    const auto& p = spec.ecm;
    const EcmSpec names = EcmSpec::replication();
    const std::size_t K = names.long_run_terms.size();
    const std::size_t N = spec.n_entities;
    const std::size_t T = spec.n_periods;
    const auto B = static_cast<std::size_t>(p.burn_in);
    const std::size_t total = B + T;
    const RandomStreams rng(spec.seed);

    // Position of each long-run term inside the lagged / contemporaneous lists.
    std::vector<double> lag_coef(K, 0.0);
    std::vector<double> now_coef(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        const auto& v = names.long_run_terms[k];
        for (std::size_t j = 0; j < names.lagged_difference_terms.size(); ++j)
            if (names.lagged_difference_terms[j] == v) lag_coef[k] = p.lagged[j];
        for (std::size_t j = 0; j < names.contemporaneous_difference_terms.size(); ++j)
            if (names.contemporaneous_difference_terms[j] == v) now_coef[k] = p.contemporaneous[j];
    }
    const double ar = p.lagged[0];

    // Steady state with E[u] = 0: constant = b'mu (1 - ar) - sum (lag + now) mu.
    double bracket = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        bracket += p.beta[k] * p.drift_pattern[k] * (1.0 - ar) - (lag_coef[k] + now_coef[k]) * p.drift_pattern[k];
    }
    if (p.constant != 0.0 && std::abs(bracket) < 1e-12) {
        throw std::invalid_argument("known_ecm: drift pattern cannot support a non-zero constant");
    }
    const double scale = p.constant == 0.0 ? 0.0 : p.constant / bracket;

    std::vector<Eigen::MatrixXd> x(K, Eigen::MatrixXd(N, T));
    Eigen::MatrixXd y(N, T);
    for (std::size_t i = 0; i < N; ++i) {
        std::vector<double> level(K, 0.0);
        std::vector<double> prev_dx(K, 0.0);
        std::vector<double> dx(K, 0.0);
        double yv = p.beta_constant;
        double prev_dy = 0.0;
        for (std::size_t t = 0; t < total; ++t) {
            for (std::size_t k = 0; k < K; ++k) {
                dx[k] = scale * p.drift_pattern[k] + p.regressor_sd * rng.normal(stream_id(i, k + 1), t);
            }
            double u_prev = yv - p.beta_constant;
            for (std::size_t k = 0; k < K; ++k) u_prev -= p.beta[k] * level[k];
            double dy = p.constant + ar * prev_dy + p.adjustment * u_prev + p.error_sd * rng.normal(stream_id(i, 0), t);
            for (std::size_t k = 0; k < K; ++k) dy += lag_coef[k] * prev_dx[k] + now_coef[k] * dx[k];
            for (std::size_t k = 0; k < K; ++k) level[k] += dx[k];
            yv += dy;
            prev_dy = dy;
            prev_dx = dx;
            if (t >= B) {
                const auto c = static_cast<Eigen::Index>(t - B);
                const auto r = static_cast<Eigen::Index>(i);
                y(r, c) = yv;
                for (std::size_t k = 0; k < K; ++k) x[k](r, c) = level[k];
            }
        }
    }
    std::vector<std::pair<std::string, Eigen::MatrixXd>> vars{{names.dependent, y}};
    for (std::size_t k = 0; k < K; ++k) vars.emplace_back(names.long_run_terms[k], x[k]);
    return make_dataset(spec, vars);
}

}  // namespace

std::vector<double> KnownEcmParameters::short_run_vector() const {
    std::vector<double> v(lagged);
    v.insert(v.end(), contemporaneous.begin(), contemporaneous.end());
    v.push_back(constant);
    v.push_back(adjustment);
    return v;
}

std::string to_string(DgpKind k) {
    switch (k) {
        case DgpKind::random_walk_panel: return "random_walk_panel";
        case DgpKind::stationary_ar1_panel: return "stationary_ar1_panel";
        case DgpKind::cointegrated_panel: return "cointegrated_panel";
        case DgpKind::common_factor_panel: return "common_factor_panel";
        case DgpKind::heteroskedastic_regression: return "heteroskedastic_regression";
        case DgpKind::known_ecm: return "known_ecm";
    }
    return "?";
}

DgpKind parse_dgp_kind(const std::string& name) {
    for (auto k : {DgpKind::random_walk_panel, DgpKind::stationary_ar1_panel, DgpKind::cointegrated_panel,
                   DgpKind::common_factor_panel, DgpKind::heteroskedastic_regression, DgpKind::known_ecm}) {
        if (to_string(k) == name) return k;
    }
    throw std::invalid_argument("unknown data-generating process '" + name + "'");
}

void DgpSpec::validate() const {
    if (n_entities < 1) throw std::invalid_argument("DGP needs at least one entity");
    if (n_periods < 10) throw std::invalid_argument("DGP needs at least 10 periods");
    if (!(noise_scale > 0.0)) throw std::invalid_argument("noise scale must be positive");
    const bool stationary = kind == DgpKind::stationary_ar1_panel || kind == DgpKind::cointegrated_panel ||
                            kind == DgpKind::common_factor_panel;
    if (stationary && !(std::abs(rho) < 1.0)) throw std::invalid_argument("|rho| must be below 1 for a stationary process");
    if (kind == DgpKind::heteroskedastic_regression && n_regressors < 1) {
        throw std::invalid_argument("heteroskedastic_regression needs at least one regressor");
    }
    if (kind == DgpKind::known_ecm) {
        const auto names = EcmSpec::replication();
        if (ecm.lagged.size() != names.lagged_difference_terms.size() ||
            ecm.contemporaneous.size() != names.contemporaneous_difference_terms.size() ||
            ecm.beta.size() != names.long_run_terms.size() || ecm.drift_pattern.size() != names.long_run_terms.size()) {
            throw std::invalid_argument("known_ecm parameter lists do not match the replication specification");
        }
        if (ecm.burn_in < 0 || !(ecm.error_sd > 0.0) || !(ecm.regressor_sd > 0.0)) {
            throw std::invalid_argument("known_ecm needs a non-negative burn-in and positive scales");
        }
    }
}

PanelDataset generate(const DgpSpec& spec) {
    spec.validate();
    const std::size_t N = spec.n_entities;
    const std::size_t T = spec.n_periods;
    const RandomStreams rng(spec.seed);
    const double s = spec.noise_scale;
    auto draw = [&](std::size_t i, std::size_t v, std::size_t t) { return s * rng.normal(stream_id(i, v), t); };
    const auto n = static_cast<Eigen::Index>(N);
    const auto m = static_cast<Eigen::Index>(T);

    switch (spec.kind) {
        case DgpKind::random_walk_panel: {
            Eigen::MatrixXd y(n, m);
            for (Eigen::Index i = 0; i < n; ++i) {
                double v = 0.0;
                for (Eigen::Index t = 0; t < m; ++t) {
                    if (t > 0) v += draw(static_cast<std::size_t>(i), 0, static_cast<std::size_t>(t));
                    y(i, t) = v;
                }
            }
            return make_dataset(spec, {{"y", y}});
        }
        case DgpKind::stationary_ar1_panel: {
            Eigen::MatrixXd y(n, m);
            const double init_sd = 1.0 / std::sqrt(1.0 - spec.rho * spec.rho);
            for (Eigen::Index i = 0; i < n; ++i) {
                double v = init_sd * draw(static_cast<std::size_t>(i), 0, 0);
                y(i, 0) = v;
                for (Eigen::Index t = 1; t < m; ++t) {
                    v = spec.rho * v + draw(static_cast<std::size_t>(i), 0, static_cast<std::size_t>(t));
                    y(i, t) = v;
                }
            }
            return make_dataset(spec, {{"y", y}});
        }
        case DgpKind::cointegrated_panel: {
            Eigen::MatrixXd x(n, m);
            Eigen::MatrixXd y(n, m);
            const double init_sd = 1.0 / std::sqrt(1.0 - spec.rho * spec.rho);
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto ii = static_cast<std::size_t>(i);
                double level = 0.0;
                double u = init_sd * draw(ii, 1, 0);
                for (Eigen::Index t = 0; t < m; ++t) {
                    const auto tt = static_cast<std::size_t>(t);
                    if (t > 0) {
                        level += draw(ii, 0, tt);
                        u = spec.rho * u + draw(ii, 1, tt);
                    }
                    x(i, t) = level;
                    y(i, t) = 1.0 + spec.loading * level + u;
                }
            }
            return make_dataset(spec, {{"x", x}, {"y", y}});
        }
        case DgpKind::common_factor_panel: {
            Eigen::MatrixXd y(n, m);
            const double init_sd = 1.0 / std::sqrt(1.0 - spec.rho * spec.rho);
            std::vector<double> f(T);
            double fv = init_sd * rng.normal(kFactorStream, 0);
            for (std::size_t t = 0; t < T; ++t) {
                if (t > 0) fv = spec.rho * fv + rng.normal(kFactorStream, t);
                f[t] = fv;
            }
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index t = 0; t < m; ++t)
                    y(i, t) = spec.loading * f[static_cast<std::size_t>(t)] +
                              draw(static_cast<std::size_t>(i), 0, static_cast<std::size_t>(t));
            return make_dataset(spec, {{"y", y}});
        }
        case DgpKind::heteroskedastic_regression: {
            const std::size_t k = spec.n_regressors;
            std::vector<std::pair<std::string, Eigen::MatrixXd>> vars;
            std::vector<Eigen::MatrixXd> xs(k, Eigen::MatrixXd(n, m));
            Eigen::MatrixXd y(n, m);
            for (Eigen::Index i = 0; i < n; ++i) {
                for (Eigen::Index t = 0; t < m; ++t) {
                    const auto ii = static_cast<std::size_t>(i);
                    const auto tt = static_cast<std::size_t>(t);
                    double yv = 1.0;
                    for (std::size_t j = 0; j < k; ++j) {
                        // x1 is positive so the variance pattern x1^h is well defined.
                        const double xv = j == 0 ? 0.5 + 4.0 * rng.uniform(stream_id(ii, j + 1), tt)
                                                 : rng.normal(stream_id(ii, j + 1), tt);
                        xs[j](i, t) = xv;
                        yv += xv;
                    }
                    const double sd = std::pow(xs[0](i, t), 0.5 * spec.heteroskedasticity);
                    y(i, t) = yv + sd * draw(ii, 0, tt);
                }
            }
            vars.emplace_back("y", y);
            for (std::size_t j = 0; j < k; ++j) vars.emplace_back("x" + std::to_string(j + 1), xs[j]);
            return make_dataset(spec, vars);
        }
        case DgpKind::known_ecm: return known_ecm(spec);
    }
    throw std::invalid_argument("unknown data-generating process");
}

RateEstimate binomial_rate(std::size_t hits, std::size_t replications, double confidence) {
    if (replications == 0) throw std::invalid_argument("binomial_rate: zero replications");
    if (hits > replications) throw std::invalid_argument("binomial_rate: more hits than replications");
    if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("confidence must lie in (0, 1)");
    RateEstimate r;
    r.hits = hits;
    r.replications = replications;
    const auto x = static_cast<double>(hits);
    const auto n = static_cast<double>(replications);
    r.rate = x / n;
    const double tail = 0.5 * (1.0 - confidence);
    r.lower = hits == 0 ? 0.0 : boost::math::quantile(boost::math::beta_distribution<double>(x, n - x + 1.0), tail);
    r.upper = hits == replications ? 1.0
                                   : boost::math::quantile(boost::math::beta_distribution<double>(x + 1.0, n - x), 1.0 - tail);
    return r;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, unsigned threads) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mu);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

RateEstimate monte_carlo_rate(std::size_t replications, std::uint64_t base_seed,
                              const std::function<bool(std::uint64_t)>& trial, unsigned threads) {
    std::vector<char> hit(replications, 0);
    parallel_for(
        replications, [&](std::size_t i) { hit[i] = trial(replication_seed(base_seed, i)) ? 1 : 0; }, threads);
    std::size_t hits = 0;
    for (char h : hit) hits += static_cast<std::size_t>(h);
    return binomial_rate(hits, replications);
}

RateEstimate monte_carlo_size(const std::function<double(const PanelDataset&)>& p_value, DgpSpec spec,
                              std::size_t replications, double alpha, unsigned threads) {
    spec.validate();
    const std::uint64_t base = spec.seed;
    return monte_carlo_rate(
        replications, base,
        [&](std::uint64_t seed) {
            DgpSpec s = spec;
            s.seed = seed;
            return p_value(generate(s)) < alpha;
        },
        threads);
}

}  // namespace panelecm
