#include "spinbath/fitkit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "spinbath/bath_model.hpp"
#include "spinbath/error.hpp"
#include "spinbath/spin_core.hpp"
#include "spinbath/text.hpp"

namespace spinbath {

std::size_t ModelSpec::parameter_index(std::string_view param) const {
    for (std::size_t i = 0; i < parameter_names.size(); ++i)
        if (parameter_names[i] == param) return i;
    std::string valid;
    for (auto const& n : parameter_names) valid += (valid.empty() ? "" : ", ") + n;
    throw LookupError("model '" + name + "' has no parameter '" + std::string(param) + "' (valid: " + valid + ")");
}

double FitResult::param(std::string_view n) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == n) return params[i];
    throw LookupError("fit result has no parameter '" + std::string(n) + "'");
}

double FitResult::stderr_of(std::string_view n) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == n) return stderrs[i];
    throw LookupError("fit result has no parameter '" + std::string(n) + "'");
}

namespace {

struct SortedData {
    std::vector<std::size_t> order;  // sorted position -> input index
    std::vector<double> x, y, sigma;
};

SortedData sort_data(FitData const& data) {
    std::size_t const n = data.x.size();
    SortedData s;
    s.order.resize(n);
    std::iota(s.order.begin(), s.order.end(), std::size_t{0});
    auto sigma_at = [&](std::size_t i) { return data.sigma.empty() ? 1.0 : data.sigma[i]; };
    std::sort(s.order.begin(), s.order.end(), [&](std::size_t a, std::size_t b) {
        if (data.x[a] != data.x[b]) return data.x[a] < data.x[b];
        if (data.y[a] != data.y[b]) return data.y[a] < data.y[b];
        return sigma_at(a) < sigma_at(b);
    });
    for (std::size_t i : s.order) {
        s.x.push_back(data.x[i]);
        s.y.push_back(data.y[i]);
        s.sigma.push_back(sigma_at(i));
    }
    return s;
}

// Forward-difference fallback for models without an analytic gradient.
void numeric_gradient(ModelSpec const& model, std::span<double const> p, double x, std::span<double> grad) {
    std::vector<double> q(p.begin(), p.end());
    for (std::size_t j = 0; j < q.size(); ++j) {
        double const h = 1e-7 * std::max(std::abs(p[j]), 1e-12);
        q[j] = p[j] + h;
        double const up = model.evaluate(q, x);
        q[j] = p[j] - h;
        double const down = model.evaluate(q, x);
        q[j] = p[j];
        grad[j] = (up - down) / (2.0 * h);
    }
}

class Problem {
public:
    Problem(ModelSpec const& model, SortedData const& data, std::vector<double> base, std::vector<std::size_t> free)
        : model_(model), data_(data), base_(std::move(base)), free_(std::move(free)) {}

    [[nodiscard]] std::vector<double> params(Eigen::VectorXd const& theta) const {
        std::vector<double> p = base_;
        for (std::size_t k = 0; k < free_.size(); ++k) {
            std::size_t const j = free_[k];
            p[j] = model_.positive[j] ? std::exp(theta[static_cast<Eigen::Index>(k)]) : theta[static_cast<Eigen::Index>(k)];
        }
        return p;
    }

    [[nodiscard]] Eigen::VectorXd theta(std::vector<double> const& p) const {
        Eigen::VectorXd t(static_cast<Eigen::Index>(free_.size()));
        for (std::size_t k = 0; k < free_.size(); ++k) {
            std::size_t const j = free_[k];
            t[static_cast<Eigen::Index>(k)] = model_.positive[j] ? std::log(p[j]) : p[j];
        }
        return t;
    }

    [[nodiscard]] Eigen::VectorXd residuals(std::vector<double> const& p) const {
        Eigen::VectorXd r(static_cast<Eigen::Index>(data_.x.size()));
        for (std::size_t i = 0; i < data_.x.size(); ++i)
            r[static_cast<Eigen::Index>(i)] = (data_.y[i] - model_.evaluate(p, data_.x[i])) / data_.sigma[i];
        return r;
    }

    /// d residual / d parameter. `internal` selects log-space for positive params.
    [[nodiscard]] Eigen::MatrixXd jacobian(std::vector<double> const& p, bool internal) const {
        auto const n = static_cast<Eigen::Index>(data_.x.size());
        auto const k = static_cast<Eigen::Index>(free_.size());
        Eigen::MatrixXd jac(n, k);
        std::vector<double> grad(p.size());
        for (Eigen::Index i = 0; i < n; ++i) {
            auto const ui = static_cast<std::size_t>(i);
            if (model_.gradient)
                model_.gradient(p, data_.x[ui], grad);
            else
                numeric_gradient(model_, p, data_.x[ui], grad);
            for (Eigen::Index c = 0; c < k; ++c) {
                std::size_t const j = free_[static_cast<std::size_t>(c)];
                double d = grad[j];
                if (internal && model_.positive[j]) d *= p[j];
                jac(i, c) = -d / data_.sigma[ui];
            }
        }
        return jac;
    }

private:
    ModelSpec const& model_;
    SortedData const& data_;
    std::vector<double> base_;
    std::vector<std::size_t> free_;
};

bool all_finite(Eigen::VectorXd const& v) { return v.allFinite(); }

}  // namespace

FitResult fit(ModelSpec const& model, FitData const& data, std::vector<double> init, FitOptions const& options) {
    std::size_t const n = data.x.size();
    std::size_t const np = model.parameter_count();
    if (data.y.size() != n || (!data.sigma.empty() && data.sigma.size() != n))
        throw DomainError("fit: x, y and sigma must have equal length");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(data.x[i]) || !std::isfinite(data.y[i]))
            throw DomainError("fit: data point " + std::to_string(i) + " is not finite");
        if (!data.sigma.empty() && !(data.sigma[i] > 0.0))
            throw DomainError("fit: sigma must be > 0 (point " + std::to_string(i) + ")");
    }

    std::vector<bool> is_fixed(np, false);
    for (auto const& [name, value] : options.fixed) is_fixed[model.parameter_index(name)] = true;
    for (auto const& [name, value] : options.initial) (void)model.parameter_index(name);
    std::vector<std::size_t> free;
    for (std::size_t j = 0; j < np; ++j)
        if (!is_fixed[j]) free.push_back(j);
    if (n < free.size() || (free.empty() && n == 0))
        throw DomainError("fit: underdetermined, " + std::to_string(n) + " points for " + std::to_string(free.size()) +
                          " free parameters");

    SortedData const sorted = sort_data(data);

    if (init.empty()) init = model.initial_guess(sorted.x, sorted.y, options);
    if (init.size() != np) throw DomainError("fit: initial guess has wrong parameter count");
    for (auto const& [name, value] : options.initial) init[model.parameter_index(name)] = value;
    for (auto const& [name, value] : options.fixed) init[model.parameter_index(name)] = value;
    for (std::size_t j : free) {
        if (!std::isfinite(init[j])) throw DomainError("fit: initial value of " + model.parameter_names[j] + " is not finite");
        if (model.positive[j] && !(init[j] > 0.0))
            throw DomainError("fit: initial value of " + model.parameter_names[j] + " must be > 0");
    }

    FitResult result;
    result.model = model.name;
    result.names = model.parameter_names;
    result.fixed = is_fixed;

    Problem const problem(model, sorted, init, free);
    Eigen::VectorXd theta = problem.theta(init);
    std::vector<double> p = problem.params(theta);
    Eigen::VectorXd r = problem.residuals(p);
    if (!all_finite(r)) throw DomainError("fit: model is not finite at the initial guess");
    double cost = r.squaredNorm();
    result.cost_history.push_back(cost);

    double lambda = 1e-3;
    int iter = 0;
    bool converged = false;
    std::string termination = "maximum iterations reached";
    double gnorm = 0.0;

    if (free.empty()) {
        converged = true;
        termination = "no free parameters";
    }

    while (!converged && iter < options.max_iterations) {
        Eigen::MatrixXd const jac = problem.jacobian(p, true);
        Eigen::VectorXd const g = jac.transpose() * r;
        gnorm = g.lpNorm<Eigen::Infinity>();
        if (cost == 0.0 || gnorm < options.gradient_tolerance) {
            converged = true;
            termination = cost == 0.0 ? "exact fit" : "gradient below tolerance";
            break;
        }
        Eigen::MatrixXd const jtj = jac.transpose() * jac;
        Eigen::VectorXd diag = jtj.diagonal();
        for (Eigen::Index i = 0; i < diag.size(); ++i) diag[i] = std::max(diag[i], 1e-300);

        bool accepted = false;
        while (!accepted && iter < options.max_iterations) {
            ++iter;
            Eigen::MatrixXd lhs = jtj;
            lhs.diagonal() += lambda * diag;
            Eigen::VectorXd const step = lhs.ldlt().solve(-g);
            Eigen::VectorXd const trial_theta = theta + step;
            double trial_cost = std::numeric_limits<double>::infinity();
            std::vector<double> trial_p;
            Eigen::VectorXd trial_r;
            if (all_finite(step) && all_finite(trial_theta)) {
                trial_p = problem.params(trial_theta);
                trial_r = problem.residuals(trial_p);
                if (all_finite(trial_r)) trial_cost = trial_r.squaredNorm();
            }
            if (trial_cost < cost) {
                double const rel = (cost - trial_cost) / cost;
                theta = trial_theta;
                p = std::move(trial_p);
                r = std::move(trial_r);
                cost = trial_cost;
                result.cost_history.push_back(cost);
                lambda = std::max(lambda / 3.0, 1e-15);
                accepted = true;
                if (rel < options.relative_cost_tolerance) {
                    converged = true;
                    termination = "relative cost change below tolerance";
                }
            } else {
                lambda *= 4.0;
                if (lambda > 1e16) {
                    // No descent direction left at working precision.
                    converged = true;
                    termination = "stationary to machine precision";
                    break;
                }
            }
        }
        if (converged) break;
    }

    result.params = p;
    for (auto const& [name, value] : options.fixed) result.params[model.parameter_index(name)] = value;
    result.iterations = iter;
    result.converged = converged;
    result.termination = termination;
    result.chi2 = cost;
    result.dof = n - free.size();
    result.reduced_chi2 = result.dof > 0 ? cost / static_cast<double>(result.dof) : std::numeric_limits<double>::quiet_NaN();

    {
        Eigen::MatrixXd const jac = problem.jacobian(result.params, true);
        result.gradient_norm = free.empty() ? 0.0 : (jac.transpose() * r).lpNorm<Eigen::Infinity>();
    }

    result.covariance.assign(np * np, 0.0);
    result.stderrs.assign(np, 0.0);
    if (!free.empty()) {
        Eigen::MatrixXd const jac = problem.jacobian(result.params, false);
        Eigen::MatrixXd const info = jac.transpose() * jac;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
        Eigen::MatrixXd cov;
        if (lu.isInvertible()) {
            cov = lu.inverse();
        } else {
            cov = Eigen::MatrixXd::Constant(info.rows(), info.cols(), std::numeric_limits<double>::quiet_NaN());
        }
        double const scale =
            options.scale_by_reduced_chi2 && result.dof > 0 ? result.reduced_chi2 : 1.0;
        for (std::size_t a = 0; a < free.size(); ++a) {
            for (std::size_t b = 0; b < free.size(); ++b)
                result.covariance[free[a] * np + free[b]] = cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            double const var = cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) * scale;
            result.stderrs[free[a]] = std::sqrt(std::max(var, 0.0));
        }
    }

    result.residuals.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        result.residuals[sorted.order[i]] = sorted.y[i] - model.evaluate(result.params, sorted.x[i]);
    return result;
}

double jacobian_check(ModelSpec const& model, std::span<double const> params, std::span<double const> x_probe) {
    if (!model.gradient) throw DomainError("jacobian_check: model '" + model.name + "' has no analytic gradient");
    if (params.size() != model.parameter_count()) throw DomainError("jacobian_check: wrong parameter count");
    std::vector<double> analytic(params.size());
    std::vector<double> q(params.begin(), params.end());
    double worst = 0.0;
    for (double x : x_probe) {
        model.gradient(params, x, analytic);
        for (std::size_t j = 0; j < params.size(); ++j) {
            double const magnitude = params[j] != 0.0 ? 1e-6 * std::abs(params[j]) : 1e-6;
            double const h = std::exp2(std::round(std::log2(magnitude)));
            q[j] = params[j] + h;
            double const up = model.evaluate(q, x);
            q[j] = params[j] - h;
            double const down = model.evaluate(q, x);
            q[j] = params[j];
            double const numeric = (up - down) / (2.0 * h);
            double const denom = std::max({std::abs(analytic[j]), std::abs(numeric), 1e-300});
            double const dev = analytic[j] == numeric ? 0.0 : std::abs(analytic[j] - numeric) / denom;
            worst = std::max(worst, dev);
        }
    }
    return worst;
}

namespace {

// Least-squares slope and intercept of y on x.
std::pair<double, double> linear_regression(std::vector<double> const& x, std::vector<double> const& y) {
    double const n = static_cast<double>(x.size());
    double const mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double const my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    double const slope = sxx > 0.0 ? sxy / sxx : 0.0;
    return {slope, my - slope * mx};
}

double span_of(std::span<double const> x) {
    if (x.empty()) return 1.0;
    auto const [lo, hi] = std::minmax_element(x.begin(), x.end());
    double const s = *hi - *lo;
    return s > 0.0 ? s : std::max(std::abs(*hi), 1.0);
}

}  // namespace

ModelSpec echo_decay_model() {
    ModelSpec m;
    m.name = "echo_decay";
    m.formula = "a * exp(-2 tau / T2)";
    m.x_name = "tau";
    m.y_name = "echo amplitude";
    m.parameter_names = {"a", "T2"};
    m.parameter_units = {"1", "s"};
    m.positive = {true, true};
    m.evaluate = [](std::span<double const> p, double x) { return p[0] * std::exp(-2.0 * x / p[1]); };
    m.gradient = [](std::span<double const> p, double x, std::span<double> g) {
        double const e = std::exp(-2.0 * x / p[1]);
        g[0] = e;
        g[1] = p[0] * e * 2.0 * x / (p[1] * p[1]);
    };
    m.initial_guess = [](std::span<double const> x, std::span<double const> y, FitOptions const&) {
        double const a = std::max(*std::max_element(y.begin(), y.end()), 1e-12);
        std::vector<double> lx, ly;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (y[i] > 0.05 * a) {
                lx.push_back(2.0 * x[i]);
                ly.push_back(std::log(y[i] / a));
            }
        }
        double t2 = span_of(x);
        if (lx.size() >= 2) {
            auto const [slope, intercept] = linear_regression(lx, ly);
            if (slope < 0.0) t2 = -1.0 / slope;
        }
        return std::vector<double>{a, t2};
    };
    return m;
}

ModelSpec inversion_recovery_model() {
    ModelSpec m;
    m.name = "inversion_recovery";
    m.formula = "y0 - a * exp(-T / T1)";
    m.x_name = "T";
    m.y_name = "echo amplitude";
    m.parameter_names = {"y0", "a", "T1"};
    m.parameter_units = {"1", "1", "s"};
    m.positive = {false, false, true};
    m.evaluate = [](std::span<double const> p, double x) { return p[0] - p[1] * std::exp(-x / p[2]); };
    m.gradient = [](std::span<double const> p, double x, std::span<double> g) {
        double const e = std::exp(-x / p[2]);
        g[0] = 1.0;
        g[1] = -e;
        g[2] = -p[1] * e * x / (p[2] * p[2]);
    };
    m.initial_guess = [](std::span<double const> x, std::span<double const> y, FitOptions const&) {
        double const y0 = *std::max_element(y.begin(), y.end());
        double const a = y0 - y.front();
        std::vector<double> lx, ly;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double const gap = y0 - y[i];
            if (gap > 0.05 * std::abs(a) && gap > 0.0) {
                lx.push_back(x[i]);
                ly.push_back(std::log(gap));
            }
        }
        double t1 = span_of(x) / 3.0;
        if (lx.size() >= 2) {
            auto const [slope, intercept] = linear_regression(lx, ly);
            if (slope < 0.0) t1 = -1.0 / slope;
        }
        return std::vector<double>{y0, a != 0.0 ? a : 1.0, t1};
    };
    return m;
}

ModelSpec t1_model() {
    ModelSpec m;
    m.name = "t1_model";
    m.formula = "1/T1 = A T + B T^5";
    m.x_name = "temperature_K";
    m.y_name = "1/T1 (1/s)";
    m.parameter_names = {"A", "B"};
    m.parameter_units = {"1/(s K)", "1/(s K^5)"};
    m.positive = {true, true};
    m.evaluate = [](std::span<double const> p, double x) {
        double const x2 = x * x;
        return p[0] * x + p[1] * x2 * x2 * x;
    };
    m.gradient = [](std::span<double const> p, double x, std::span<double> g) {
        (void)p;
        double const x2 = x * x;
        g[0] = x;
        g[1] = x2 * x2 * x;
    };
    m.initial_guess = [](std::span<double const> x, std::span<double const> y, FitOptions const&) {
        // Linear in (A, B): solve the 2x2 normal equations directly.
        double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double const f1 = x[i];
            double const f2 = std::pow(x[i], 5);
            s11 += f1 * f1;
            s12 += f1 * f2;
            s22 += f2 * f2;
            b1 += f1 * y[i];
            b2 += f2 * y[i];
        }
        double const det = s11 * s22 - s12 * s12;
        double a = det != 0.0 ? (b1 * s22 - b2 * s12) / det : 0.0;
        double b = det != 0.0 ? (s11 * b2 - s12 * b1) / det : 0.0;
        double const xmax = *std::max_element(x.begin(), x.end());
        double const ymax = *std::max_element(y.begin(), y.end());
        if (!(a > 0.0)) a = 0.1 * std::abs(ymax) / xmax;
        if (!(b > 0.0)) b = 0.1 * std::abs(ymax) / std::pow(xmax, 5);
        return std::vector<double>{a, b};
    };
    return m;
}

ModelSpec t2_model() {
    ModelSpec m;
    m.name = "t2_model";
    m.formula = "1/T2 = C / ((1 + exp(T_Ze/T)) (1 + exp(-T_Ze/T))) + Gamma_res";
    m.x_name = "temperature_K";
    m.y_name = "1/T2 (1/us)";
    m.parameter_names = {"C", "T_Ze", "Gamma_res"};
    m.parameter_units = {"1/us", "K", "1/us"};
    m.positive = {true, true, true};
    m.evaluate = [](std::span<double const> p, double x) { return p[0] * flip_flop_factor(x, p[1]) + p[2]; };
    m.gradient = [](std::span<double const> p, double x, std::span<double> g) {
        double const f = flip_flop_factor(x, p[1]);
        double const u = p[1] / x;
        // d f / d u = -f tanh(u/2)
        double const tanh_half = -std::expm1(-u) / (1.0 + std::exp(-u));
        g[0] = f;
        g[1] = -p[0] * f * tanh_half / x;
        g[2] = 1.0;
    };
    m.initial_guess = [](std::span<double const> x, std::span<double const> y, FitOptions const& options) {
        double const t_ze = zeeman_temperature(options.spectrometer_freq_hz);
        double const ymin = *std::min_element(y.begin(), y.end());
        double gamma = 0.9 * ymin;
        if (auto it = options.fixed.find("Gamma_res"); it != options.fixed.end()) gamma = it->second;
        if (!(gamma > 0.0)) gamma = 1e-6;
        std::size_t const imax = static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin());
        double c = 4.0 * (y[imax] - gamma);
        if (!(c > 0.0)) c = 4.0 * std::abs(y[imax]) + 1e-12;
        return std::vector<double>{c, t_ze, gamma};
    };
    return m;
}

std::vector<ModelSpec> const& registry() {
    static std::vector<ModelSpec> const models{echo_decay_model(), inversion_recovery_model(), t1_model(), t2_model()};
    return models;
}

ModelSpec const& find_model(std::string_view name) {
    for (auto const& m : registry())
        if (m.name == name) return m;
    std::string valid;
    for (auto const& m : registry()) valid += (valid.empty() ? "" : ", ") + m.name;
    throw LookupError("unknown model '" + std::string(name) + "' (available: " + valid + ")");
}

void write_fit_report(std::ostream& out, ModelSpec const& model, FitResult const& result) {
    out << "model: " << model.name << "\n";
    out << "formula: " << model.formula << "\n";
    out << "converged: " << (result.converged ? "yes" : "no") << " (" << result.termination << ")\n";
    out << "iterations: " << result.iterations << "\n";
    out << "chi2: " << text::format_double(result.chi2) << "\n";
    out << "dof: " << result.dof << "\n";
    out << "reduced_chi2: " << text::format_double(result.reduced_chi2) << "\n";
    for (std::size_t j = 0; j < result.params.size(); ++j) {
        out << "  " << result.names[j] << " = " << text::format_double(result.params[j]);
        if (result.fixed[j])
            out << " (fixed)";
        else
            out << " +/- " << text::format_double(result.stderrs[j]);
        out << " [" << model.parameter_units[j] << "]\n";
    }
}

void write_fit_csv(std::ostream& out, FitResult const& result, std::vector<std::string> const& comments) {
    for (auto const& c : comments) out << "# " << c << '\n';
    out << "parameter,value,stderr,fixed\n";
    for (std::size_t j = 0; j < result.params.size(); ++j)
        out << result.names[j] << ',' << text::format_double(result.params[j]) << ','
            << text::format_double(result.stderrs[j]) << ',' << (result.fixed[j] ? "true" : "false") << '\n';
}

}  // namespace spinbath
