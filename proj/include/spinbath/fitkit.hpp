#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spinbath {

struct FitOptions {
    /// Parameters held at the given value. Output equals the value exactly.
    std::map<std::string, double> fixed;
    /// Overrides for individual entries of the initial guess.
    std::map<std::string, double> initial;
    int max_iterations = 500;
    double relative_cost_tolerance = 1e-10;
    double gradient_tolerance = 1e-12;
    /// Scale the reported 1-sigma uncertainties by the reduced chi-square.
    bool scale_by_reduced_chi2 = true;
    /// Spectrometer frequency used by the t2_model initial guess for T_Ze.
    double spectrometer_freq_hz = 240e9;
};

/// A named model y = f(params, x) with optional analytic gradient.
struct ModelSpec {
    using Evaluate = std::function<double(std::span<double const> params, double x)>;
    using Gradient = std::function<void(std::span<double const> params, double x, std::span<double> grad)>;
    using InitialGuess = std::function<std::vector<double>(std::span<double const> x, std::span<double const> y,
                                                           FitOptions const& options)>;

    std::string name;
    std::string formula;
    std::string x_name;
    std::string y_name;
    std::vector<std::string> parameter_names;
    std::vector<std::string> parameter_units;
    /// Parameters constrained positive are fitted as log(p).
    std::vector<bool> positive;
    Evaluate evaluate;
    Gradient gradient;  // may be empty
    InitialGuess initial_guess;

    [[nodiscard]] std::size_t parameter_count() const { return parameter_names.size(); }
    /// Throws LookupError naming the valid parameters.
    [[nodiscard]] std::size_t parameter_index(std::string_view name) const;
};

struct FitData {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> sigma;  // empty means unit weights
};

struct FitResult {
    std::string model;
    std::vector<std::string> names;
    std::vector<double> params;
    std::vector<double> stderrs;
    std::vector<bool> fixed;
    /// (J^T W J)^-1 over all parameters, row-major, zero rows/cols for fixed
    /// parameters. Not scaled by the reduced chi-square.
    std::vector<double> covariance;
    double chi2 = 0.0;
    double reduced_chi2 = 0.0;
    std::size_t dof = 0;
    std::vector<double> residuals;  // y - f, in input order
    int iterations = 0;
    bool converged = false;
    std::string termination;
    double gradient_norm = 0.0;
    /// chi2 after each accepted step, starting with the initial point.
    std::vector<double> cost_history;

    [[nodiscard]] double param(std::string_view name) const;
    [[nodiscard]] double stderr_of(std::string_view name) const;
    [[nodiscard]] double covariance_at(std::size_t i, std::size_t j) const {
        return covariance[i * params.size() + j];
    }
};

/// Levenberg-Marquardt minimization of sum(((y - f) / sigma)^2).
/// `init` may be empty, in which case the model's initial guess is used.
/// Throws DomainError for underdetermined or invalid input; a run that does
/// not converge returns converged = false.
[[nodiscard]] FitResult fit(ModelSpec const& model, FitData const& data, std::vector<double> init = {},
                            FitOptions const& options = {});

/// Maximum relative deviation between the analytic gradient and central
/// finite differences (step 1e-6 relative, rounded to a power of two).
[[nodiscard]] double jacobian_check(ModelSpec const& model, std::span<double const> params,
                                    std::span<double const> x_probe);

[[nodiscard]] ModelSpec echo_decay_model();
[[nodiscard]] ModelSpec inversion_recovery_model();
[[nodiscard]] ModelSpec t1_model();
[[nodiscard]] ModelSpec t2_model();

/// echo_decay, inversion_recovery, t1_model, t2_model.
[[nodiscard]] std::vector<ModelSpec> const& registry();
[[nodiscard]] ModelSpec const& find_model(std::string_view name);

void write_fit_report(std::ostream& out, ModelSpec const& model, FitResult const& result);
/// CSV `parameter,value,stderr,fixed`.
void write_fit_csv(std::ostream& out, FitResult const& result, std::vector<std::string> const& comments = {});

}  // namespace spinbath
