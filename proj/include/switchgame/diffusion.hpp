#pragma once

#include <array>
#include <memory>
#include <mutex>
#include <vector>

namespace switchgame {

enum class DiffusionKind { OU, GBM };

/// Exogenous factor X. OU: dX = mu(theta - X)dt + sigma dW on the real line.
/// GBM: dX = mu X dt + sigma X dW on (0, inf).
class Diffusion {
public:
    static Diffusion ou(double mu, double sigma, double theta);
    static Diffusion gbm(double mu, double sigma);

    DiffusionKind kind() const { return kind_; }
    double mu() const { return mu_; }
    double sigma() const { return sigma_; }
    double theta() const { return theta_; }

    double lower() const;
    double upper() const;
    bool in_domain(double x) const;
    void require_domain(double x) const;

    double drift(double x) const;
    double vol(double x) const;
    /// (L - r)f from values and first/second derivatives.
    double generator(double x, double f, double df, double d2f, double r) const;

    /// Exact-in-law one-step transition driven by a standard normal draw.
    double sample_transition(double x, double dt, double z) const;

    /// Strictly increasing scale function. `logarithmic` is set for a GBM
    /// with mu = sigma^2/2, where S(x) = ln x.
    struct Scale {
        double value;
        bool logarithmic;
    };
    Scale scale(double x) const;
    /// Limits of the scale function at the domain ends (possibly infinite).
    double scale_lower_limit() const;
    double scale_upper_limit() const;

    double exit_prob_up(double x, double a, double b) const;
    double exit_prob_down(double x, double a, double b) const;
    /// Mean of the first exit time from (a, b) started at x.
    double expected_exit_time(double x, double a, double b) const;

    struct Passage {
        double time;               ///< mean hitting time conditional on hitting
        double reach_probability;  ///< P(hit s in finite time)
    };
    Passage conditional_passage_time(double x, double s) const;

    /// One-sided OU mean passage time from x to s.
    double ou_passage_time(double x, double s) const;

    /// Probe grid used by invariant checks: 101 points on
    /// [theta - 4 sigma/sqrt(2 mu), theta + 4 sigma/sqrt(2 mu)] for OU,
    /// log-spaced on [ref/8, 8 ref] for GBM.
    std::vector<double> probe_grid(double ref, int n = 101) const;
    /// Upper end of the one-sided threshold search interval.
    double search_upper(double ref) const;
    double search_lower(double ref) const;

private:
    Diffusion(DiffusionKind k, double mu, double sigma, double theta)
        : kind_(k), mu_(mu), sigma_(sigma), theta_(theta) {}

    DiffusionKind kind_;
    double mu_;
    double sigma_;
    double theta_;
};

struct FG {
    double F;
    double G;
    double dF;
    double dG;
};

/// Increasing/decreasing fundamental solutions of (L - r)u = 0.
/// GBM uses the power forms. OU evaluates the integral representation by
/// quadrature; results are tabulated lazily as piecewise Chebyshev
/// interpolants of log F and log F' in the standardized variable.
class Fundamentals {
public:
    Fundamentals(const Diffusion& d, double r);

    FG operator()(double x) const;
    const Diffusion& diffusion() const { return diff_; }
    double rate() const { return r_; }

    /// GBM exponents.
    double eta_plus() const { return eta_plus_; }
    double eta_minus() const { return eta_minus_; }

    /// Direct OU quadrature of log I_k(z), k = 0 (F) or 1 (F'/kappa).
    static double ou_log_integral(double a, int k, double z);

private:
    struct Table;

    Diffusion diff_;
    double r_;
    double eta_plus_ = 0.0;
    double eta_minus_ = 0.0;
    double kappa_ = 0.0;
    std::shared_ptr<Table> table_;
};

} // namespace switchgame
