#include "switchgame/diffusion.hpp"

#include "switchgame/errors.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gsl/gsl_sf_dawson.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace switchgame {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// Phi(z) * exp(z^2 / 2), stable for negative z.
double phi_exp(double z) {
    double t = -z / std::numbers::sqrt2;
    if (t < 25.0) return 0.5 * std::erfc(t) * std::exp(t * t);
    // erfcx asymptotic series
    double t2 = t * t;
    double s = 1.0 - 1.0 / (2.0 * t2) + 3.0 / (4.0 * t2 * t2) - 15.0 / (8.0 * t2 * t2 * t2);
    return 0.5 * s / (t * std::sqrt(std::numbers::pi));
}

} // namespace

Diffusion Diffusion::ou(double mu, double sigma, double theta) {
    if (!(mu > 0.0)) throw DomainError("OU mean-reversion rate must be positive");
    if (!(sigma > 0.0)) throw DomainError("volatility must be positive");
    if (!std::isfinite(theta)) throw DomainError("OU level must be finite");
    return Diffusion(DiffusionKind::OU, mu, sigma, theta);
}

Diffusion Diffusion::gbm(double mu, double sigma) {
    if (!(sigma > 0.0)) throw DomainError("volatility must be positive");
    if (!std::isfinite(mu)) throw DomainError("GBM drift must be finite");
    return Diffusion(DiffusionKind::GBM, mu, sigma, 0.0);
}

double Diffusion::lower() const { return kind_ == DiffusionKind::OU ? -kInf : 0.0; }
double Diffusion::upper() const { return kInf; }

bool Diffusion::in_domain(double x) const {
    return !std::isnan(x) && x > lower() && x < upper();
}

void Diffusion::require_domain(double x) const {
    if (!in_domain(x)) throw DomainError("state " + fmt(x) + " outside the diffusion domain");
}

double Diffusion::drift(double x) const {
    return kind_ == DiffusionKind::OU ? mu_ * (theta_ - x) : mu_ * x;
}

double Diffusion::vol(double x) const {
    return kind_ == DiffusionKind::OU ? sigma_ : sigma_ * x;
}

double Diffusion::generator(double x, double f, double df, double d2f, double r) const {
    double v = vol(x);
    return 0.5 * v * v * d2f + drift(x) * df - r * f;
}

double Diffusion::sample_transition(double x, double dt, double z) const {
    if (kind_ == DiffusionKind::OU) {
        double e = std::exp(-mu_ * dt);
        double sd = sigma_ * std::sqrt(-std::expm1(-2.0 * mu_ * dt) / (2.0 * mu_));
        return theta_ + (x - theta_) * e + sd * z;
    }
    return x * std::exp((mu_ - 0.5 * sigma_ * sigma_) * dt + sigma_ * std::sqrt(dt) * z);
}

Diffusion::Scale Diffusion::scale(double x) const {
    require_domain(x);
    if (kind_ == DiffusionKind::OU) {
        // int_theta^x exp((mu/sigma^2)(z-theta)^2) dz via the Dawson function
        double c = std::sqrt(mu_) / sigma_;
        double w = c * (x - theta_);
        return {std::exp(w * w) * gsl_sf_dawson(w) / c, false};
    }
    double p = 1.0 - 2.0 * mu_ / (sigma_ * sigma_);
    if (std::abs(p) < 1e-14) return {std::log(x), true};
    return {std::copysign(std::pow(x, p), p), false};
}

double Diffusion::scale_lower_limit() const {
    if (kind_ == DiffusionKind::OU) return -kInf;
    double p = 1.0 - 2.0 * mu_ / (sigma_ * sigma_);
    if (std::abs(p) < 1e-14 || p < 0.0) return -kInf;
    return 0.0;
}

double Diffusion::scale_upper_limit() const {
    if (kind_ == DiffusionKind::OU) return kInf;
    double p = 1.0 - 2.0 * mu_ / (sigma_ * sigma_);
    if (std::abs(p) < 1e-14 || p > 0.0) return kInf;
    return 0.0;
}

double Diffusion::exit_prob_up(double x, double a, double b) const {
    if (!(a < x) || !(x < b))
        throw OrderingError("exit probability needs a < x < b, got a=" + fmt(a) + " x=" + fmt(x) +
                            " b=" + fmt(b));
    require_domain(x);
    double sa = a <= lower() ? scale_lower_limit() : scale(a).value;
    double sb = b >= upper() ? scale_upper_limit() : scale(b).value;
    double sx = scale(x).value;
    if (std::isinf(sa) && std::isinf(sb)) throw OrderingError("both exit boundaries are natural");
    if (std::isinf(sa)) return 1.0;
    if (std::isinf(sb)) return 0.0;
    return (sx - sa) / (sb - sa);
}

double Diffusion::exit_prob_down(double x, double a, double b) const {
    return 1.0 - exit_prob_up(x, a, b);
}

double Diffusion::ou_passage_time(double x, double s) const {
    double kappa = std::sqrt(2.0 * mu_) / sigma_;
    double zx, zs;
    if (s >= x) {
        zx = (x - theta_) * kappa;
        zs = (s - theta_) * kappa;
    } else {
        zx = (theta_ - x) * kappa;
        zs = (theta_ - s) * kappa;
    }
    if (zs == zx) return 0.0;
    double c = std::sqrt(2.0 * std::numbers::pi) / mu_;
    if (std::abs(zs - zx) < 1e-6)
        return c * (zs - zx) * (phi_exp(zx) + 4.0 * phi_exp(0.5 * (zx + zs)) + phi_exp(zs)) / 6.0;
    double err = 0.0, l1 = 0.0;  // absolute error estimate, L1 norm
    double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(phi_exp, zx, zs, 15,
                                                                             1e-13, &err, &l1);
    if (!(err <= 1e-10 * std::max(1.0, l1))) throw QuadratureError("passage-time integral did not converge");
    return c * v;
}

double Diffusion::expected_exit_time(double x, double a, double b) const {
    if (!(a < x) || !(x < b))
        throw OrderingError("exit time needs a < x < b, got a=" + fmt(a) + " x=" + fmt(x) +
                            " b=" + fmt(b));
    require_domain(a);
    require_domain(b);
    if (kind_ == DiffusionKind::OU) {
        double da_x = ou_passage_time(x, a);
        double db_x = ou_passage_time(x, b);
        double da_b = ou_passage_time(b, a);
        double db_a = ou_passage_time(a, b);
        return (da_x * db_a + db_x * da_b - da_b * db_a) / (db_a + da_b);
    }
    double s2 = sigma_ * sigma_;
    double p = 1.0 - 2.0 * mu_ / s2;
    if (std::abs(p) < 1e-14) return std::log(x / a) * std::log(b / x) / s2;
    double ratio = (std::pow(x, p) - std::pow(a, p)) / (std::pow(b, p) - std::pow(a, p));
    return (std::log(x / a) + std::log(a / b) * ratio) / (0.5 * s2 - mu_);
}

Diffusion::Passage Diffusion::conditional_passage_time(double x, double s) const {
    require_domain(x);
    require_domain(s);
    if (x == s) return {0.0, 1.0};
    if (kind_ == DiffusionKind::OU) return {ou_passage_time(x, s), 1.0};
    double nu = mu_ - 0.5 * sigma_ * sigma_;
    double d = std::abs(std::log(x / s));
    double toward = s > x ? nu : -nu;  // log-drift in the direction of s
    if (toward == 0.0) return {kInf, 1.0};
    double t = d / std::abs(nu);
    if (toward > 0.0) return {t, 1.0};
    return {t, std::exp(-2.0 * std::abs(nu) * d / (sigma_ * sigma_))};
}

std::vector<double> Diffusion::probe_grid(double ref, int n) const {
    std::vector<double> g(n);
    if (kind_ == DiffusionKind::OU) {
        double w = 4.0 * sigma_ / std::sqrt(2.0 * mu_);
        for (int i = 0; i < n; ++i) g[i] = theta_ - w + 2.0 * w * i / (n - 1);
    } else {
        double lo = std::log(ref / 8.0), hi = std::log(ref * 8.0);
        for (int i = 0; i < n; ++i) g[i] = std::exp(lo + (hi - lo) * i / (n - 1));
    }
    return g;
}

double Diffusion::search_upper(double ref) const {
    if (kind_ == DiffusionKind::OU) return theta_ + 8.0 * sigma_ / std::sqrt(2.0 * mu_);
    return 8.0 * ref;
}

double Diffusion::search_lower(double ref) const {
    if (kind_ == DiffusionKind::OU) return theta_ - 8.0 * sigma_ / std::sqrt(2.0 * mu_);
    return ref / 8.0;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kZMax = 36.0;
constexpr double kSegWidth = 0.5;
constexpr int kSegments = static_cast<int>(2.0 * kZMax / kSegWidth);
constexpr int kDegree = 22;

} // namespace

struct Fundamentals::Table {
    double a;
    std::array<double, kDegree + 1> nodes{};    // Chebyshev points on [-1, 1]
    std::array<double, kDegree + 1> weights{};  // barycentric weights
    struct Segment {
        std::once_flag once;
        std::array<double, kDegree + 1> log_i0{};
        std::array<double, kDegree + 1> log_i1{};
    };
    std::unique_ptr<Segment[]> seg;

    explicit Table(double a_) : a(a_), seg(new Segment[kSegments]) {
        for (int j = 0; j <= kDegree; ++j) {
            nodes[j] = std::cos(std::numbers::pi * j / kDegree);
            weights[j] = (j % 2 == 0 ? 1.0 : -1.0) * ((j == 0 || j == kDegree) ? 0.5 : 1.0);
        }
    }

    double seg_lo(int k) const { return -kZMax + k * kSegWidth; }

    Segment& ensure(int k) {
        Segment& s = seg[k];
        std::call_once(s.once, [&] {
            double lo = seg_lo(k);
            for (int j = 0; j <= kDegree; ++j) {
                double z = lo + 0.5 * kSegWidth * (nodes[j] + 1.0);
                s.log_i0[j] = ou_log_integral(a, 0, z);
                s.log_i1[j] = ou_log_integral(a, 1, z);
            }
        });
        return s;
    }

    // returns (log I0(z), log I1(z))
    std::pair<double, double> eval(double z) {
        int k = static_cast<int>(std::floor((z + kZMax) / kSegWidth));
        if (k < 0 || k >= kSegments) return {ou_log_integral(a, 0, z), ou_log_integral(a, 1, z)};
        Segment& s = ensure(k);
        double t = 2.0 * (z - seg_lo(k)) / kSegWidth - 1.0;
        double num0 = 0.0, num1 = 0.0, den = 0.0;
        for (int j = 0; j <= kDegree; ++j) {
            double d = t - nodes[j];
            if (d == 0.0) return {s.log_i0[j], s.log_i1[j]};
            double c = weights[j] / d;
            num0 += c * s.log_i0[j];
            num1 += c * s.log_i1[j];
            den += c;
        }
        return {num0 / den, num1 / den};
    }
};

double Fundamentals::ou_log_integral(double a, int k, double z) {
    double p = a - 1.0 + k;
    bool scaled = z > 0.0;
    auto f = [&](double u) {
        if (u <= 0.0) return 0.0;
        double e = scaled ? -0.5 * (u - z) * (u - z) : z * u - 0.5 * u * u;
        return std::exp(p * std::log(u) + e);
    };
    double split = std::max(z, 1.0);
    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;
    double e1 = 0.0, e2 = 0.0, l1 = 0.0, l2 = 0.0;
    double i1 = ts.integrate(f, 0.0, split, 1e-14, &e1, &l1);
    double i2 = es.integrate(f, split, std::numeric_limits<double>::infinity(), 1e-14, &e2, &l2);
    double total = i1 + i2;
    if (!(total > 0.0) || !(e1 + e2 <= 1e-10 * total))
        throw QuadratureError("fundamental-solution integral failed at z=" + fmt(z));
    return std::log(total) + (scaled ? 0.5 * z * z : 0.0);
}

Fundamentals::Fundamentals(const Diffusion& d, double r) : diff_(d), r_(r) {
    if (!(r > 0.0)) throw DomainError("discount rate must be positive");
    if (d.kind() == DiffusionKind::GBM) {
        double s2 = d.sigma() * d.sigma();
        double A = 0.5 * s2, B = d.mu() - 0.5 * s2, C = -r;
        double disc = std::sqrt(B * B - 4.0 * A * C);
        // numerically stable quadratic roots
        double q = -0.5 * (B + std::copysign(disc, B));
        double r1 = q / A, r2 = C / q;
        eta_plus_ = std::max(r1, r2);
        eta_minus_ = std::min(r1, r2);
    } else {
        kappa_ = std::sqrt(2.0 * d.mu()) / d.sigma();
        table_ = std::make_shared<Table>(r / d.mu());
    }
}

FG Fundamentals::operator()(double x) const {
    diff_.require_domain(x);
    if (diff_.kind() == DiffusionKind::GBM) {
        double F = std::pow(x, eta_plus_);
        double G = std::pow(x, eta_minus_);
        return {F, G, eta_plus_ * F / x, eta_minus_ * G / x};
    }
    double z = kappa_ * (x - diff_.theta());
    auto [f0, f1] = table_->eval(z);
    auto [g0, g1] = table_->eval(-z);
    return {std::exp(f0), std::exp(g0), kappa_ * std::exp(f1), -kappa_ * std::exp(g1)};
}

} // namespace switchgame
