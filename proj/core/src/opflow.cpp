#include "homflow/opflow.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>

namespace homflow {

namespace {
constexpr double kTiny = 1e-300;
}

Matrix matrix_exponential(const Matrix& M) {
    return M.exp();
}

LinearOperatorFlow::LinearOperatorFlow(Matrix A) : A_(std::move(A)) {
    if (A_.rows() != A_.cols() || A_.rows() == 0) {
        throw std::invalid_argument("LinearOperatorFlow: matrix must be square and non-empty");
    }
    sym_ = 0.5 * (A_ + A_.transpose());
    asym_ = 0.5 * (A_ - A_.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym_);
    coercivity_ = eig.eigenvalues().minCoeff();
    const double scale = std::max(1.0, A_.cwiseAbs().maxCoeff());
    if (coercivity_ < -1e-10 * scale) {
        throw NotMonotoneError("operator not monotone: symmetric part has eigenvalue " +
                               std::to_string(coercivity_));
    }
}

bool LinearOperatorFlow::is_symmetric(double tol) const {
    return asym_.cwiseAbs().maxCoeff() <= tol * std::max(1.0, A_.cwiseAbs().maxCoeff());
}

SurrogateTrace run_linear_flow(const LinearOperatorFlow& op, const Vector& f,
                               const std::vector<double>& times,
                               std::optional<double> lambda_target) {
    if (f.size() != op.dim()) throw DimensionError("run_linear_flow: datum dimension mismatch");
    if (!(f.norm() > 0.0)) throw std::invalid_argument("run_linear_flow: datum must be nonzero");

    SurrogateTrace trace;
    trace.A = op.matrix();
    trace.datum = f;
    trace.lambda = lambda_target.value_or(op.coercivity_constant());

    for (double t : times) {
        if (!(t >= 0.0)) throw std::invalid_argument("run_linear_flow: times must be nonnegative");
        const Vector u = matrix_exponential(-t * op.matrix()) * f;
        const Vector Au = op.matrix() * u;
        trace.times.push_back(t);
        trace.states.push_back(u);
        trace.norms.push_back(u.norm());
        trace.h.push_back(Au.dot(u));
    }
    trace.g = compute_g(trace);
    trace.H.resize(trace.size());
    trace.residuals.resize(trace.size());
    for (size_t k = 0; k < trace.size(); ++k) {
        const double a = std::exp(-trace.lambda * trace.times[k]);
        const Vector w = trace.states[k] / a;
        trace.H[k] = trace.h[k] / (a * a);
        trace.residuals[k] = (op.matrix() * w - trace.lambda * w).norm();
    }
    return trace;
}

std::vector<double> compute_g(const SurrogateTrace& trace) {
    std::vector<double> g(trace.size(), 0.0);
    const Matrix asym = 0.5 * (trace.A - trace.A.transpose());
    for (size_t k = 0; k < trace.size(); ++k) {
        const Vector& u = trace.states[k];
        const Vector Au = trace.A * u;
        const double h = trace.h.empty() ? Au.dot(u) : trace.h[k];
        if (!(h > 0.0)) {
            throw std::runtime_error("compute_g: coercivity violated, h(t) <= 0 at t = " +
                                     std::to_string(trace.times[k]));
        }
        g[k] = std::max(0.0, (asym * u).dot(Au) / h);
    }
    return g;
}

IntegrabilityReport integrability_diagnostic(const SurrogateTrace& trace, int min_tail_samples) {
    const size_t n = trace.size();
    if (n < 4) throw std::invalid_argument("integrability_diagnostic: trace too short");

    IntegrabilityReport report;
    std::vector<double> cumulative(n, 0.0);
    double g_scale = 0.0;
    for (size_t k = 0; k + 1 < n; ++k) {
        cumulative[k + 1] = cumulative[k] +
                            0.5 * (trace.g[k] + trace.g[k + 1]) * (trace.times[k + 1] - trace.times[k]);
        g_scale = std::max(g_scale, trace.g[k]);
    }
    report.integral = cumulative[n - 1];

    if (g_scale <= 1e-12) {
        report.zero_g = true;
        report.classification = IntegrabilityClass::integrable;
        return report;
    }

    const double t_front = std::max(trace.times.front(), 1e-6);
    const double t_back = trace.times.back();
    const double t_tail = std::sqrt(t_front * t_back);
    size_t tail_begin = n;
    for (size_t k = 0; k < n; ++k) {
        if (trace.times[k] >= t_tail) {
            tail_begin = k;
            break;
        }
    }
    report.tail_samples = static_cast<int>(n - tail_begin);
    if (report.tail_samples < min_tail_samples) {
        throw std::invalid_argument("integrability_diagnostic: horizon too short for a fit (" +
                                    std::to_string(report.tail_samples) + " tail samples)");
    }
    report.tail_fraction = (report.integral - cumulative[tail_begin]) / std::max(report.integral, kTiny);

    // Upper envelope of g on log-spaced tail buckets, then a log-log fit.
    const int buckets = 12;
    const double log_lo = std::log(trace.times[tail_begin]);
    const double log_hi = std::log(t_back * (1.0 + 1e-12));
    std::vector<double> bucket_max(buckets, 0.0);
    std::vector<double> bucket_t(buckets, 0.0);
    for (size_t k = tail_begin; k < n; ++k) {
        int b = static_cast<int>(buckets * (std::log(trace.times[k]) - log_lo) / (log_hi - log_lo));
        b = std::clamp(b, 0, buckets - 1);
        if (trace.g[k] > bucket_max[static_cast<size_t>(b)]) {
            bucket_max[static_cast<size_t>(b)] = trace.g[k];
            bucket_t[static_cast<size_t>(b)] = trace.times[k];
        }
    }
    std::vector<double> xs, ys;
    for (int b = 0; b < buckets; ++b) {
        if (bucket_max[static_cast<size_t>(b)] > 1e-14 * g_scale) {
            xs.push_back(std::log(bucket_t[static_cast<size_t>(b)]));
            ys.push_back(std::log(bucket_max[static_cast<size_t>(b)]));
        }
    }
    if (xs.size() >= 4) {
        double mx = 0.0, my = 0.0;
        for (size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ys[i];
        }
        mx /= static_cast<double>(xs.size());
        my /= static_cast<double>(xs.size());
        double sxy = 0.0, sxx = 0.0;
        for (size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        if (sxx > 0.0) report.tail_slope = sxy / sxx;
    }

    const bool decaying = report.tail_slope && *report.tail_slope < -1.0;
    const bool bounded_partials = report.tail_fraction < 0.5;
    report.classification = (decaying && bounded_partials) ? IntegrabilityClass::integrable
                                                           : IntegrabilityClass::inconclusive;
    return report;
}

ProfileReport operator_profile(const LinearOperatorFlow& op, const Vector& f, double lambda,
                               double horizon, int samples) {
    if (!(lambda > 0.0)) throw std::invalid_argument("operator_profile: lambda must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("operator_profile: horizon must be positive");
    if (samples < 8) throw std::invalid_argument("operator_profile: needs at least 8 samples");
    if (f.size() != op.dim()) throw DimensionError("operator_profile: datum dimension mismatch");

    const double norm_f = f.norm();
    const Matrix shifted = op.matrix() - lambda * Matrix::Identity(op.dim(), op.dim());
    const std::vector<double> times = geometric_times(1e-3 * horizon, horizon, samples);

    // The rescaled state can grow when lambda exceeds the coercivity constant
    // (e.g. a defective eigenvalue adds polynomial factors), so convergence is
    // judged on sign-aligned directions; the residual is scale invariant.
    std::vector<Vector> profiles;
    std::vector<Vector> directions;
    profiles.reserve(times.size());
    for (double t : times) {
        Vector w = matrix_exponential(-t * shifted) * f;
        if (w.norm() > 1e9 * norm_f) {
            throw std::overflow_error(
                "operator_profile: rescaled state blew up; lambda exceeds the spectral abscissa");
        }
        const double nw = w.norm();
        Vector dir = nw > 0.0 ? Vector(w / nw) : (directions.empty() ? w : directions.back());
        if (!directions.empty() && dir.dot(directions.back()) < 0.0) dir = -dir;
        directions.push_back(std::move(dir));
        profiles.push_back(std::move(w));
    }

    ProfileReport report;
    report.w_star = profiles.back();
    const double norm_star = report.w_star.norm();
    const size_t win = std::max<size_t>(2, profiles.size() / 10);
    for (size_t i = profiles.size() - win; i < profiles.size(); ++i) {
        for (size_t j = i + 1; j < profiles.size(); ++j) {
            report.cauchy_gap = std::max(report.cauchy_gap, (directions[i] - directions[j]).norm());
        }
    }

    report.zero_profile = norm_star <= 1e-6 * norm_f;
    if (report.zero_profile) {
        report.converged = report.cauchy_gap <= 1e-4;
        report.eigen_residual = 0.0;
        report.scale_invariant_eigenvalue = std::numeric_limits<double>::quiet_NaN();
        report.is_ground_state = false;
        return report;
    }

    report.converged = report.cauchy_gap <= 1e-4;
    report.eigen_residual = (op.matrix() * report.w_star - lambda * report.w_star).norm() / norm_star;
    report.scale_invariant_eigenvalue =
        report.w_star.dot(op.matrix() * report.w_star) / (norm_star * norm_star);
    const double lambda1 = op.coercivity_constant();
    report.is_ground_state =
        lambda1 > 0.0 && std::abs(report.scale_invariant_eigenvalue - lambda1) <= 0.02 * lambda1;
    return report;
}

double coercivity_constant(const Matrix& A) {
    const Matrix sym = 0.5 * (A + A.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    return eig.eigenvalues().minCoeff();
}

GradientConsistencyReport gradient_case_consistency(const QuadraticForm& K, const Vector& f,
                                                    double horizon) {
    if (!K.space().is_euclidean()) {
        throw std::invalid_argument("gradient_case_consistency: operator engine works on the Euclidean space");
    }
    if (!(horizon > 0.0)) throw std::invalid_argument("gradient_case_consistency: horizon must be positive");
    const LinearOperatorFlow op(K.matrix());

    GradientConsistencyReport report;

    // h'(t) versus -2||Ku||^2 by central differences on the smooth engine.
    const double spectral_norm = K.matrix().cwiseAbs().rowwise().sum().maxCoeff();
    const double delta = 1e-4 / std::max(spectral_norm, 1e-8);
    const auto h_at = [&](double t) {
        const Vector u = matrix_exponential(-t * K.matrix()) * f;
        return (K.matrix() * u).dot(u);
    };
    for (double t : geometric_times(std::max(10.0 * delta, 1e-3 * horizon), horizon, 16)) {
        const double hprime = (h_at(t + delta) - h_at(t - delta)) / (2.0 * delta);
        const Vector u = matrix_exponential(-t * K.matrix()) * f;
        const double expected = -2.0 * (K.matrix() * u).squaredNorm();
        report.max_hprime_error_rel =
            std::max(report.max_hprime_error_rel,
                     std::abs(hprime - expected) / std::max(std::abs(expected), kTiny));
    }

    // Engine agreement on ||u(t)||: proximal-point at tau small enough that the
    // first-order error stays below 1e-6 relative to ||f||.
    const double tau = 1e-6;
    const double norm_f = f.norm();
    Vector u = f;
    double t = 0.0;
    const std::vector<double> checkpoints = {0.25 * horizon, 0.5 * horizon, horizon};
    size_t next_check = 0;
    const long steps = static_cast<long>(std::llround(horizon / tau));
    for (long k = 0; k < steps && next_check < checkpoints.size(); ++k) {
        u = K.prox(u, tau, 1e-12);
        t += tau;
        if (t >= checkpoints[next_check] - 0.5 * tau) {
            const double exact = (matrix_exponential(-t * K.matrix()) * f).norm();
            report.max_norm_mismatch =
                std::max(report.max_norm_mismatch, std::abs(u.norm() - exact) / std::max(norm_f, kTiny));
            ++next_check;
        }
    }

    report.ok = report.max_hprime_error_rel <= 1e-4 && report.max_norm_mismatch <= 1e-6;
    return report;
}

std::vector<double> geometric_times(double t0, double t1, int count) {
    if (!(t0 > 0.0) || !(t1 > t0) || count < 2) {
        throw std::invalid_argument("geometric_times: need 0 < t0 < t1 and count >= 2");
    }
    std::vector<double> times(static_cast<size_t>(count));
    const double ratio = std::log(t1 / t0) / (count - 1);
    for (int i = 0; i < count; ++i) {
        times[static_cast<size_t>(i)] = t0 * std::exp(ratio * i);
    }
    times.back() = t1;
    return times;
}

}  // namespace homflow
