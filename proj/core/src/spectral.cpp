#include "homflow/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace homflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vector random_unit_perp(const HomogeneousFunctional& J, std::mt19937_64& rng) {
    const InnerProductSpace& space = J.space();
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    for (int attempt = 0; attempt < 64; ++attempt) {
        Vector u(space.dim());
        for (int i = 0; i < space.dim(); ++i) u[i] = coord(rng);
        u = J.nullspace().project_out(space, u);
        const double n = space.norm(u);
        if (n > 1e-8) return u / n;
    }
    throw std::runtime_error("ground_state_oracle: could not sample the null-space complement");
}

/// W-orthonormal basis of the orthogonal complement of the null space,
/// assembled by pivoted Gram-Schmidt over the coordinate directions.
std::vector<Vector> complement_basis(const InnerProductSpace& space, const NullSpaceBasis& nullspace) {
    const int n = space.dim();
    const int target = n - nullspace.size();
    std::vector<Vector> accepted;
    std::vector<Vector> residuals;
    for (int i = 0; i < n; ++i) {
        Vector e = Vector::Zero(n);
        e[i] = 1.0;
        residuals.push_back(nullspace.project_out(space, e));
    }
    while (static_cast<int>(accepted.size()) < target) {
        int best = -1;
        double best_norm = 1e-8;
        for (int i = 0; i < n; ++i) {
            const double nv = space.norm(residuals[static_cast<size_t>(i)]);
            if (nv > best_norm) {
                best_norm = nv;
                best = i;
            }
        }
        if (best < 0) throw std::runtime_error("complement_basis: numerical rank deficiency");
        Vector b = residuals[static_cast<size_t>(best)] / best_norm;
        for (const Vector& prev : accepted) b -= space.inner(b, prev) * prev;
        b /= space.norm(b);
        accepted.push_back(b);
        for (int i = 0; i < n; ++i) {
            Vector& r = residuals[static_cast<size_t>(i)];
            r -= space.inner(r, b) * b;
        }
    }
    return accepted;
}

GroundStateEstimate quadratic_ground_state(const QuadraticForm& J, int restarts, double tol,
                                           std::mt19937_64& rng) {
    const InnerProductSpace& space = J.space();
    const std::vector<Vector> Q = complement_basis(space, J.nullspace());
    const int m = static_cast<int>(Q.size());
    if (m == 0) throw std::runtime_error("ground_state_oracle: functional vanishes identically");

    Matrix reduced(m, m);
    for (int a = 0; a < m; ++a) {
        const Vector Ka = J.matrix() * Q[static_cast<size_t>(a)];
        for (int b = 0; b < m; ++b) {
            reduced(b, a) = Q[static_cast<size_t>(b)].dot(Ka);
        }
    }
    reduced = 0.5 * (reduced + reduced.transpose().eval());
    Eigen::LDLT<Matrix> solver(reduced);

    const double inner_tol = std::min(tol, 1e-11);
    double best_lambda = std::numeric_limits<double>::infinity();
    Vector best_x;
    for (int r = 0; r < restarts; ++r) {
        Vector x;
        if (r == 0) {
            x = Vector::Ones(m);
        } else {
            std::uniform_real_distribution<double> coord(-1.0, 1.0);
            x = Vector(m);
            for (int i = 0; i < m; ++i) x[i] = coord(rng);
        }
        x.normalize();
        double lambda = x.dot(reduced * x);
        for (int iter = 0; iter < 500; ++iter) {
            Vector y = solver.solve(x);
            const double ny = y.norm();
            if (!(ny > 0.0) || !y.allFinite()) break;
            x = y / ny;
            lambda = x.dot(reduced * x);
            if ((reduced * x - lambda * x).norm() <= inner_tol * std::max(lambda, 1e-300)) break;
        }
        if (lambda < best_lambda) {
            best_lambda = lambda;
            best_x = x;
        }
    }

    Vector v = Vector::Zero(space.dim());
    for (int a = 0; a < m; ++a) v += best_x[a] * Q[static_cast<size_t>(a)];
    v /= space.norm(v);

    GroundStateEstimate est;
    est.vector = v;
    est.lambda1 = rayleigh(J, v);
    est.method = "inverse_iteration";
    est.residual = eigen_residual(J, v, est.lambda1);
    return est;
}

}  // namespace

double rayleigh(const HomogeneousFunctional& J, const Vector& u) {
    const InnerProductSpace& space = J.space();
    space.require_dim(u);
    const double n = space.norm(u);
    if (!(n > 0.0)) throw std::invalid_argument("rayleigh: undefined at u = 0");
    const double n_perp = space.norm(J.nullspace().project_out(space, u));
    if (n_perp <= 1e-12 * n) {
        throw std::invalid_argument("rayleigh: undefined on the null space of J");
    }
    return J.degree() * J.evaluate(u) / std::pow(n, J.degree());
}

GroundStateEstimate ground_state_oracle(const HomogeneousFunctional& J, int restarts, double tol,
                                        unsigned seed, std::optional<double> observed_lambda_min) {
    if (restarts < 1) throw std::invalid_argument("ground_state_oracle: restarts must be >= 1");
    std::mt19937_64 rng(seed);
    const InnerProductSpace& space = J.space();
    const double p = J.degree();

    GroundStateEstimate est;
    if (const auto* quad = dynamic_cast<const QuadraticForm*>(&J)) {
        est = quadratic_ground_state(*quad, restarts, tol, rng);
    } else if (const auto* graph = dynamic_cast<const GraphDirichletEnergy*>(&J); graph && p == 2.0) {
        // p = 2 graph energy is the quadratic form of the weighted Laplacian.
        Matrix laplacian = Matrix::Zero(space.dim(), space.dim());
        for (const auto& e : graph->edges()) {
            laplacian(e.i, e.i) += e.weight;
            laplacian(e.j, e.j) += e.weight;
            laplacian(e.i, e.j) -= e.weight;
            laplacian(e.j, e.i) -= e.weight;
        }
        QuadraticForm as_quadratic(laplacian, space, "laplacian(" + J.name() + ")");
        est = quadratic_ground_state(as_quadratic, restarts, tol, rng);
        est.residual = eigen_residual(J, est.vector, est.lambda1);
    } else {
        // Projected Rayleigh descent: on the unit sphere of N(J)^perp the
        // gradient of R at u is p (zeta - <zeta,u> u), the eigen-defect.
        const NullSpaceBasis& basis = J.nullspace();
        double best_lambda = std::numeric_limits<double>::infinity();
        Vector best_u;
        for (int r = 0; r < restarts; ++r) {
            Vector u = random_unit_perp(J, rng);
            double value = rayleigh(J, u);
            for (int iter = 0; iter < 400; ++iter) {
                const double tau_probe = 1e-4 / std::max(value, 1e-12);
                const ProxPoint pp = J.subgradient_from_prox(u, tau_probe, 1e-12);
                const double lambda_raw = space.inner(pp.subgrad, u);
                const Vector g = pp.subgrad - lambda_raw * u;
                const double gnorm = space.norm(g);
                if (gnorm <= 1e-10 * std::max(value, 1e-300)) break;

                double step = 1.0 / std::max(value, 1e-12);
                bool moved = false;
                while (step > 1e-16) {
                    Vector cand = basis.project_out(space, u - step * g);
                    const double cn = space.norm(cand);
                    if (cn > 1e-12) {
                        cand /= cn;
                        const double cand_value = rayleigh(J, cand);
                        if (cand_value < value - 1e-12 * std::abs(value)) {
                            u = std::move(cand);
                            value = cand_value;
                            moved = true;
                            break;
                        }
                    }
                    step *= 0.5;
                }
                if (!moved) break;
            }
            if (value < best_lambda) {
                best_lambda = value;
                best_u = u;
            }
        }

        // Flow-based cross-certifier: any profile Rayleigh value is a valid
        // upper bound, so a flow started at the best candidate can only
        // shrink the estimate.
        try {
            FlowConfig cfg = profile_flow_config(p, best_lambda, 1.0);
            cfg.tail_resolution = std::max(cfg.tail_resolution, 2e-3);  // value-only accuracy
            if (p > 2.0) cfg.t_max /= 1000.0;
            cfg.max_steps = 100000;
            const FlowTrace fallback = run_flow(J, best_u, cfg);
            double lambda_rescale = kNaN;
            if (p < 2.0) {
                const ExtinctionReport ext = detect_extinction(fallback, best_lambda);
                if (ext.extinct && ext.t_ex_num) lambda_rescale = choose_lambda(p, ext.t_ex_num, best_lambda, 1.0);
            } else {
                for (auto it = fallback.rayleighs.rbegin(); it != fallback.rayleighs.rend(); ++it) {
                    if (std::isfinite(*it)) {
                        lambda_rescale = choose_lambda(p, {}, *it, fallback.norms_perp.front());
                        break;
                    }
                }
            }
            if (std::isfinite(lambda_rescale)) {
                const RescaledTrajectory rescaled = rescale_trajectory(fallback, lambda_rescale, p);
                if (rescaled.size() >= 2) {
                    const ProfileReport profile = extract_profile(rescaled, J, best_lambda);
                    if (!profile.zero_profile) {
                        const double flow_value = rayleigh(J, profile.w_star);
                        if (flow_value < best_lambda) {
                            best_lambda = flow_value;
                            best_u = profile.w_star / space.norm(profile.w_star);
                            best_u = basis.project_out(space, best_u);
                            best_u /= space.norm(best_u);
                        }
                    }
                }
            }
        } catch (const std::exception&) {
            // the descent estimate stands on its own
        }

        est.vector = best_u;
        est.lambda1 = rayleigh(J, best_u);
        est.method = "rayleigh_descent+flow";
        est.residual = eigen_residual(J, best_u, J.degree() * J.evaluate(best_u));
    }

    if (observed_lambda_min && est.lambda1 > *observed_lambda_min + tol) {
        est.upper_bound_only = true;
    }
    return est;
}

double ode_rescaling(double p, double lambda, double t) {
    if (!(lambda > 0.0)) throw std::invalid_argument("ode_rescaling: lambda must be positive");
    if (!(t >= 0.0)) throw std::invalid_argument("ode_rescaling: t must be nonnegative");
    if (p == 2.0) return std::exp(-lambda * t);
    const double base = 1.0 - (2.0 - p) * lambda * t;
    if (p < 2.0 && base <= 0.0) {
        throw std::domain_error("ode_rescaling: t is beyond the finite-regime domain 1/((2-p) lambda)");
    }
    return std::pow(base, 1.0 / (2.0 - p));
}

double choose_lambda(double p, std::optional<double> t_ex, double lambda1, double norm_f) {
    if (p < 2.0) {
        if (!t_ex || !(*t_ex > 0.0)) {
            throw std::invalid_argument("choose_lambda: missing t_ex in finite regime");
        }
        return 1.0 / ((2.0 - p) * *t_ex);
    }
    if (!(lambda1 > 0.0)) throw std::invalid_argument("choose_lambda: lambda1 must be positive");
    if (p == 2.0) return lambda1;
    if (!(norm_f > 0.0)) throw std::invalid_argument("choose_lambda: norm_f must be positive for p > 2");
    return lambda1 * std::pow(norm_f, p - 2.0);
}

RescaledTrajectory rescale_trajectory(const FlowTrace& trace, double lambda, double p) {
    if (!(lambda > 0.0)) throw std::invalid_argument("rescale_trajectory: lambda must be positive");
    RescaledTrajectory out;
    out.lambda = lambda;
    out.p = p;
    out.regime = p < 2.0 ? ExtinctionRegime::finite : ExtinctionRegime::infinite;

    const auto weighted_norm = [&](const Vector& x) {
        if (trace.space_weights.size() != x.size()) return x.norm();
        return std::sqrt((trace.space_weights.array() * x.array().square()).sum());
    };

    for (size_t k = 0; k < trace.size(); ++k) {
        const double t = trace.times[k];
        if (p < 2.0) {
            const double s = 1.0 - (2.0 - p) * lambda * t;
            if (s < 1e-6) break;  // clip: T_ex uncertainty amplifies past this point
        }
        const double a = ode_rescaling(p, lambda, t);
        const Vector w = trace.states[k] / a;
        const Vector scaled_subgrad = trace.subgrads[k] / std::pow(a, p - 1.0);
        out.times.push_back(t);
        out.a_values.push_back(a);
        out.profiles.push_back(w);
        out.profile_norms.push_back(trace.norms[k] / a);
        out.residuals.push_back(weighted_norm(scaled_subgrad - lambda * w));
    }
    return out;
}

ProfileReport extract_profile(const RescaledTrajectory& rescaled, const HomogeneousFunctional& J,
                              double lambda1, int window) {
    const size_t n = rescaled.size();
    if (n < 2) throw std::invalid_argument("extract_profile: trajectory too short for a trailing window");
    size_t win = window > 0 ? static_cast<size_t>(window) : std::max<size_t>(2, n / 10);
    win = std::min(win, n);

    const InnerProductSpace& space = J.space();
    ProfileReport report;
    report.w_star = rescaled.profiles.back();
    const double norm_star = space.norm(report.w_star);
    const double norm_f = rescaled.profile_norms.front();

    for (size_t i = n - win; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            report.cauchy_gap =
                std::max(report.cauchy_gap, space.norm(rescaled.profiles[i] - rescaled.profiles[j]));
        }
    }

    report.zero_profile = norm_star <= 1e-6 * std::max(norm_f, 1e-300);
    if (report.zero_profile) {
        report.converged = report.cauchy_gap <= 1e-4 * std::max(norm_f, 1e-300);
        report.eigen_residual = 0.0;
        report.scale_invariant_eigenvalue = kNaN;
        report.is_ground_state = false;
        return report;
    }

    report.converged = report.cauchy_gap <= 1e-4 * norm_star;
    report.eigen_residual = eigen_residual(J, report.w_star, rescaled.lambda);
    report.scale_invariant_eigenvalue = rayleigh(J, report.w_star);

    const double p = rescaled.p;
    if (p < 2.0) {
        const double target = lambda1 / rescaled.lambda;  // (2-p) lambda1 T_ex
        report.is_ground_state = std::abs(std::pow(norm_star, 2.0 - p) - target) <= 0.02 * target;
    } else if (p == 2.0) {
        report.is_ground_state = true;  // non-trivial p = 2 profiles are ground states
    } else {
        report.is_ground_state = norm_star >= 0.98 * norm_f;
    }
    return report;
}

double eigen_residual(const HomogeneousFunctional& J, const Vector& w, double lambda, double tau_probe) {
    const InnerProductSpace& space = J.space();
    space.require_dim(w);
    const double nw = space.norm(w);
    if (!(nw > 0.0)) throw std::invalid_argument("eigen_residual: w must be nonzero");
    double tau = tau_probe;
    if (!(tau > 0.0)) {
        tau = 1e-4 * nw / std::max(std::abs(lambda), 1e-8);
    }
    const Vector v = w + tau * lambda * w;
    const ProxPoint pp = J.subgradient_from_prox(v, tau, 1e-13);
    return space.norm(pp.subgrad - lambda * w) / nw;
}

double scale_invariant_eigenvalue(const HomogeneousFunctional& J, const Vector& w, double certify_tol) {
    const InnerProductSpace& space = J.space();
    const double nw = space.norm(w);
    if (!(nw > 0.0)) throw std::invalid_argument("scale_invariant_eigenvalue: w must be nonzero");
    const double lambda_raw = J.degree() * J.evaluate(w) / (nw * nw);
    const double residual = eigen_residual(J, w, lambda_raw);
    if (residual > certify_tol) {
        throw EigenCertificationError(
            "scale_invariant_eigenvalue: w is not certified as an eigenfunction, residual " +
                std::to_string(residual),
            residual);
    }
    return rayleigh(J, w);
}

bool lambda_limit_test(const FlowTrace& trace, double lambda1, double rel_tol) {
    if (!(lambda1 > 0.0)) throw std::invalid_argument("lambda_limit_test: lambda1 must be positive");
    std::vector<double> finite;
    for (double L : trace.rayleighs) {
        if (std::isfinite(L)) finite.push_back(L);
    }
    if (finite.empty()) return false;
    const size_t win = std::max<size_t>(3, finite.size() / 20);
    const size_t begin = finite.size() > win ? finite.size() - win : 0;
    std::vector<double> tail(finite.begin() + static_cast<long>(begin), finite.end());
    std::nth_element(tail.begin(), tail.begin() + static_cast<long>(tail.size() / 2), tail.end());
    const double median = tail[tail.size() / 2];
    return std::abs(median - lambda1) <= rel_tol * lambda1;
}

PositivityReport crandall_positivity_check(const FlowTrace& trace, double p) {
    if (!(p > 2.0)) throw std::invalid_argument("crandall_positivity_check: requires p > 2");
    for (size_t k = 0; k < trace.size(); ++k) {
        const double scale = 1.0 + trace.states[k].cwiseAbs().maxCoeff();
        if (trace.states[k].minCoeff() < -1e-12 * scale) {
            throw std::invalid_argument("crandall_positivity_check: states must be coordinatewise nonnegative");
        }
    }
    PositivityReport report;
    for (size_t k = 1; k + 1 < trace.size(); ++k) {
        const double t = trace.times[k];
        if (!(t > 0.0)) continue;
        const double factor = 1.0 - trace.taus[k] / ((p - 2.0) * t);
        const double slack = 1e-8 * trace.norms[k];
        for (Eigen::Index i = 0; i < trace.states[k].size(); ++i) {
            const double violation = trace.states[k][i] * factor - trace.states[k + 1][i] - slack;
            report.max_violation = std::max(report.max_violation, violation);
            ++report.checked;
        }
    }
    report.ok = report.max_violation <= 0.0;
    return report;
}

FlowConfig profile_flow_config(double p, double lambda1_estimate, double norm_f) {
    if (!(lambda1_estimate > 0.0)) {
        throw std::invalid_argument("profile_flow_config: lambda1_estimate must be positive");
    }
    if (!(norm_f > 0.0)) throw std::invalid_argument("profile_flow_config: norm_f must be positive");
    FlowConfig cfg;
    cfg.prox_tol = 1e-13;
    if (p < 2.0) {
        const double horizon = std::pow(norm_f, 2.0 - p) / ((2.0 - p) * lambda1_estimate);
        cfg.tau0 = horizon / 500.0;
        cfg.t_max = 4.0 * horizon;
        cfg.extinction_tol = 1e-10 * norm_f;
        cfg.tail_resolution = 1e-4;
        cfg.max_steps = 400000;
    } else if (p == 2.0) {
        cfg.tau0 = 1e-4 / lambda1_estimate;
        cfg.t_max = 18.0 / lambda1_estimate;
        cfg.extinction_tol = 1e-14 * norm_f;
        cfg.max_steps = 400000;
    } else {
        const double rate = lambda1_estimate * std::pow(norm_f, p - 2.0);
        cfg.tau0 = 1e-3 / rate;
        cfg.tau_growth = 1e-3;
        // the rescaled norm settles like c/t with a datum-dependent constant,
        // so the horizon is generous; geometric steps keep the cost ~ log t
        cfg.t_max = 2e8 / rate;
        cfg.extinction_tol = 1e-14 * norm_f;
        cfg.max_steps = 200000;
    }
    return cfg;
}

double rayleigh_integral_identity_error(const FlowTrace& trace, double t_ex) {
    const double p = trace.degree;
    if (p >= 2.0) throw std::invalid_argument("rayleigh_integral_identity_error: requires p < 2");
    if (!(t_ex > 0.0)) throw std::invalid_argument("rayleigh_integral_identity_error: t_ex must be positive");

    // Cumulative trapezoid of Lambda over the recorded window.
    const size_t n = trace.size();
    std::vector<double> cumulative(n, 0.0);
    size_t last_finite = 0;
    for (size_t k = 0; k + 1 < n; ++k) {
        if (!std::isfinite(trace.rayleighs[k]) || !std::isfinite(trace.rayleighs[k + 1])) break;
        cumulative[k + 1] = cumulative[k] + 0.5 * (trace.rayleighs[k] + trace.rayleighs[k + 1]) *
                                                (trace.times[k + 1] - trace.times[k]);
        last_finite = k + 1;
    }
    if (last_finite == 0) return kNaN;

    const double lambda = 1.0 / ((2.0 - p) * t_ex);
    double max_rel_error = 0.0;
    for (size_t k = 0; k <= last_finite; ++k) {
        const double t = trace.times[k];
        if (t >= 0.9 * t_ex) break;  // trailing samples are dominated by T_ex noise
        const double remaining = t_ex - t;
        const double tail = trace.rayleighs[last_finite] * (t_ex - trace.times[last_finite]);
        const double mean_lambda = (cumulative[last_finite] - cumulative[k] + tail) / remaining;
        const double a = ode_rescaling(p, lambda, t);
        const double w_norm = trace.norms_perp[k] / a;
        const double lhs = std::pow(w_norm, 2.0 - p) / ((2.0 - p) * t_ex);
        max_rel_error = std::max(max_rel_error, std::abs(lhs - mean_lambda) / mean_lambda);
    }
    return max_rel_error;
}

}  // namespace homflow
