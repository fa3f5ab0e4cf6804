#include "homflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace homflow {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

void FlowConfig::validate() const {
    if (!(tau0 > 0.0)) throw std::invalid_argument("FlowConfig: tau0 must be positive");
    if (!(adapt_factor > 0.0 && adapt_factor < 1.0)) {
        throw std::invalid_argument("FlowConfig: adapt_factor must lie in (0,1)");
    }
    if (!(extinction_tol > 0.0)) throw std::invalid_argument("FlowConfig: extinction_tol must be positive");
    if (!(t_max > 0.0)) throw std::invalid_argument("FlowConfig: t_max must be positive");
    if (max_steps < 1) throw std::invalid_argument("FlowConfig: max_steps must be at least 1");
    if (!(prox_tol > 0.0)) throw std::invalid_argument("FlowConfig: prox_tol must be positive");
    if (tail_resolution < 0.0 || tau_growth < 0.0) {
        throw std::invalid_argument("FlowConfig: step-control rates must be nonnegative");
    }
}

FlowTrace run_flow(const HomogeneousFunctional& J, const Vector& f, const FlowConfig& config) {
    config.validate();
    const InnerProductSpace& space = J.space();
    space.require_dim(f);
    if (!all_finite(f)) throw std::invalid_argument("run_flow: datum has non-finite coordinates");

    const NullSpaceBasis& basis = J.nullspace();
    const double p = J.degree();

    Vector u = config.project_datum ? basis.project_out(space, f) : f;
    const double initial_perp = space.norm(basis.project_out(space, u));
    if (initial_perp <= config.extinction_tol) {
        throw std::invalid_argument("run_flow: datum vanishes after null-space projection");
    }

    FlowTrace trace;
    trace.degree = p;
    trace.extinction_tol = config.extinction_tol;
    trace.space_weights = space.weights();

    const auto record = [&](double t, const Vector& state, const Vector& subgrad) {
        const double energy = J.evaluate(state);
        const double n_full = space.norm(state);
        const double n_perp = basis.empty() ? n_full : space.norm(basis.project_out(space, state));
        trace.times.push_back(t);
        trace.states.push_back(state);
        trace.subgrads.push_back(subgrad);
        trace.energies.push_back(energy);
        trace.norms.push_back(n_full);
        trace.norms_perp.push_back(n_perp);
        trace.rayleighs.push_back(n_perp > 0.0 ? p * energy / std::pow(n_perp, p) : kNaN);
    };

    // The subgradient at the datum comes from a small probe step; the flow's
    // own subgradients are the implicit-Euler ones.
    try {
        const double tau_probe = 1e-6 * config.tau0;
        const ProxPoint probe = J.subgradient_from_prox(u, tau_probe, config.prox_tol);
        record(0.0, u, probe.subgrad);
    } catch (const ProxError& err) {
        record(0.0, u, Vector::Zero(space.dim()));
        trace.completed = false;
        trace.abort_reason = err.what();
        trace.taus.resize(1, 0.0);
        return trace;
    }

    double t = 0.0;
    const double tau_floor = config.tau0 * 1e-12;
    const double landing_floor = 1e-15 * std::max(config.t_max, 1.0);

    for (long step = 0; step < config.max_steps; ++step) {
        if (trace.norms_perp.back() <= config.extinction_tol) {
            trace.reached_extinction_tol = true;
            break;
        }
        if (t >= config.t_max - landing_floor) {
            trace.reached_t_max = true;
            break;
        }
        double tau_k = config.tau0;
        if (p < 2.0 && trace.norms_perp.back() < 10.0 * config.extinction_tol) {
            tau_k *= config.adapt_factor;
        }
        if (p < 2.0 && config.tail_resolution > 0.0) {
            // keep tau a fixed fraction of the remaining-time estimate so the
            // extinction tail is resolved geometrically without stalling
            const double lambda_here = trace.rayleighs.back();
            if (std::isfinite(lambda_here) && lambda_here > 0.0) {
                const double remaining =
                    std::pow(trace.norms_perp.back(), 2.0 - p) / ((2.0 - p) * lambda_here);
                tau_k = std::min(tau_k, std::max(config.tail_resolution * remaining, tau_floor));
            }
        }
        if (p >= 2.0 && config.tau_growth > 0.0) {
            tau_k = std::max(tau_k, config.tau_growth * t);
        }
        tau_k = std::min(tau_k, config.t_max - t);

        Vector next;
        try {
            next = J.prox(u, tau_k, config.prox_tol);
        } catch (const ProxError& err) {
            trace.completed = false;
            trace.abort_reason = err.what();
            break;
        }
        const bool stalled = space.norm(next - u) == 0.0 && tau_k <= 2.0 * tau_floor;
        const Vector zeta = (u - next) / tau_k;
        t += tau_k;
        u = std::move(next);
        record(t, u, zeta);
        if (stalled) {
            trace.completed = false;
            trace.abort_reason = "step stalled at the minimal step size";
            break;
        }
    }
    if (trace.norms_perp.back() <= config.extinction_tol) trace.reached_extinction_tol = true;
    if (t >= config.t_max - landing_floor) trace.reached_t_max = true;

    trace.taus.resize(trace.times.size(), 0.0);
    for (size_t k = 0; k + 1 < trace.times.size(); ++k) {
        trace.taus[k] = trace.times[k + 1] - trace.times[k];
    }
    return trace;
}

ExtinctionReport detect_extinction(const FlowTrace& trace, double lambda1) {
    if (!(lambda1 > 0.0)) throw std::invalid_argument("detect_extinction: lambda1 must be positive");
    if (trace.size() == 0) throw std::invalid_argument("detect_extinction: empty trace");

    const double p = trace.degree;
    ExtinctionReport report;
    report.regime = p < 2.0 ? ExtinctionRegime::finite : ExtinctionRegime::infinite;
    if (p >= 2.0) return report;  // never extinct for p >= 2

    report.upper_bound = std::pow(trace.norms_perp.front(), 2.0 - p) / ((2.0 - p) * lambda1);
    report.extinct = trace.reached_extinction_tol && !trace.reached_t_max;
    if (!report.extinct) return report;

    // Zero crossing of ||u||^{2-p}, which decays linearly for eigenfunction
    // data. The exact tail slope is -(2-p) Lambda, so when the trailing
    // Rayleigh quotient is available it beats a two-point difference.
    const auto phi = [&](size_t k) { return std::pow(trace.norms_perp[k], 2.0 - p); };
    const size_t K = trace.size() - 1;
    if (trace.norms_perp[K] > 0.0) {
        if (K == 0) {
            report.t_ex_num = trace.times[0];
            return report;
        }
        if (std::isfinite(trace.rayleighs[K]) && trace.rayleighs[K] > 0.0) {
            report.t_ex_num = trace.times[K] + phi(K) / ((2.0 - p) * trace.rayleighs[K]);
            return report;
        }
        const double slope_drop = phi(K - 1) - phi(K);
        if (slope_drop > 0.0) {
            report.t_ex_num = trace.times[K] + phi(K) * (trace.times[K] - trace.times[K - 1]) / slope_drop;
        } else {
            report.t_ex_num = trace.times[K];
        }
        return report;
    }
    // The state hit exactly zero: locate the crossing inside the last active step.
    size_t k0 = K;
    while (k0 > 0 && trace.norms_perp[k0 - 1] == 0.0) --k0;
    if (k0 == 0) {
        report.t_ex_num = trace.times[0];
        return report;
    }
    if (k0 >= 2) {
        const double slope = (phi(k0 - 2) - phi(k0 - 1)) / (trace.times[k0 - 1] - trace.times[k0 - 2]);
        if (slope > 0.0) {
            report.t_ex_num = std::min(trace.times[k0], trace.times[k0 - 1] + phi(k0 - 1) / slope);
            return report;
        }
    }
    report.t_ex_num = trace.times[k0];
    return report;
}

double lower_envelope(double lambda1, double p, double norm_at_delta, double rayleigh_at_delta,
                      double delta, double t) {
    if (p < 2.0) {
        throw std::invalid_argument("no lower envelope; use sharper finite-extinction bounds");
    }
    if (!(lambda1 > 0.0)) throw std::invalid_argument("lower_envelope: lambda1 must be positive");
    if (t < delta) throw std::invalid_argument("lower_envelope: requires t >= delta");
    if (norm_at_delta <= 0.0) return 0.0;
    if (p == 2.0) return norm_at_delta * std::exp(-rayleigh_at_delta * (t - delta));
    const double base = std::pow(norm_at_delta, 2.0 - p) + (p - 2.0) * rayleigh_at_delta * (t - delta);
    return std::pow(base, -1.0 / (p - 2.0));
}

Envelope decay_envelopes(double norm_f, double lambda1, double p, double norm_at_delta,
                         double rayleigh_at_delta, double delta, double t) {
    if (!(lambda1 > 0.0)) throw std::invalid_argument("decay_envelopes: lambda1 must be positive");
    if (!(t >= delta && delta >= 0.0)) throw std::invalid_argument("decay_envelopes: requires t >= delta >= 0");

    Envelope env;
    if (norm_f <= 0.0) {
        env.upper = 0.0;
    } else if (p < 2.0) {
        const double base = std::pow(norm_f, 2.0 - p) - (2.0 - p) * lambda1 * t;
        env.upper = base > 0.0 ? std::pow(base, 1.0 / (2.0 - p)) : 0.0;
    } else if (p == 2.0) {
        env.upper = norm_f * std::exp(-lambda1 * t);
    } else {
        const double base = std::pow(norm_f, 2.0 - p) + (p - 2.0) * lambda1 * t;
        env.upper = std::pow(base, -1.0 / (p - 2.0));
    }
    if (p >= 2.0) {
        env.lower = lower_envelope(lambda1, p, norm_at_delta, rayleigh_at_delta, delta, t);
    }
    return env;
}

BoundsCheckReport sharper_finite_bounds(const FlowTrace& trace, double lambda1, double p, double t_ex,
                                        double rel_tol) {
    if (p >= 2.0) throw std::invalid_argument("sharper_finite_bounds: only defined for p < 2");
    if (!(lambda1 > 0.0)) throw std::invalid_argument("sharper_finite_bounds: lambda1 must be positive");

    BoundsCheckReport report;
    for (size_t k = 0; k < trace.size(); ++k) {
        const double remaining = t_ex - trace.times[k];
        if (remaining <= 0.0 || trace.norms_perp[k] <= 0.0) continue;
        if (!std::isfinite(trace.rayleighs[k])) continue;
        const double value = std::pow(trace.norms_perp[k], 2.0 - p);
        const double lo = (2.0 - p) * lambda1 * remaining;
        const double hi = (2.0 - p) * trace.rayleighs[k] * remaining;
        report.max_lower_violation = std::max(report.max_lower_violation, (lo - value) / lo);
        report.max_upper_violation = std::max(report.max_upper_violation, (value - hi) / hi);
        ++report.checked;
    }
    report.ok = report.max_lower_violation <= rel_tol && report.max_upper_violation <= rel_tol;
    return report;
}

DissipationReport dissipation_check(const FlowTrace& trace) {
    DissipationReport report;
    const double p = trace.degree;
    for (size_t k = 0; k + 1 < trace.size(); ++k) {
        const double lhs = 0.5 * trace.norms[k + 1] * trace.norms[k + 1] -
                           0.5 * trace.norms[k] * trace.norms[k];
        const double rhs = -trace.taus[k] * p * trace.energies[k + 1];
        report.max_inequality_violation = std::max(report.max_inequality_violation, lhs - rhs);
    }
    for (size_t k = 1; k + 1 < trace.size(); ++k) {
        const double dt = trace.times[k + 1] - trace.times[k - 1];
        if (dt <= 0.0) continue;
        const double deriv = (0.5 * trace.norms[k + 1] * trace.norms[k + 1] -
                              0.5 * trace.norms[k - 1] * trace.norms[k - 1]) /
                             dt;
        report.max_central_diff_error =
            std::max(report.max_central_diff_error, std::abs(deriv + p * trace.energies[k]));
    }
    report.ok = report.max_inequality_violation <= 1e-10;
    return report;
}

MassConservationReport mass_conservation_check(const FlowTrace& trace, const InnerProductSpace& space,
                                               const NullSpaceBasis& basis) {
    MassConservationReport report;
    if (trace.size() == 0 || basis.empty()) return report;
    const Vector reference = basis.component(space, trace.states.front());
    for (const Vector& state : trace.states) {
        report.max_drift = std::max(report.max_drift, space.norm(basis.component(space, state) - reference));
    }
    report.ok = report.max_drift <= 1e-10;
    return report;
}

TraceInvariantReport check_trace_invariants(const FlowTrace& trace, const HomogeneousFunctional& J) {
    TraceInvariantReport report;
    const double p = trace.degree;

    for (size_t k = 0; k + 1 < trace.size(); ++k) {
        report.max_energy_increase =
            std::max(report.max_energy_increase, trace.energies[k + 1] - trace.energies[k]);
    }

    double lambda0 = kNaN;
    for (double L : trace.rayleighs) {
        if (std::isfinite(L)) {
            lambda0 = L;
            break;
        }
    }
    report.rayleigh_tolerance = std::isfinite(lambda0) ? 1e-8 * lambda0 : 0.0;
    double prev = kNaN;
    for (double L : trace.rayleighs) {
        if (!std::isfinite(L)) continue;
        if (std::isfinite(prev)) {
            report.max_rayleigh_increase = std::max(report.max_rayleigh_increase, L - prev);
        }
        prev = L;
    }

    report.max_dissipation_violation = dissipation_check(trace).max_inequality_violation;

    for (size_t k = 1; k < trace.size(); ++k) {
        const double residual = J.euler_identity_residual(trace.states[k], trace.subgrads[k]);
        const double allowed = 1e-6 * (1.0 + p * trace.energies[k]);
        report.max_euler_residual_excess = std::max(report.max_euler_residual_excess, residual - allowed);
    }

    const double energy_slack = 1e-12 * (1.0 + (trace.energies.empty() ? 0.0 : trace.energies.front()));
    report.ok = report.max_energy_increase <= energy_slack &&
                report.max_rayleigh_increase <= report.rayleigh_tolerance &&
                report.max_dissipation_violation <= 1e-10 && report.max_euler_residual_excess <= 0.0;
    return report;
}

double step_refinement_slope(const HomogeneousFunctional& J, const Vector& f, const FlowConfig& config,
                             double t_eval) {
    if (!(t_eval > 0.0)) throw std::invalid_argument("step_refinement_slope: t_eval must be positive");
    const auto state_at = [&](double tau) {
        FlowConfig cfg = config;
        cfg.tau0 = tau;
        cfg.t_max = t_eval;
        cfg.extinction_tol = 1e-300;  // run to the horizon
        cfg.max_steps = std::max<long>(cfg.max_steps, 8 * static_cast<long>(t_eval / tau) + 16);
        const FlowTrace trace = run_flow(J, f, cfg);
        return trace.states.back();
    };
    const Vector u1 = state_at(config.tau0);
    const Vector u2 = state_at(config.tau0 / 2.0);
    const Vector u4 = state_at(config.tau0 / 4.0);
    const double e1 = J.space().norm(u1 - u2);
    const double e2 = J.space().norm(u2 - u4);
    if (e2 <= 0.0) return kNaN;
    return std::log2(e1 / e2);
}

}  // namespace homflow
