#pragma once

#include "homflow/functionals.hpp"

#include <optional>

namespace homflow {

struct FlowConfig {
    double tau0 = 1e-3;            // initial proximal step
    double adapt_factor = 0.5;     // step shrink factor near extinction (p < 2)
    double extinction_tol = 1e-8;  // stop when the orthogonal part drops below this
    double t_max = 10.0;           // time horizon
    long max_steps = 200000;
    double prox_tol = 1e-12;
    bool project_datum = true;     // project f onto N(J)^perp before flowing

    // p < 2: cap tau at this fraction of the remaining-time estimate
    // ||u||^{2-p} / ((2-p) Lambda), so the approach to extinction is resolved
    // geometrically (0 disables). At 0.01 the measured-extinction bias stays
    // well inside the 2% bound tolerances.
    double tail_resolution = 0.01;
    // p >= 2: let tau grow like tau_growth * t past tau0; profile convergence
    // is algebraic in t, so long horizons need geometric steps (0 disables).
    double tau_growth = 0.0;

    void validate() const;
};

/// Recorded proximal-point trajectory. Index k = 0 is the datum; subgrads[0]
/// is obtained from a small probe step at the datum, subgrads[k] for k >= 1 is
/// the implicit-Euler subgradient (u_{k-1} - u_k)/tau_{k-1} in dJ(u_k).
struct FlowTrace {
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<Vector> subgrads;
    std::vector<double> energies;
    std::vector<double> norms;       // full space norm
    std::vector<double> norms_perp;  // norm of the component orthogonal to N(J)
    std::vector<double> rayleighs;   // p J_k / ||u_k,perp||^p (NaN once extinct)
    std::vector<double> taus;        // taus[k] = t_{k+1} - t_k, last entry 0

    double degree = 2.0;
    double extinction_tol = 0.0;
    Vector space_weights;  // diagonal measure of the underlying space
    bool reached_extinction_tol = false;
    bool reached_t_max = false;
    bool completed = true;  // false when the prox solver aborted the run
    std::string abort_reason;

    size_t size() const { return times.size(); }
};

/// Integrates du/dt + dJ(u) = 0 by proximal-point (implicit Euler) steps
/// u_{k+1} = prox_{tau_k J}(u_k), with step-size shrinking once the state
/// enters the extinction neighborhood for p < 2.
FlowTrace run_flow(const HomogeneousFunctional& J, const Vector& f, const FlowConfig& config);

enum class ExtinctionRegime { finite, infinite };

struct ExtinctionReport {
    bool extinct = false;
    std::optional<double> t_ex_num;     // zero crossing of ||u||^{2-p}, p < 2
    std::optional<double> upper_bound;  // ||f||^{2-p} / ((2-p) lambda1), p < 2
    ExtinctionRegime regime = ExtinctionRegime::infinite;
};

ExtinctionReport detect_extinction(const FlowTrace& trace, double lambda1);

struct Envelope {
    double upper = 0.0;
    std::optional<double> lower;  // only defined for p >= 2
};

/// The decay envelopes for ||u(t)||: the general upper bound from coercivity
/// and, for p >= 2, the lower bound seeded at time delta with the Rayleigh
/// quotient observed there. Requesting the p < 2 lower envelope throws; the
/// sharper finite-extinction bounds cover that regime.
Envelope decay_envelopes(double norm_f, double lambda1, double p, double norm_at_delta,
                         double rayleigh_at_delta, double delta, double t);
double lower_envelope(double lambda1, double p, double norm_at_delta, double rayleigh_at_delta,
                      double delta, double t);

struct BoundsCheckReport {
    bool ok = true;
    int checked = 0;
    double max_lower_violation = 0.0;  // relative amount the lower bound was broken by
    double max_upper_violation = 0.0;
};

/// Per-step two-sided bounds (2-p) lambda1 (T-t) <= ||u||^{2-p} <= (2-p) Lambda (T-t)
/// for p < 2 after extinction has been detected.
BoundsCheckReport sharper_finite_bounds(const FlowTrace& trace, double lambda1, double p, double t_ex,
                                        double rel_tol = 0.02);

struct DissipationReport {
    double max_inequality_violation = 0.0;  // against the discrete dissipation inequality
    double max_central_diff_error = 0.0;    // |d/dt 1/2||u||^2 + p J(u)| by central differences
    bool ok = true;
};

DissipationReport dissipation_check(const FlowTrace& trace);

struct MassConservationReport {
    double max_drift = 0.0;
    bool ok = true;
};

/// Drift of the null-space component of the states against that of the datum.
MassConservationReport mass_conservation_check(const FlowTrace& trace, const InnerProductSpace& space,
                                               const NullSpaceBasis& basis);

struct TraceInvariantReport {
    double max_energy_increase = 0.0;
    double max_rayleigh_increase = 0.0;       // against additive tolerance 1e-8 * Lambda_0
    double rayleigh_tolerance = 0.0;
    double max_dissipation_violation = 0.0;
    double max_euler_residual_excess = 0.0;   // Euler residual minus 1e-6 (1 + p J)
    bool ok = true;
};

/// The FlowTrace invariants: J_k non-increasing, Lambda_k non-increasing up to
/// 1e-8 * Lambda_0, the discrete dissipation inequality, and the Euler
/// identity at every post-step point.
TraceInvariantReport check_trace_invariants(const FlowTrace& trace, const HomogeneousFunctional& J);

/// Richardson slope of the implicit-Euler error at time t_eval: runs the flow
/// at tau0, tau0/2, tau0/4 and returns log2(|u_tau - u_tau/2| / |u_tau/2 - u_tau/4|),
/// which approaches 1 for a first-order scheme.
double step_refinement_slope(const HomogeneousFunctional& J, const Vector& f, const FlowConfig& config,
                             double t_eval);

}  // namespace homflow
