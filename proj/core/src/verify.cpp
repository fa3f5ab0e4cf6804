#include "homflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace homflow {

namespace {

struct ZooRun {
    zoo::FlowProblem problem;
    FlowTrace trace;
    double lambda1 = 0.0;  // certified oracle value for the functional
};

std::vector<ZooRun>& zoo_runs(unsigned seed) {
    static std::map<unsigned, std::vector<ZooRun>> cache;
    auto it = cache.find(seed);
    if (it != cache.end()) return it->second;

    std::vector<ZooRun> runs;
    std::map<std::string, double> lambda_cache;
    for (zoo::FlowProblem& problem : zoo::flow_problems(seed)) {
        ZooRun run{std::move(problem), {}, 0.0};
        run.trace = run_flow(*run.problem.functional, run.problem.datum, run.problem.config);
        auto found = lambda_cache.find(run.problem.functional->name());
        if (found == lambda_cache.end()) {
            const GroundStateEstimate gs = ground_state_oracle(*run.problem.functional, 6, 1e-6);
            found = lambda_cache.emplace(run.problem.functional->name(), gs.lambda1).first;
        }
        run.lambda1 = found->second;
        runs.push_back(std::move(run));
    }
    return cache.emplace(seed, std::move(runs)).first->second;
}

std::vector<std::shared_ptr<const HomogeneousFunctional>> functional_battery(unsigned seed) {
    std::vector<std::shared_ptr<const HomogeneousFunctional>> fns;
    std::map<std::string, bool> seen;
    for (const zoo::FlowProblem& problem : zoo::flow_problems(seed)) {
        if (!seen.emplace(problem.functional->name(), true).second) continue;
        fns.push_back(problem.functional);
    }
    fns.push_back(std::make_shared<PowerTransform>(zoo::two_node(1.0), 2.0));
    fns.push_back(std::make_shared<PowerTransform>(zoo::two_node(1.0), 3.0));
    fns.push_back(std::make_shared<PowerTransform>(zoo::path_graph(4, 1.5), 2.0));
    return fns;
}

std::vector<Vector> random_probes(const InnerProductSpace& space, const Vector& center, int count,
                                  std::mt19937_64& rng) {
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    std::vector<Vector> probes;
    for (int i = 0; i < count; ++i) {
        Vector x(space.dim());
        for (int j = 0; j < space.dim(); ++j) x[j] = coord(rng);
        probes.push_back(center + x);
    }
    return probes;
}

void add_check(SuiteResult& result, const std::string& name, double value, double threshold,
               bool ok_if_below = true) {
    CheckResult check;
    check.name = name;
    check.value = value;
    check.threshold = threshold;
    check.ok = ok_if_below ? value <= threshold : value >= threshold;
    result.checks.push_back(std::move(check));
}

void add_flag(SuiteResult& result, const std::string& name, bool ok) {
    CheckResult check;
    check.name = name;
    check.value = ok ? 1.0 : 0.0;
    check.threshold = 1.0;
    check.ok = ok;
    result.checks.push_back(std::move(check));
}

SuiteResult suite_homogeneity(unsigned seed) {
    SuiteResult result;
    result.suite = "homogeneity";
    std::mt19937_64 rng(seed ^ 0xabcdu);

    for (const auto& J : functional_battery(seed)) {
        const bool exact = dynamic_cast<const QuadraticForm*>(J.get()) != nullptr;
        const HomogeneityReport hom = J->check_homogeneity(200, seed);
        add_check(result, J->name() + ": homogeneity deviation", hom.max_relative_deviation,
                  exact ? 1e-12 : 1e-8);

        // prox optimality witness + Euler identity + null-space orthogonality
        const Vector v = zoo::random_datum(*J, seed ^ 0x77u) * 2.0;
        for (double tau : {0.01, 1.0}) {
            const double tol = 1e-9;
            const ProxPoint pp = J->subgradient_from_prox(v, tau, tol);
            const auto evaluate = [&](const Vector& x) { return J->evaluate(x); };
            const WitnessCheck witness =
                check_witness(J->space(), evaluate, {pp.point, pp.subgrad, J->name()},
                              random_probes(J->space(), pp.point, 100, rng), tol * (1.0 + J->space().norm(v)));
            add_check(result, J->name() + ": prox witness tau=" + std::to_string(tau),
                      witness.max_violation, tol * (1.0 + J->space().norm(v)));

            const double euler = J->euler_identity_residual(pp.point, pp.subgrad);
            add_check(result, J->name() + ": euler residual tau=" + std::to_string(tau), euler,
                      1e-6 * (1.0 + J->degree() * J->evaluate(pp.point)));

            const NullSpaceBasis& basis = J->nullspace();
            double ortho = 0.0;
            for (const Vector& b : basis.vectors()) {
                ortho = std::max(ortho, std::abs(J->space().inner(pp.subgrad, b)));
            }
            add_check(result, J->name() + ": subgradient null-space orthogonality", ortho,
                      1e-8 * std::max(J->space().norm(pp.subgrad), 1e-300));
        }

        // invariance under null-space shifts
        const NullSpaceBasis& basis = J->nullspace();
        if (!basis.empty()) {
            const Vector u = zoo::random_datum(*J, seed ^ 0x99u);
            double drift = 0.0;
            for (const Vector& b : basis.vectors()) {
                drift = std::max(drift, std::abs(J->evaluate(u + 2.5 * b) - J->evaluate(u)));
            }
            add_check(result, J->name() + ": null-space invariance", drift,
                      1e-10 * (1.0 + std::abs(J->evaluate(u))));
        }
    }
    return result;
}

SuiteResult suite_dissipation(unsigned seed) {
    SuiteResult result;
    result.suite = "dissipation";

    for (const ZooRun& run : zoo_runs(seed)) {
        const DissipationReport diss = dissipation_check(run.trace);
        add_check(result, run.problem.name + ": dissipation inequality", diss.max_inequality_violation,
                  1e-10);
        const TraceInvariantReport inv = check_trace_invariants(run.trace, *run.problem.functional);
        add_check(result, run.problem.name + ": energy monotone", inv.max_energy_increase,
                  1e-12 * (1.0 + run.trace.energies.front()));
        add_check(result, run.problem.name + ": euler along trace", inv.max_euler_residual_excess, 0.0);
    }

    // mass conservation from raw (unprojected) data
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
        auto J = zoo::disjoint_pairs(p, 2.0, 1.0);
        FlowConfig cfg;
        cfg.tau0 = 5e-3;
        cfg.t_max = p < 2.0 ? 30.0 : 5.0;
        cfg.extinction_tol = p < 2.0 ? 1e-7 : 1e-14;
        cfg.project_datum = false;
        const Vector f = zoo::random_datum(*J, seed ^ 0x31u, true);
        const FlowTrace trace = run_flow(*J, f, cfg);
        const MassConservationReport mass = mass_conservation_check(trace, J->space(), J->nullspace());
        add_check(result, J->name() + ": mass conservation drift", mass.max_drift, 1e-10);
    }

    // first-order convergence of the stepper on the quadratic problem
    auto quad = zoo::diag_quadratic({1.0, 2.0});
    Vector f(2);
    f << 1.0, 1.0;
    FlowConfig cfg;
    cfg.tau0 = 1e-2;
    const double slope = step_refinement_slope(*quad, f, cfg, 1.0);
    add_flag(result, "quadratic: Richardson slope in [0.8, 1.2]", slope >= 0.8 && slope <= 1.2);
    return result;
}

SuiteResult suite_rayleigh(unsigned seed) {
    SuiteResult result;
    result.suite = "rayleigh";
    std::mt19937_64 rng(seed ^ 0x4ca1u);

    for (const ZooRun& run : zoo_runs(seed)) {
        const TraceInvariantReport inv = check_trace_invariants(run.trace, *run.problem.functional);
        add_check(result, run.problem.name + ": Lambda monotone", inv.max_rayleigh_increase,
                  inv.rayleigh_tolerance);

        double min_lambda = std::numeric_limits<double>::infinity();
        for (double L : run.trace.rayleighs) {
            if (std::isfinite(L)) min_lambda = std::min(min_lambda, L);
        }
        add_check(result, run.problem.name + ": oracle lambda1 below trace Rayleigh",
                  run.lambda1 - min_lambda, 1e-6);
    }

    for (const auto& J : functional_battery(seed)) {
        const Vector u = zoo::random_datum(*J, seed ^ 0x17u);
        const double base = rayleigh(*J, u);
        double deviation = 0.0;
        for (double c : {-3.0, 0.5, 7.0}) {
            deviation = std::max(deviation, std::abs(rayleigh(*J, c * u) - base));
        }
        add_check(result, J->name() + ": rayleigh scale invariance", deviation, 1e-12 * base);
    }

    // a' = -lambda a^{p-1} by finite differences
    const double h = 1e-4;
    for (auto [p, lambda] : std::vector<std::pair<double, double>>{{1.0, 2.0}, {1.5, 1.0}, {2.0, 1.0}, {3.0, 1.0}}) {
        double max_defect = 0.0;
        const double t_hi = p < 2.0 ? 0.9 / ((2.0 - p) * lambda) : 3.0;
        for (int i = 0; i < 50; ++i) {
            const double t = t_hi * i / 50.0;
            const double a = ode_rescaling(p, lambda, t);
            const double a_next = ode_rescaling(p, lambda, t + h);
            max_defect = std::max(max_defect, std::abs(a_next - a + h * lambda * std::pow(a, p - 1.0)));
        }
        add_check(result, "ode_rescaling defect p=" + std::to_string(p), max_defect, 10.0 * h * h);
    }
    (void)rng;
    return result;
}

SuiteResult suite_bounds(unsigned seed) {
    SuiteResult result;
    result.suite = "bounds";

    for (const ZooRun& run : zoo_runs(seed)) {
        const double p = run.trace.degree;
        if (p < 2.0) {
            const ExtinctionReport ext = detect_extinction(run.trace, run.lambda1);
            add_flag(result, run.problem.name + ": extinct", ext.extinct);
            if (!ext.extinct || !ext.t_ex_num) continue;
            add_check(result, run.problem.name + ": T_ex within upper bound",
                      *ext.t_ex_num / *ext.upper_bound, 1.02);
            const BoundsCheckReport bounds =
                sharper_finite_bounds(run.trace, run.lambda1, p, *ext.t_ex_num);
            add_check(result, run.problem.name + ": sharper lower bound", bounds.max_lower_violation, 0.02);
            add_check(result, run.problem.name + ": sharper upper bound", bounds.max_upper_violation, 0.02);
            const double identity_err = rayleigh_integral_identity_error(run.trace, *ext.t_ex_num);
            add_check(result, run.problem.name + ": integral identity", identity_err, 0.02);
        } else {
            if (run.trace.size() < 3) continue;
            const double delta = run.trace.times[1];
            const double norm_delta = run.trace.norms_perp[1];
            const double rayleigh_delta = run.trace.rayleighs[1];
            double max_lower_violation = 0.0;
            double max_upper_violation = 0.0;
            const double lambda0 = run.trace.rayleighs.front();
            for (size_t k = 1; k < run.trace.size(); ++k) {
                const double t = run.trace.times[k];
                const Envelope env = decay_envelopes(run.trace.norms_perp.front(), run.lambda1, p,
                                                     norm_delta, rayleigh_delta, delta, t);
                max_lower_violation =
                    std::max(max_lower_violation, (*env.lower - run.trace.norms_perp[k]) / *env.lower);
                // first-order stepping allowance on top of the 2% slack
                const double discrete_slack = 0.75 * lambda0 * lambda0 * run.problem.config.tau0 * t;
                max_upper_violation = std::max(max_upper_violation,
                                               (run.trace.norms_perp[k] - env.upper * (1.0 + discrete_slack)) /
                                                   env.upper);
            }
            add_check(result, run.problem.name + ": lower envelope", max_lower_violation, 0.02);
            add_check(result, run.problem.name + ": upper envelope", max_upper_violation, 0.02);
        }
    }
    return result;
}

SuiteResult suite_opflow(unsigned /*seed*/) {
    SuiteResult result;
    result.suite = "opflow";

    // symmetric operator: g vanishes identically
    {
        const LinearOperatorFlow op(zoo::diag_quadratic({1.0, 2.0})->matrix());
        Vector f(2);
        f << 1.0, 1.0;
        const SurrogateTrace trace = run_linear_flow(op, f, geometric_times(0.1, 20.0, 120));
        double max_g = 0.0;
        for (double g : trace.g) max_g = std::max(max_g, g);
        add_check(result, "symmetric: g == 0", max_g, 1e-12);
        const IntegrabilityReport integ = integrability_diagnostic(trace);
        add_flag(result, "symmetric: integrable", integ.classification == IntegrabilityClass::integrable);

        double max_norm_increase = 0.0;
        for (size_t k = 0; k + 1 < trace.size(); ++k) {
            max_norm_increase = std::max(max_norm_increase, trace.norms[k + 1] - trace.norms[k]);
        }
        add_check(result, "symmetric: ||u|| non-increasing", max_norm_increase, 1e-12);

        double max_envelope_violation = 0.0;
        for (size_t k = 0; k < trace.size(); ++k) {
            const double envelope = f.norm() * std::exp(-op.coercivity_constant() * trace.times[k]);
            max_envelope_violation = std::max(max_envelope_violation, trace.norms[k] - envelope * (1.0 + 1e-8));
        }
        add_check(result, "symmetric: exponential decay envelope", max_envelope_violation, 0.0);
    }

    // triangular real-spectrum matrix: integrable tail, profile direction exists
    {
        const LinearOperatorFlow op(zoo::triangular_real_spectrum(1.0, 1.0));
        Vector f(2);
        f << 1.0, 1.0;
        const SurrogateTrace trace = run_linear_flow(op, f, geometric_times(0.1, 120.0, 240), 1.0);
        const IntegrabilityReport integ = integrability_diagnostic(trace);
        add_flag(result, "triangular: tail slope in [-2.5,-1.5]",
                 integ.tail_slope && *integ.tail_slope >= -2.5 && *integ.tail_slope <= -1.5);
        add_flag(result, "triangular: integrable", integ.classification == IntegrabilityClass::integrable);
        const ProfileReport profile = operator_profile(op, f, 1.0, 20000.0);
        add_flag(result, "triangular: profile direction converged", profile.converged);
        add_check(result, "triangular: trailing residual", profile.eigen_residual, 1e-3);
    }

    // complex-spectrum counterexample: no asymptotic profile
    {
        const LinearOperatorFlow op(zoo::complex_spectrum_counterexample());
        Vector f(3);
        f << 1.0, 1.0, 1.0;
        add_check(result, "counterexample: coercivity constant", std::abs(op.coercivity_constant() - 1.0),
                  1e-12);
        const SurrogateTrace trace = run_linear_flow(op, f, geometric_times(10.0, 100.0, 200), 1.0);
        double inf_residual = std::numeric_limits<double>::infinity();
        for (size_t k = 0; k < trace.size(); ++k) {
            const double w_norm = trace.norms[k] * std::exp(trace.lambda * trace.times[k]);
            inf_residual = std::min(inf_residual, trace.residuals[k] / std::max(w_norm, 1e-300));
        }
        add_check(result, "counterexample: residual infimum over [10,100]", inf_residual, 0.1, false);
        const ProfileReport profile = operator_profile(op, f, 1.0, 100.0);
        add_flag(result, "counterexample: profile not converged", !profile.converged);
        const IntegrabilityReport integ = integrability_diagnostic(trace);
        add_flag(result, "counterexample: inconclusive integrability",
                 integ.classification == IntegrabilityClass::inconclusive);
    }

    // rotation-perturbed identity: coercive without a real eigenvalue
    {
        const LinearOperatorFlow op(zoo::rotation_perturbed_identity(0.7));
        add_check(result, "rotation: coercivity constant", std::abs(op.coercivity_constant() - 1.0), 1e-12);
    }

    // gradient flow vs operator flow on symmetric problems
    {
        auto quad = zoo::diag_quadratic({1.0, 2.0});
        Vector f(2);
        f << 1.0, 1.0;
        const GradientConsistencyReport consistency = gradient_case_consistency(*quad, f, 1.0);
        add_check(result, "consistency: h' = -2||Ku||^2", consistency.max_hprime_error_rel, 1e-4);
        add_check(result, "consistency: engines agree on ||u||", consistency.max_norm_mismatch, 1e-6);
    }
    return result;
}

}  // namespace

int SuiteResult::failures() const {
    int n = 0;
    for (const CheckResult& c : checks) {
        if (!c.ok) ++n;
    }
    return n;
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"homogeneity", "dissipation", "rayleigh",
                                                   "bounds",      "opflow",      "all"};
    return names;
}

SuiteResult run_suite(const std::string& name, unsigned seed) {
    if (name == "homogeneity") return suite_homogeneity(seed);
    if (name == "dissipation") return suite_dissipation(seed);
    if (name == "rayleigh") return suite_rayleigh(seed);
    if (name == "bounds") return suite_bounds(seed);
    if (name == "opflow") return suite_opflow(seed);
    if (name == "all") {
        SuiteResult all;
        all.suite = "all";
        for (const char* sub : {"homogeneity", "dissipation", "rayleigh", "bounds", "opflow"}) {
            SuiteResult part = run_suite(sub, seed);
            for (CheckResult& check : part.checks) {
                check.name = part.suite + "/" + check.name;
                all.checks.push_back(std::move(check));
            }
        }
        return all;
    }
    throw std::invalid_argument("run_suite: unknown suite '" + name + "'");
}

}  // namespace homflow
