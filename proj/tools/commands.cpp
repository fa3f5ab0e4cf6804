#include "commands.hpp"

#include "homflow/spectral.hpp"
#include "homflow/zoo.hpp"

#include <cstdio>
#include <random>

namespace homflow::cli {

namespace {

json base_report(const ExperimentConfig& config, std::optional<unsigned> seed_override) {
    json doc;
    doc["schema_version"] = 1;
    doc["config_hash"] = config_hash(config);
    if (config.datum.values) {
        doc["seed"] = nullptr;
    } else {
        doc["seed"] = seed_override.value_or(config.datum.seed);
    }
    return doc;
}

json extinction_to_json(const ExtinctionReport& ext) {
    json doc;
    doc["extinct"] = ext.extinct;
    doc["regime"] = ext.regime == ExtinctionRegime::finite ? "finite" : "infinite";
    doc["t_ex"] = ext.t_ex_num ? json(*ext.t_ex_num) : json(nullptr);
    doc["upper_bound"] = ext.upper_bound ? json(*ext.upper_bound) : json(nullptr);
    return doc;
}

bool wants(const ExperimentConfig& config, const std::string& analysis) {
    if (config.analysis.empty()) return true;  // default: run everything
    for (const std::string& entry : config.analysis) {
        if (entry == analysis || entry == "all") return true;
    }
    return false;
}

Vector operator_datum(const ExperimentConfig& config, int dim, std::optional<unsigned> seed_override) {
    if (config.datum.values) {
        if (config.datum.values->size() != dim) {
            throw ConfigError("config error: datum.values: dimension does not match the operator");
        }
        return *config.datum.values;
    }
    std::mt19937_64 rng(seed_override.value_or(config.datum.seed));
    std::uniform_real_distribution<double> coord(config.datum.nonnegative ? 0.1 : -1.0, 1.0);
    Vector f(dim);
    for (int i = 0; i < dim; ++i) f[i] = coord(rng);
    return f / f.norm();
}

}  // namespace

int cmd_run(const ExperimentConfig& config, const std::filesystem::path& outdir,
            std::optional<unsigned> seed_override) {
    const auto J = build_functional(config.problem);
    const Vector f = build_datum(*J, config.datum, seed_override);
    const FlowTrace trace = run_flow(*J, f, config.flow);
    write_trace_csv(outdir / "trace.csv", trace);

    const GroundStateEstimate gs = ground_state_oracle(*J, 6, 1e-6);
    const ExtinctionReport ext = detect_extinction(trace, gs.lambda1);

    json report = base_report(config, seed_override);
    report["problem"] = {{"name", J->name()}, {"degree", J->degree()}, {"dim", J->space().dim()}};
    report["lambda1"] = {{"value", gs.lambda1}, {"method", gs.method}, {"residual", gs.residual}};
    report["flow"] = {{"steps", trace.size() - 1},
                      {"t_end", trace.times.back()},
                      {"final_norm", trace.norms.back()},
                      {"completed", trace.completed},
                      {"abort_reason", trace.abort_reason}};
    report["extinction"] = extinction_to_json(ext);

    bool violated = false;
    json checks;
    if (wants(config, "invariants")) {
        const TraceInvariantReport inv = check_trace_invariants(trace, *J);
        checks["invariants"] = {{"ok", inv.ok},
                                {"max_energy_increase", inv.max_energy_increase},
                                {"max_rayleigh_increase", inv.max_rayleigh_increase},
                                {"rayleigh_tolerance", inv.rayleigh_tolerance},
                                {"max_euler_residual_excess", inv.max_euler_residual_excess}};
        violated = violated || !inv.ok;
    }
    if (wants(config, "dissipation")) {
        const DissipationReport diss = dissipation_check(trace);
        checks["dissipation"] = {{"ok", diss.ok},
                                 {"max_inequality_violation", diss.max_inequality_violation},
                                 {"max_central_diff_error", diss.max_central_diff_error}};
        violated = violated || !diss.ok;
    }
    if (wants(config, "mass")) {
        const MassConservationReport mass = mass_conservation_check(trace, J->space(), J->nullspace());
        checks["mass_conservation"] = {{"ok", mass.ok}, {"max_drift", mass.max_drift}};
        violated = violated || !mass.ok;
    }
    if (wants(config, "bounds") && ext.extinct && ext.t_ex_num) {
        const BoundsCheckReport bounds = sharper_finite_bounds(trace, gs.lambda1, J->degree(), *ext.t_ex_num);
        checks["sharper_bounds"] = {{"ok", bounds.ok},
                                    {"max_lower_violation", bounds.max_lower_violation},
                                    {"max_upper_violation", bounds.max_upper_violation}};
        violated = violated || !bounds.ok;
    }
    if (ext.extinct && ext.t_ex_num && ext.upper_bound) {
        const bool within = *ext.t_ex_num <= *ext.upper_bound * 1.02;
        checks["extinction_bound"] = {{"ok", within}, {"t_ex", *ext.t_ex_num}, {"bound", *ext.upper_bound}};
        violated = violated || !within;
    }
    report["checks"] = checks;
    write_json(outdir / "report.json", report);

    if (!trace.completed) {
        std::fprintf(stderr, "run: solver failure: %s\n", trace.abort_reason.c_str());
        return kExitFailure;
    }
    std::printf("run: %s steps=%zu t_end=%s regime=%s%s\n", J->name().c_str(), trace.size() - 1,
                format_double(trace.times.back()).c_str(),
                ext.regime == ExtinctionRegime::finite ? "finite" : "infinite",
                violated ? " [INVARIANT VIOLATION]" : "");
    return violated ? kExitViolation : kExitOk;
}

int cmd_profile(const ExperimentConfig& config, const std::filesystem::path& outdir,
                std::optional<unsigned> seed_override) {
    const auto J = build_functional(config.problem);
    const Vector f = build_datum(*J, config.datum, seed_override);
    const double p = J->degree();

    const GroundStateEstimate gs = ground_state_oracle(*J, 6, 1e-6);
    const Vector f_perp = J->nullspace().project_out(J->space(), f);
    const FlowConfig cfg =
        config.flow_given ? config.flow : profile_flow_config(p, gs.lambda1, J->space().norm(f_perp));
    const FlowTrace trace = run_flow(*J, f, cfg);
    write_trace_csv(outdir / "trace.csv", trace);

    double lambda = 0.0;
    json report = base_report(config, seed_override);
    if (p < 2.0) {
        const ExtinctionReport ext = detect_extinction(trace, gs.lambda1);
        if (!ext.extinct || !ext.t_ex_num) {
            std::fprintf(stderr, "profile: flow did not reach extinction before the horizon\n");
            return kExitFailure;
        }
        report["extinction"] = extinction_to_json(ext);
        lambda = choose_lambda(p, ext.t_ex_num, gs.lambda1, trace.norms_perp.front());
    } else {
        lambda = choose_lambda(p, {}, gs.lambda1, trace.norms_perp.front());
    }

    const RescaledTrajectory rescaled = rescale_trajectory(trace, lambda, p);
    const ProfileReport profile = extract_profile(rescaled, *J, gs.lambda1);
    const bool lambda_limit = lambda_limit_test(trace, gs.lambda1);

    report["problem"] = {{"name", J->name()}, {"degree", p}, {"dim", J->space().dim()}};
    report["lambda1"] = {{"value", gs.lambda1}, {"method", gs.method}, {"residual", gs.residual}};
    report["profile"] = {{"lambda", lambda},
                         {"eigen_residual", profile.eigen_residual},
                         {"scale_invariant_eigenvalue",
                          std::isfinite(profile.scale_invariant_eigenvalue)
                              ? json(profile.scale_invariant_eigenvalue)
                              : json(nullptr)},
                         {"is_ground_state", profile.is_ground_state},
                         {"lambda_limit_test", lambda_limit},
                         {"converged", profile.converged},
                         {"zero_profile", profile.zero_profile},
                         {"cauchy_gap", profile.cauchy_gap},
                         {"coordinates", std::vector<double>(profile.w_star.data(),
                                                             profile.w_star.data() + profile.w_star.size())}};
    write_json(outdir / "profile.json", report);

    std::printf("profile: lambda=%s residual=%s ground_state=%s%s\n", format_double(lambda).c_str(),
                format_double(profile.eigen_residual).c_str(), profile.is_ground_state ? "yes" : "no",
                profile.zero_profile ? " (zero profile)" : "");
    if (!profile.converged) {
        std::fprintf(stderr, "profile: trailing window not Cauchy (gap %s); no certification\n",
                     format_double(profile.cauchy_gap).c_str());
        return kExitNoProfile;
    }
    return kExitOk;
}

int cmd_opflow(const ExperimentConfig& config, const std::filesystem::path& outdir,
               std::optional<unsigned> seed_override) {
    if (!config.op) throw ConfigError("config error: problem.kind: expected 'operator' for opflow");
    const LinearOperatorFlow op(config.op->matrix);  // NotMonotoneError -> exit 1 in main
    const Vector f = operator_datum(config, op.dim(), seed_override);

    const TimeGrid& grid = config.op->times;
    const std::vector<double> times = geometric_times(grid.t0, grid.t1, grid.count);
    const SurrogateTrace trace = run_linear_flow(op, f, times, config.op->lambda);
    write_surrogate_csv(outdir / "surrogate.csv", trace);

    json report = base_report(config, seed_override);
    report["operator"] = {{"dim", op.dim()},
                          {"coercivity_constant", op.coercivity_constant()},
                          {"symmetric", op.is_symmetric()},
                          {"lambda", trace.lambda}};

    try {
        const IntegrabilityReport integ = integrability_diagnostic(trace);
        report["integrability"] = {
            {"integral", integ.integral},
            {"tail_slope", integ.tail_slope ? json(*integ.tail_slope) : json(nullptr)},
            {"tail_fraction", integ.tail_fraction},
            {"zero_g", integ.zero_g},
            {"classification",
             integ.classification == IntegrabilityClass::integrable ? "integrable" : "inconclusive"}};
    } catch (const std::invalid_argument& err) {
        report["integrability"] = {{"error", err.what()}};
    }

    const ProfileReport profile =
        operator_profile(op, f, trace.lambda, config.op->horizon.value_or(grid.t1));
    report["profile"] = {{"converged", profile.converged},
                         {"residual", profile.eigen_residual},
                         {"rayleigh", std::isfinite(profile.scale_invariant_eigenvalue)
                                          ? json(profile.scale_invariant_eigenvalue)
                                          : json(nullptr)},
                         {"zero_profile", profile.zero_profile},
                         {"is_ground_state", profile.is_ground_state}};

    if (op.is_symmetric()) {
        const QuadraticForm equivalent(op.matrix(), "operator_as_quadratic");
        const GradientConsistencyReport consistency = gradient_case_consistency(equivalent, f, 1.0);
        report["gradient_consistency"] = {{"ok", consistency.ok},
                                          {"max_hprime_error_rel", consistency.max_hprime_error_rel},
                                          {"max_norm_mismatch", consistency.max_norm_mismatch}};
    }
    write_json(outdir / "opflow_report.json", report);

    std::printf("opflow: lambda=%s profile=%s residual=%s integrability=%s\n",
                format_double(trace.lambda).c_str(), profile.converged ? "converged" : "not-converged",
                format_double(profile.eigen_residual).c_str(),
                report["integrability"].contains("classification")
                    ? report["integrability"]["classification"].get<std::string>().c_str()
                    : "unavailable");
    return kExitOk;
}

int cmd_verify(const std::string& suite, const std::optional<std::filesystem::path>& outdir) {
    const SuiteResult result = run_suite(suite);
    for (const CheckResult& check : result.checks) {
        if (!check.ok) {
            std::printf("FAIL %s (value %s, threshold %s)\n", check.name.c_str(),
                        format_double(check.value).c_str(), format_double(check.threshold).c_str());
        }
    }
    std::printf("verify %s: %zu checks, %d failures\n", result.suite.c_str(), result.checks.size(),
                result.failures());
    if (outdir) {
        write_json(*outdir / ("verify_" + result.suite + ".json"), suite_to_json(result));
    }
    return result.ok() ? kExitOk : kExitViolation;
}

}  // namespace homflow::cli
