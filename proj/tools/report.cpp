#include "report.hpp"

#include <cstdio>
#include <fstream>

namespace homflow::cli {

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return std::string(buffer);
}

namespace {

void write_atomically(const std::filesystem::path& path, const std::string& body) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << body;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

void write_trace_csv(const std::filesystem::path& path, const FlowTrace& trace) {
    std::string body = "t,norm,energy,rayleigh,tau\n";
    for (size_t k = 0; k < trace.size(); ++k) {
        body += format_double(trace.times[k]);
        body += ',';
        body += format_double(trace.norms[k]);
        body += ',';
        body += format_double(trace.energies[k]);
        body += ',';
        body += format_double(trace.rayleighs[k]);
        body += ',';
        body += format_double(trace.taus[k]);
        body += '\n';
    }
    write_atomically(path, body);
}

void write_surrogate_csv(const std::filesystem::path& path, const SurrogateTrace& trace) {
    std::string body = "t,norm,energy,rayleigh,tau,h,g,residual\n";
    for (size_t k = 0; k < trace.size(); ++k) {
        const double norm_sq = trace.norms[k] * trace.norms[k];
        const double tau = k + 1 < trace.size() ? trace.times[k + 1] - trace.times[k] : 0.0;
        body += format_double(trace.times[k]);
        body += ',';
        body += format_double(trace.norms[k]);
        body += ',';
        body += format_double(0.5 * trace.h[k]);  // energy of the symmetric part
        body += ',';
        body += format_double(norm_sq > 0.0 ? trace.h[k] / norm_sq : 0.0);
        body += ',';
        body += format_double(tau);
        body += ',';
        body += format_double(trace.h[k]);
        body += ',';
        body += format_double(trace.g[k]);
        body += ',';
        body += format_double(trace.residuals[k]);
        body += '\n';
    }
    write_atomically(path, body);
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
    write_atomically(path, doc.dump(2) + "\n");
}

nlohmann::json suite_to_json(const SuiteResult& result) {
    nlohmann::json doc;
    doc["suite"] = result.suite;
    doc["checks"] = nlohmann::json::array();
    for (const CheckResult& check : result.checks) {
        doc["checks"].push_back({{"name", check.name},
                                 {"ok", check.ok},
                                 {"value", check.value},
                                 {"threshold", check.threshold}});
    }
    doc["failures"] = result.failures();
    doc["ok"] = result.ok();
    return doc;
}

}  // namespace homflow::cli
