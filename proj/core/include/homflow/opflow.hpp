#pragma once

#include "homflow/spectral.hpp"

namespace homflow {

class NotMonotoneError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A square matrix acting as a linear (1-)homogeneous monotone operator,
/// split into symmetric and antisymmetric parts. Monotonicity requires the
/// symmetric part to be positive semidefinite.
class LinearOperatorFlow {
public:
    explicit LinearOperatorFlow(Matrix A);

    const Matrix& matrix() const { return A_; }
    const Matrix& symmetric_part() const { return sym_; }
    const Matrix& antisymmetric_part() const { return asym_; }
    int dim() const { return static_cast<int>(A_.rows()); }

    /// Smallest eigenvalue of the symmetric part; <Au,u> = <A_sym u,u>.
    double coercivity_constant() const { return coercivity_; }
    bool is_symmetric(double tol = 1e-12) const;

private:
    Matrix A_;
    Matrix sym_;
    Matrix asym_;
    double coercivity_;
};

/// u(t) = exp(-tA) f with the surrogate h(t) = <Au,u>, the integrability
/// quotient g(t), H(t) = h/a^p and the profile residual ||Aw - lambda w||
/// for w = u/a, a(t) = exp(-lambda t).
struct SurrogateTrace {
    Matrix A;
    Vector datum;
    double lambda = 0.0;
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<double> norms;
    std::vector<double> h;
    std::vector<double> g;
    std::vector<double> H;
    std::vector<double> residuals;
    size_t size() const { return times.size(); }
};

SurrogateTrace run_linear_flow(const LinearOperatorFlow& op, const Vector& f,
                               const std::vector<double>& times,
                               std::optional<double> lambda_target = {});

/// g(t) = (<A_asym u, Au> / <Au, u>)_+ ; throws when h(t) <= 0.
std::vector<double> compute_g(const SurrogateTrace& trace);

enum class IntegrabilityClass { integrable, inconclusive };

struct IntegrabilityReport {
    double integral = 0.0;            // trapezoid of g over the recorded window
    std::optional<double> tail_slope; // log-log slope of the upper envelope of g
    double tail_fraction = 0.0;       // share of the integral accrued past the tail start
    int tail_samples = 0;
    bool zero_g = false;
    IntegrabilityClass classification = IntegrabilityClass::inconclusive;
};

/// Classifies integrable (envelope slope < -1 with bounded partial integrals)
/// versus inconclusive. Expects g on a geometric time grid; throws when fewer
/// than min_tail_samples fall into the tail window.
IntegrabilityReport integrability_diagnostic(const SurrogateTrace& trace, int min_tail_samples = 20);

/// Rescales by a(t) = exp(-lambda t) and reports the trailing profile. Blowing
/// past 1e9 ||f|| (lambda above the spectral abscissa) throws overflow_error.
ProfileReport operator_profile(const LinearOperatorFlow& op, const Vector& f, double lambda,
                               double horizon, int samples = 320);

double coercivity_constant(const Matrix& A);

struct GradientConsistencyReport {
    double max_hprime_error_rel = 0.0;  // h' vs -2||Ku||^2, central differences
    double max_norm_mismatch = 0.0;     // operator vs proximal engine, relative to ||f||
    bool ok = true;
};

/// For symmetric operators the two engines integrate the same flow: checks
/// h'(t) = -2||Ku(t)||^2 and that ||u(t)|| agrees between the matrix
/// exponential and the proximal-point integrator.
GradientConsistencyReport gradient_case_consistency(const QuadraticForm& K, const Vector& f,
                                                    double horizon);

std::vector<double> geometric_times(double t0, double t1, int count);

/// Scaling-and-squaring matrix exponential.
Matrix matrix_exponential(const Matrix& M);

}  // namespace homflow
