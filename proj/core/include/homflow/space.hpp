#pragma once

#include <Eigen/Core>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace homflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

bool all_finite(const Vector& u);

/// Finite-dimensional real inner-product space with a diagonal measure:
/// <u,v> = sum_i w_i u_i v_i. Default weights are all ones (Euclidean).
class InnerProductSpace {
public:
    explicit InnerProductSpace(int dim);
    explicit InnerProductSpace(Vector weights);

    int dim() const { return static_cast<int>(weights_.size()); }
    const Vector& weights() const { return weights_; }
    bool is_euclidean() const { return euclidean_; }

    double inner(const Vector& u, const Vector& v) const;
    double norm(const Vector& u) const;

    void require_dim(const Vector& u) const;

private:
    Vector weights_;
    bool euclidean_;
};

/// Orthonormal basis (w.r.t. a space's inner product) spanning a functional's
/// null space. Constructed by Gram-Schmidt with pivoting; inputs whose
/// normalized Gram determinant falls below 1e-10 are rejected as dependent.
class NullSpaceBasis {
public:
    NullSpaceBasis() = default;
    NullSpaceBasis(const InnerProductSpace& space, std::vector<Vector> raw);

    /// Trusts the caller that `vectors` are already orthonormal in `space`.
    static NullSpaceBasis from_orthonormal(std::vector<Vector> vectors);

    int size() const { return static_cast<int>(vectors_.size()); }
    bool empty() const { return vectors_.empty(); }
    const Vector& vector(int j) const { return vectors_.at(static_cast<size_t>(j)); }
    const std::vector<Vector>& vectors() const { return vectors_; }

    /// u minus its component in the span of the basis.
    Vector project_out(const InnerProductSpace& space, const Vector& u) const;
    /// The component of u in the span of the basis.
    Vector component(const InnerProductSpace& space, const Vector& u) const;

    /// max_{i,j} |<b_i,b_j> - delta_ij|, for diagnostics.
    double orthonormality_defect(const InnerProductSpace& space) const;

private:
    std::vector<Vector> vectors_;
};

/// A point together with a claimed subgradient of some functional at it.
struct SubgradientWitness {
    Vector point;
    Vector subgrad;
    std::string functional_id;
};

struct WitnessCheck {
    double max_violation = 0.0;  // max over probes of J(p) + <z, x-p> - J(x)
    bool ok = false;
};

/// Verifies the subgradient inequality J(point) + <subgrad, x - point> <= J(x) + tol
/// for every probe x.
WitnessCheck check_witness(const InnerProductSpace& space,
                           const std::function<double(const Vector&)>& evaluate,
                           const SubgradientWitness& witness,
                           const std::vector<Vector>& probes,
                           double tol);

}  // namespace homflow
