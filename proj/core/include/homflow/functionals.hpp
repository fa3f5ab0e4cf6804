#pragma once

#include "homflow/space.hpp"

#include <Eigen/Cholesky>

#include <memory>
#include <mutex>
#include <optional>

namespace homflow {

class ProxError : public std::runtime_error {
public:
    ProxError(const std::string& what, double last_residual)
        : std::runtime_error(what), last_residual(last_residual) {}
    double last_residual;
};

struct ProxPoint {
    Vector point;    // u+ = argmin 1/2 ||x-v||^2 + tau J(x)
    Vector subgrad;  // (v - u+)/tau, an element of dJ(u+)
};

struct HomogeneityReport {
    double max_relative_deviation = 0.0;
    int samples = 0;
    int skipped_zero_energy = 0;
};

/// An absolutely p-homogeneous convex energy on a finite-dimensional
/// inner-product space: J(cu) = |c|^p J(u), J(0) = 0.
class HomogeneousFunctional {
public:
    virtual ~HomogeneousFunctional() = default;

    virtual double evaluate(const Vector& u) const = 0;

    /// argmin_x 1/2 ||x - v||^2 + tau J(x) in the space's norm. The returned
    /// point carries a subgradient certificate zeta = (v - u+)/tau whose
    /// witness residual stays below tol*(1 + ||v||).
    virtual Vector prox(const Vector& v, double tau, double tol) const = 0;

    virtual double degree() const = 0;
    virtual const InnerProductSpace& space() const = 0;
    virtual const NullSpaceBasis& nullspace() const = 0;
    virtual std::string name() const = 0;

    ProxPoint subgradient_from_prox(const Vector& v, double tau, double tol) const;

    /// |<zeta,u> - p J(u)|, zero for every subgradient by the homogeneous
    /// Euler identity.
    double euler_identity_residual(const Vector& u, const Vector& zeta) const;

    HomogeneityReport check_homogeneity(int sample_count, unsigned seed = 0x5eedu) const;

protected:
    /// Moves the null-space component of u+ to exactly match that of v, so
    /// that the certified subgradient is exactly orthogonal to the null space
    /// and flows conserve mass to rounding.
    Vector pin_nullspace_component(const Vector& v, Vector candidate) const;
};

/// J(u) = 1/2 u^T K u with K symmetric positive semidefinite; degree 2.
class QuadraticForm final : public HomogeneousFunctional {
public:
    explicit QuadraticForm(Matrix K, std::string name = "quadratic");
    QuadraticForm(Matrix K, InnerProductSpace space, std::string name = "quadratic");

    double evaluate(const Vector& u) const override;
    Vector prox(const Vector& v, double tau, double tol) const override;
    double degree() const override { return 2.0; }
    const InnerProductSpace& space() const override { return space_; }
    const NullSpaceBasis& nullspace() const override { return nullspace_; }
    std::string name() const override { return name_; }

    const Matrix& matrix() const { return matrix_; }
    /// Gradient as an element of the (weighted) space: W^{-1} K u.
    Vector gradient(const Vector& u) const;

private:
    Matrix matrix_;
    InnerProductSpace space_;
    NullSpaceBasis nullspace_;
    std::string name_;

    mutable std::mutex cache_mutex_;
    mutable std::optional<double> cached_tau_;
    mutable Eigen::LDLT<Matrix> cached_solver_;
};

/// Graph Dirichlet p-energy: J(u) = (1/p) sum_e w_e |u_i - u_j|^p for p > 1
/// and sum_e w_e |u_i - u_j| for p = 1 (graph total variation). The null
/// space is spanned by connected-component indicators.
class GraphDirichletEnergy final : public HomogeneousFunctional {
public:
    struct Edge {
        int i;
        int j;
        double weight;
    };

    GraphDirichletEnergy(int vertex_count, std::vector<Edge> edges, double p,
                         std::string name = "graph_dirichlet");
    GraphDirichletEnergy(int vertex_count, std::vector<Edge> edges, double p,
                         InnerProductSpace space, std::string name = "graph_dirichlet");

    double evaluate(const Vector& u) const override;
    Vector prox(const Vector& v, double tau, double tol) const override;
    double degree() const override { return p_; }
    const InnerProductSpace& space() const override { return space_; }
    const NullSpaceBasis& nullspace() const override { return nullspace_; }
    std::string name() const override { return name_; }

    const std::vector<Edge>& edges() const { return edges_; }
    int vertex_count() const { return n_; }
    int component_count() const { return nullspace_.size(); }

    /// Signed edge differences (Bu)_e = u_i - u_j.
    Vector edge_differences(const Vector& u) const;
    /// Euclidean gradient of J for p > 1 (as a space element: W^{-1} B^T ...).
    Vector gradient(const Vector& u) const;

private:
    int n_;
    std::vector<Edge> edges_;
    double p_;
    InnerProductSpace space_;
    NullSpaceBasis nullspace_;
    std::string name_;
    double dual_step_;  // forward-backward step for the p = 1 dual

    Vector prox_newton(const Vector& v, double tau, double tol) const;
    Vector prox_dual_newton(const Vector& v, double tau, double tol) const;
    Vector prox_tv_dual(const Vector& v, double tau, double tol) const;
};

/// J(u) = base(u)^r / r for r > 1; absolutely (r*p)-homogeneous.
class PowerTransform final : public HomogeneousFunctional {
public:
    PowerTransform(std::shared_ptr<const HomogeneousFunctional> base, double r);

    double evaluate(const Vector& u) const override;
    Vector prox(const Vector& v, double tau, double tol) const override;
    double degree() const override { return r_ * base_->degree(); }
    const InnerProductSpace& space() const override { return base_->space(); }
    const NullSpaceBasis& nullspace() const override { return base_->nullspace(); }
    std::string name() const override;

    const HomogeneousFunctional& base() const { return *base_; }
    double power() const { return r_; }

private:
    std::shared_ptr<const HomogeneousFunctional> base_;
    double r_;
};

}  // namespace homflow
