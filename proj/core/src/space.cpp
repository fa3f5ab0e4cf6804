#include "homflow/space.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace homflow {

bool all_finite(const Vector& u) {
    return u.allFinite();
}

InnerProductSpace::InnerProductSpace(int dim) {
    if (dim <= 0) {
        throw std::invalid_argument("InnerProductSpace: dim must be positive");
    }
    weights_ = Vector::Ones(dim);
    euclidean_ = true;
}

InnerProductSpace::InnerProductSpace(Vector weights) : weights_(std::move(weights)) {
    if (weights_.size() == 0) {
        throw std::invalid_argument("InnerProductSpace: dim must be positive");
    }
    if (!(weights_.minCoeff() > 0.0) || !all_finite(weights_)) {
        throw std::invalid_argument("InnerProductSpace: weights must be strictly positive and finite");
    }
    euclidean_ = (weights_.array() == 1.0).all();
}

void InnerProductSpace::require_dim(const Vector& u) const {
    if (u.size() != weights_.size()) {
        throw DimensionError("dimension mismatch: expected " + std::to_string(weights_.size()) +
                             ", got " + std::to_string(u.size()));
    }
}

double InnerProductSpace::inner(const Vector& u, const Vector& v) const {
    require_dim(u);
    require_dim(v);
    if (euclidean_) return u.dot(v);
    return (weights_.array() * u.array() * v.array()).sum();
}

double InnerProductSpace::norm(const Vector& u) const {
    require_dim(u);
    if (euclidean_) return u.norm();
    return std::sqrt((weights_.array() * u.array().square()).sum());
}

NullSpaceBasis::NullSpaceBasis(const InnerProductSpace& space, std::vector<Vector> raw) {
    const int m = static_cast<int>(raw.size());
    if (m == 0) return;
    for (const Vector& v : raw) space.require_dim(v);

    // Normalized Gram determinant as a dependence test.
    Matrix gram(m, m);
    std::vector<Vector> unit(raw.begin(), raw.end());
    for (int i = 0; i < m; ++i) {
        const double ni = space.norm(unit[static_cast<size_t>(i)]);
        if (ni == 0.0) {
            throw std::invalid_argument("NullSpaceBasis: zero input vector");
        }
        unit[static_cast<size_t>(i)] /= ni;
    }
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            gram(i, j) = space.inner(unit[static_cast<size_t>(i)], unit[static_cast<size_t>(j)]);
        }
    }
    const double det = gram.determinant();
    if (det < 1e-10) {
        throw std::invalid_argument("NullSpaceBasis: input vectors are (nearly) linearly dependent, Gram determinant " +
                                    std::to_string(det));
    }

    // Modified Gram-Schmidt with pivoting on the largest remaining residual.
    std::vector<Vector> work(unit);
    std::vector<bool> used(static_cast<size_t>(m), false);
    for (int step = 0; step < m; ++step) {
        int best = -1;
        double best_norm = -1.0;
        for (int i = 0; i < m; ++i) {
            if (used[static_cast<size_t>(i)]) continue;
            const double nv = space.norm(work[static_cast<size_t>(i)]);
            if (nv > best_norm) {
                best_norm = nv;
                best = i;
            }
        }
        used[static_cast<size_t>(best)] = true;
        Vector b = work[static_cast<size_t>(best)] / best_norm;
        // Re-orthogonalize once for numerical hygiene at 1e-12 scale.
        for (const Vector& prev : vectors_) {
            b -= space.inner(b, prev) * prev;
        }
        b /= space.norm(b);
        vectors_.push_back(b);
        for (int i = 0; i < m; ++i) {
            if (used[static_cast<size_t>(i)]) continue;
            Vector& w = work[static_cast<size_t>(i)];
            w -= space.inner(w, b) * b;
        }
    }
}

NullSpaceBasis NullSpaceBasis::from_orthonormal(std::vector<Vector> vectors) {
    NullSpaceBasis basis;
    basis.vectors_ = std::move(vectors);
    return basis;
}

Vector NullSpaceBasis::project_out(const InnerProductSpace& space, const Vector& u) const {
    space.require_dim(u);
    Vector out = u;
    for (const Vector& b : vectors_) {
        out -= space.inner(out, b) * b;
    }
    return out;
}

Vector NullSpaceBasis::component(const InnerProductSpace& space, const Vector& u) const {
    space.require_dim(u);
    Vector out = Vector::Zero(u.size());
    for (const Vector& b : vectors_) {
        out += space.inner(u, b) * b;
    }
    return out;
}

double NullSpaceBasis::orthonormality_defect(const InnerProductSpace& space) const {
    double defect = 0.0;
    const int m = size();
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const double g = space.inner(vectors_[static_cast<size_t>(i)], vectors_[static_cast<size_t>(j)]);
            defect = std::max(defect, std::abs(g - (i == j ? 1.0 : 0.0)));
        }
    }
    return defect;
}

WitnessCheck check_witness(const InnerProductSpace& space,
                           const std::function<double(const Vector&)>& evaluate,
                           const SubgradientWitness& witness,
                           const std::vector<Vector>& probes,
                           double tol) {
    const double at_point = evaluate(witness.point);
    WitnessCheck result;
    for (const Vector& x : probes) {
        const double lhs = at_point + space.inner(witness.subgrad, x - witness.point);
        result.max_violation = std::max(result.max_violation, lhs - evaluate(x));
    }
    result.ok = result.max_violation <= tol;
    return result;
}

}  // namespace homflow
