#include "homflow/functionals.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace homflow {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double signed_power(double d, double exponent) {
    // |d|^exponent * sign(d), continuous for exponent > 0
    if (d == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(d), exponent), d);
}

}  // namespace

// ---------------------------------------------------------------------------
// HomogeneousFunctional
// ---------------------------------------------------------------------------

ProxPoint HomogeneousFunctional::subgradient_from_prox(const Vector& v, double tau, double tol) const {
    if (!(tau > 0.0)) throw std::invalid_argument("subgradient_from_prox: tau must be positive");
    ProxPoint result;
    result.point = prox(v, tau, tol);
    result.subgrad = (v - result.point) / tau;
    return result;
}

double HomogeneousFunctional::euler_identity_residual(const Vector& u, const Vector& zeta) const {
    return std::abs(space().inner(zeta, u) - degree() * evaluate(u));
}

HomogeneityReport HomogeneousFunctional::check_homogeneity(int sample_count, unsigned seed) const {
    if (sample_count < 1) throw std::invalid_argument("check_homogeneity: sample_count must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    std::uniform_real_distribution<double> log_scale(std::log(0.1), std::log(10.0));
    std::bernoulli_distribution negate(0.5);

    HomogeneityReport report;
    const int n = space().dim();
    const double p = degree();
    for (int s = 0; s < sample_count; ++s) {
        Vector u(n);
        for (int i = 0; i < n; ++i) u[i] = coord(rng);
        double c = std::exp(log_scale(rng));
        if (negate(rng)) c = -c;

        const double ju = evaluate(u);
        const double jcu = evaluate(c * u);
        const double expected = std::pow(std::abs(c), p) * ju;
        const double scale = std::max(std::abs(jcu), std::abs(expected));
        if (scale < 1e-14) {
            ++report.skipped_zero_energy;
            continue;
        }
        report.max_relative_deviation =
            std::max(report.max_relative_deviation, std::abs(jcu - expected) / scale);
        ++report.samples;
    }
    return report;
}

Vector HomogeneousFunctional::pin_nullspace_component(const Vector& v, Vector candidate) const {
    const NullSpaceBasis& basis = nullspace();
    if (basis.empty()) return candidate;
    candidate += basis.component(space(), v) - basis.component(space(), candidate);
    return candidate;
}

// ---------------------------------------------------------------------------
// QuadraticForm
// ---------------------------------------------------------------------------

QuadraticForm::QuadraticForm(Matrix K, std::string name)
    : QuadraticForm(Matrix(K), InnerProductSpace(std::max<int>(1, static_cast<int>(K.rows()))), std::move(name)) {}

QuadraticForm::QuadraticForm(Matrix K, InnerProductSpace space, std::string name)
    : matrix_(std::move(K)), space_(std::move(space)), name_(std::move(name)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
        throw std::invalid_argument("QuadraticForm: matrix must be square and non-empty");
    }
    if (space_.dim() != matrix_.rows()) {
        throw DimensionError("QuadraticForm: space dimension does not match the matrix");
    }
    const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
    if (((matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff()) > 1e-12 * scale) {
        throw std::invalid_argument("QuadraticForm: matrix must be symmetric");
    }
    matrix_ = 0.5 * (matrix_ + matrix_.transpose().eval());

    // Kernel of K = null space of J; eigenvectors are taken orthonormal in the
    // (possibly weighted) space so projections can use them directly.
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> eig(matrix_, Matrix(space_.weights().asDiagonal()));
    if (eig.info() != Eigen::Success) {
        throw std::runtime_error("QuadraticForm: eigendecomposition failed");
    }
    const Vector evs = eig.eigenvalues();
    if (evs.minCoeff() < -1e-12 * scale) {
        throw std::invalid_argument("QuadraticForm: matrix must be positive semidefinite, smallest eigenvalue " +
                                    std::to_string(evs.minCoeff()));
    }
    std::vector<Vector> kernel;
    const double kernel_tol = 1e-10 * scale;
    for (int i = 0; i < evs.size(); ++i) {
        if (std::abs(evs[i]) <= kernel_tol) kernel.push_back(eig.eigenvectors().col(i));
    }
    nullspace_ = NullSpaceBasis::from_orthonormal(std::move(kernel));
}

double QuadraticForm::evaluate(const Vector& u) const {
    space_.require_dim(u);
    return 0.5 * u.dot(matrix_ * u);
}

Vector QuadraticForm::gradient(const Vector& u) const {
    space_.require_dim(u);
    Vector g = matrix_ * u;
    if (!space_.is_euclidean()) g.array() /= space_.weights().array();
    return g;
}

Vector QuadraticForm::prox(const Vector& v, double tau, double /*tol*/) const {
    space_.require_dim(v);
    if (!(tau > 0.0)) throw std::invalid_argument("prox: tau must be positive");

    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (!cached_tau_ || *cached_tau_ != tau) {
        Matrix system = tau * matrix_;
        system.diagonal() += space_.weights();
        cached_solver_.compute(system);
        cached_tau_ = tau;
    }
    const Vector rhs = space_.weights().asDiagonal() * v;
    Vector x = cached_solver_.solve(rhs);
    // one step of iterative refinement keeps the certificate tight for small tau
    Matrix system = tau * matrix_;
    system.diagonal() += space_.weights();
    x += cached_solver_.solve(rhs - system * x);
    return pin_nullspace_component(v, std::move(x));
}

// ---------------------------------------------------------------------------
// GraphDirichletEnergy
// ---------------------------------------------------------------------------

GraphDirichletEnergy::GraphDirichletEnergy(int vertex_count, std::vector<Edge> edges, double p, std::string name)
    : GraphDirichletEnergy(vertex_count, std::move(edges), p, InnerProductSpace(vertex_count), std::move(name)) {}

GraphDirichletEnergy::GraphDirichletEnergy(int vertex_count, std::vector<Edge> edges, double p,
                                           InnerProductSpace space, std::string name)
    : n_(vertex_count), edges_(std::move(edges)), p_(p), space_(std::move(space)), name_(std::move(name)) {
    if (n_ <= 0) throw std::invalid_argument("GraphDirichletEnergy: vertex_count must be positive");
    if (space_.dim() != n_) throw std::invalid_argument("GraphDirichletEnergy: space dimension mismatch");
    if (!(p_ >= 1.0)) throw std::invalid_argument("GraphDirichletEnergy: exponent p must satisfy p >= 1");
    for (const Edge& e : edges_) {
        if (e.i < 0 || e.i >= n_ || e.j < 0 || e.j >= n_ || e.i == e.j) {
            throw std::invalid_argument("GraphDirichletEnergy: invalid edge endpoints");
        }
        if (!(e.weight > 0.0)) throw std::invalid_argument("GraphDirichletEnergy: edge weights must be positive");
    }

    // Connected components by union-find; their indicators span the null space.
    std::vector<int> parent(static_cast<size_t>(n_));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
        while (parent[static_cast<size_t>(a)] != a) {
            parent[static_cast<size_t>(a)] = parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
            a = parent[static_cast<size_t>(a)];
        }
        return a;
    };
    for (const Edge& e : edges_) parent[static_cast<size_t>(find(e.i))] = find(e.j);

    std::vector<std::vector<int>> members;
    std::vector<int> root_index(static_cast<size_t>(n_), -1);
    for (int i = 0; i < n_; ++i) {
        const int r = find(i);
        if (root_index[static_cast<size_t>(r)] < 0) {
            root_index[static_cast<size_t>(r)] = static_cast<int>(members.size());
            members.emplace_back();
        }
        members[static_cast<size_t>(root_index[static_cast<size_t>(r)])].push_back(i);
    }
    std::vector<Vector> indicators;
    for (const auto& comp : members) {
        Vector ind = Vector::Zero(n_);
        for (int i : comp) ind[i] = 1.0;
        indicators.push_back(ind / space_.norm(ind));
    }
    nullspace_ = NullSpaceBasis::from_orthonormal(std::move(indicators));

    // Forward-backward step for the p = 1 dual; see the TV prox below.
    std::vector<int> degree(static_cast<size_t>(n_), 0);
    double max_w = 0.0;
    for (const Edge& e : edges_) {
        ++degree[static_cast<size_t>(e.i)];
        ++degree[static_cast<size_t>(e.j)];
        max_w = std::max(max_w, e.weight);
    }
    const int max_degree = edges_.empty() ? 1 : *std::max_element(degree.begin(), degree.end());
    const double min_vertex_w = space_.weights().minCoeff();
    dual_step_ = min_vertex_w / (2.0 * max_degree * std::max(1.0, max_w));
}

Vector GraphDirichletEnergy::edge_differences(const Vector& u) const {
    space_.require_dim(u);
    Vector d(static_cast<Eigen::Index>(edges_.size()));
    for (size_t e = 0; e < edges_.size(); ++e) {
        d[static_cast<Eigen::Index>(e)] = u[edges_[e].i] - u[edges_[e].j];
    }
    return d;
}

double GraphDirichletEnergy::evaluate(const Vector& u) const {
    space_.require_dim(u);
    double sum = 0.0;
    for (const Edge& e : edges_) {
        const double d = std::abs(u[e.i] - u[e.j]);
        sum += e.weight * (p_ == 1.0 ? d : std::pow(d, p_));
    }
    return p_ == 1.0 ? sum : sum / p_;
}

Vector GraphDirichletEnergy::gradient(const Vector& u) const {
    if (p_ <= 1.0) throw std::logic_error("GraphDirichletEnergy::gradient requires p > 1");
    space_.require_dim(u);
    Vector g = Vector::Zero(n_);
    for (const Edge& e : edges_) {
        const double flux = e.weight * signed_power(u[e.i] - u[e.j], p_ - 1.0);
        g[e.i] += flux;
        g[e.j] -= flux;
    }
    if (!space_.is_euclidean()) g.array() /= space_.weights().array();
    return g;
}

Vector GraphDirichletEnergy::prox(const Vector& v, double tau, double tol) const {
    space_.require_dim(v);
    if (!(tau > 0.0)) throw std::invalid_argument("prox: tau must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("prox: tol must be positive");
    if (edges_.empty()) return v;
    Vector u;
    if (p_ == 1.0) {
        u = prox_tv_dual(v, tau, tol);
    } else if (p_ < 2.0) {
        // the primal objective has unbounded curvature at edge kinks; the
        // dual term |z|^{p/(p-1)} is smooth there
        u = prox_dual_newton(v, tau, tol);
    } else {
        u = prox_newton(v, tau, tol);
    }
    return pin_nullspace_component(v, std::move(u));
}

namespace {

// B W^{-1} B^T for the edge-difference dual problems.
Matrix edge_dual_operator(const std::vector<GraphDirichletEnergy::Edge>& edges, const Vector& w) {
    const Eigen::Index m = static_cast<Eigen::Index>(edges.size());
    Matrix M = Matrix::Zero(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) {
            double s = 0.0;
            const auto& ea = edges[static_cast<size_t>(a)];
            const auto& eb = edges[static_cast<size_t>(b)];
            const auto contrib = [&](int na, double sa, int nb, double sb) {
                if (na == nb) s += sa * sb / w[na];
            };
            contrib(ea.i, 1.0, eb.i, 1.0);
            contrib(ea.i, 1.0, eb.j, -1.0);
            contrib(ea.j, -1.0, eb.i, 1.0);
            contrib(ea.j, -1.0, eb.j, -1.0);
            M(a, b) = s;
        }
    }
    return M;
}

}  // namespace

// Damped Newton on the smooth objective, p >= 2.
Vector GraphDirichletEnergy::prox_newton(const Vector& v, double tau, double tol) const {
    const Vector& w = space_.weights();
    const auto objective = [&](const Vector& x) {
        return 0.5 * (w.array() * (x - v).array().square()).sum() + tau * evaluate(x);
    };
    const auto euclid_grad = [&](const Vector& x) {
        Vector g = (w.array() * (x - v).array()).matrix();
        for (const Edge& e : edges_) {
            const double flux = tau * e.weight * signed_power(x[e.i] - x[e.j], p_ - 1.0);
            g[e.i] += flux;
            g[e.j] -= flux;
        }
        return g;
    };
    const auto grad_space_norm = [&](const Vector& g) {
        return std::sqrt((g.array().square() / w.array()).sum());
    };

    const double vnorm = space_.norm(v);
    // state-relative target: an absolute allowance would let tiny states pass
    // without moving at all
    const double gtol = 0.25 * tol * tau * std::max(vnorm, 1e-300);
    const double gfloor = 256.0 * kEps * std::max(vnorm, 1e-300);

    Vector x = v;
    double fx = objective(x);
    for (int iter = 0; iter < 200; ++iter) {
        const Vector g = euclid_grad(x);
        const double err = grad_space_norm(g);
        if (err <= std::max(gtol, gfloor)) return x;

        Matrix hess = Matrix::Zero(n_, n_);
        hess.diagonal() = w;
        for (const Edge& e : edges_) {
            const double d = std::abs(x[e.i] - x[e.j]);
            const double curv = tau * e.weight * (p_ - 1.0) * (d == 0.0 ? 0.0 : std::pow(d, p_ - 2.0));
            hess(e.i, e.i) += curv;
            hess(e.j, e.j) += curv;
            hess(e.i, e.j) -= curv;
            hess(e.j, e.i) -= curv;
        }
        Eigen::LLT<Matrix> llt(hess);
        Vector step;
        if (llt.info() == Eigen::Success) {
            step = llt.solve(-g);
        } else {
            step = -(g.array() / w.array()).matrix();  // gradient fallback
        }

        const double slope = g.dot(step);
        double t = 1.0;
        bool moved = false;
        while (t >= 1e-14) {
            const Vector cand = x + t * step;
            const double fc = objective(cand);
            // roundoff allowance keeps full Newton steps acceptable near the optimum
            if (fc <= fx + 0.25 * t * slope + 16.0 * kEps * (std::abs(fx) + std::abs(fc))) {
                x = cand;
                fx = fc;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) break;
    }
    const double err = grad_space_norm(euclid_grad(x));
    if (err <= std::max(gtol, 64.0 * gfloor)) return x;
    throw ProxError("graph Dirichlet prox: Newton budget of 200 iterations exhausted, gradient norm " +
                        std::to_string(err),
                    err);
}

// Damped Newton on the edge-difference dual, 1 < p < 2. The dual of the edge
// term (tau w/p)|d|^p is (1/q)(tau w)^{1-q}|z|^q with q = p/(p-1) > 2, which is
// twice differentiable, so the kinks of the primal disappear. The primal is
// recovered from x = v - W^{-1} B^T z and certified by its own gradient.
Vector GraphDirichletEnergy::prox_dual_newton(const Vector& v, double tau, double tol) const {
    const Eigen::Index m = static_cast<Eigen::Index>(edges_.size());
    const Vector& w = space_.weights();
    const double q = p_ / (p_ - 1.0);

    Vector bv(m);
    Vector a(m);
    for (Eigen::Index e = 0; e < m; ++e) {
        bv[e] = v[edges_[static_cast<size_t>(e)].i] - v[edges_[static_cast<size_t>(e)].j];
        a[e] = tau * edges_[static_cast<size_t>(e)].weight;
    }
    const Matrix M = edge_dual_operator(edges_, w);

    const auto dual_value = [&](const Vector& z) {
        double value = 0.5 * z.dot(M * z) - z.dot(bv);
        for (Eigen::Index e = 0; e < m; ++e) {
            value += std::pow(a[e], 1.0 - q) * std::pow(std::abs(z[e]), q) / q;
        }
        return value;
    };
    const auto conjugate_grad = [&](const Vector& z) {  // d_e(z) = sign(z)(|z|/a)^{q-1}
        Vector d(m);
        for (Eigen::Index e = 0; e < m; ++e) d[e] = signed_power(z[e] / a[e], q - 1.0);
        return d;
    };
    const auto primal = [&](const Vector& z) {
        Vector x = v;
        for (Eigen::Index e = 0; e < m; ++e) {
            const auto& edge = edges_[static_cast<size_t>(e)];
            x[edge.i] -= z[e] / w[edge.i];
            x[edge.j] += z[e] / w[edge.j];
        }
        return x;
    };
    const auto primal_grad_norm = [&](const Vector& x, const Vector& z) {
        Vector g = Vector::Zero(n_);
        for (Eigen::Index e = 0; e < m; ++e) {
            const auto& edge = edges_[static_cast<size_t>(e)];
            const double flux = a[e] * signed_power(x[edge.i] - x[edge.j], p_ - 1.0) - z[e];
            g[edge.i] += flux;
            g[edge.j] -= flux;
        }
        return std::sqrt((g.array().square() / w.array()).sum());
    };

    const double vnorm = space_.norm(v);
    const double gtol = 0.25 * tol * tau * std::max(vnorm, 1e-300);
    const double gfloor = 256.0 * kEps * std::max(vnorm, 1e-300);
    // evaluating psi_p(d) = |d|^{p-2} d near a kink amplifies rounding of d to
    // |eps of d|^{p-1}, so the certificate cannot be measured below this level;
    // it is only used to accept a genuinely stalled iteration
    double max_w = 0.0;
    for (const Edge& e : edges_) max_w = std::max(max_w, e.weight);
    const double kink_floor =
        64.0 * tau * max_w * std::pow(16.0 * kEps * std::max(vnorm, 1e-300), p_ - 1.0);

    // gradient-map warm start: z = tau w psi_p(Bv)
    Vector z(m);
    for (Eigen::Index e = 0; e < m; ++e) z[e] = a[e] * signed_power(bv[e], p_ - 1.0);
    double value = dual_value(z);
    double mu = 0.0;

    for (int iter = 0; iter < 200; ++iter) {
        {
            const Vector x = primal(z);
            if (primal_grad_norm(x, z) <= std::max(gtol, gfloor)) return x;
        }
        const Vector g = M * z - bv + conjugate_grad(z);
        Matrix hess = M;
        for (Eigen::Index e = 0; e < m; ++e) {
            const double ze = std::abs(z[e]);
            hess(e, e) += (q - 1.0) / a[e] * (ze == 0.0 ? 0.0 : std::pow(ze / a[e], q - 2.0));
        }
        if (mu > 0.0) hess.diagonal().array() += mu;

        Eigen::LLT<Matrix> llt(hess);
        if (llt.info() != Eigen::Success) {
            mu = std::max(1e-12, mu * 10.0);
            continue;
        }
        const Vector step = llt.solve(-g);
        const double slope = g.dot(step);
        double t = 1.0;
        bool moved = false;
        while (t >= 1e-14) {
            const Vector cand = z + t * step;
            const double fc = dual_value(cand);
            if (fc <= value + 0.25 * t * slope + 16.0 * kEps * (std::abs(value) + std::abs(fc))) {
                z = cand;
                value = fc;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (moved) {
            mu *= 0.25;
            if (mu < 1e-14) mu = 0.0;
        } else {
            if (mu > 1e8) break;
            mu = std::max(1e-10, mu * 16.0);
        }
    }
    const Vector x = primal(z);
    const double err = primal_grad_norm(x, z);
    if (err <= std::max({gtol, 64.0 * gfloor, kink_floor})) return x;
    throw ProxError("graph Dirichlet prox: dual Newton budget exhausted, gradient norm " +
                        std::to_string(err),
                    err);
}

// Forward-backward (projected gradient) on the edge-difference dual, p = 1:
//   min_z 1/2 z^T B W^{-1} B^T z - z^T B v   s.t. |z_e| <= tau w_e,
// primal recovery x = v - W^{-1} B^T z, deterministic start z = 0.
Vector GraphDirichletEnergy::prox_tv_dual(const Vector& v, double tau, double tol) const {
    const size_t m = edges_.size();
    const Vector& w = space_.weights();

    Vector bv(static_cast<Eigen::Index>(m));
    for (size_t e = 0; e < m; ++e) bv[static_cast<Eigen::Index>(e)] = v[edges_[e].i] - v[edges_[e].j];

    const Matrix M = edge_dual_operator(edges_, w);
    bool diagonal = true;
    for (size_t a = 0; a < m && diagonal; ++a) {
        for (size_t b = 0; b < m; ++b) {
            if (a != b && M(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) != 0.0) {
                diagonal = false;
                break;
            }
        }
    }

    Vector bound(static_cast<Eigen::Index>(m));
    for (size_t e = 0; e < m; ++e) bound[static_cast<Eigen::Index>(e)] = tau * edges_[e].weight;
    const auto clamp_box = [&](Vector z) {
        for (Eigen::Index e = 0; e < z.size(); ++e) {
            z[e] = std::clamp(z[e], -bound[e], bound[e]);
        }
        return z;
    };
    const auto primal = [&](const Vector& z) {
        Vector x = v;
        for (size_t e = 0; e < m; ++e) {
            const double ze = z[static_cast<Eigen::Index>(e)];
            x[edges_[e].i] -= ze / w[edges_[e].i];
            x[edges_[e].j] += ze / w[edges_[e].j];
        }
        return x;
    };
    const auto duality_gap = [&](const Vector& z, const Vector& x) {
        double gap = 0.0;
        for (size_t e = 0; e < m; ++e) {
            const double d = x[edges_[e].i] - x[edges_[e].j];
            gap += tau * edges_[e].weight * std::abs(d) - z[static_cast<Eigen::Index>(e)] * d;
        }
        return gap;
    };

    if (diagonal) {
        // Edge-disjoint graph: the dual decouples into exact 1-d shrinkages.
        Vector z(static_cast<Eigen::Index>(m));
        for (size_t e = 0; e < m; ++e) {
            const Eigen::Index k = static_cast<Eigen::Index>(e);
            z[k] = std::clamp(bv[k] / M(k, k), -bound[k], bound[k]);
        }
        return primal(z);
    }

    const double vnorm = space_.norm(v);
    const double gap_scale = tau * evaluate(v) + 0.5 * vnorm * vnorm + kEps;
    const double zeta_target = 0.25 * tol * tau * std::max(vnorm, 1e-300);
    const double gap_tol = std::max(0.5 * zeta_target * zeta_target, 32.0 * kEps * gap_scale);

    Vector z = Vector::Zero(static_cast<Eigen::Index>(m));
    double best_gap = std::numeric_limits<double>::infinity();
    long since_improvement = 0;
    const long max_iter = 500000;
    for (long iter = 0; iter < max_iter; ++iter) {
        const Vector grad = M * z - bv;
        Vector z_next = clamp_box(z - dual_step_ * grad);
        const double move = (z_next - z).norm();
        z = std::move(z_next);

        if (iter % 8 == 0 || move == 0.0) {
            const Vector x = primal(z);
            const double gap = duality_gap(z, x);
            if (gap <= gap_tol || move == 0.0) return x;
            if (gap < best_gap * (1.0 - 1e-3)) {
                best_gap = gap;
                since_improvement = 0;
            } else if (++since_improvement > 400) {
                return x;  // floating-point stall; accuracy is roundoff-limited
            }
        }
    }
    const Vector x = primal(z);
    const double gap = duality_gap(z, x);
    if (gap <= 1e4 * gap_tol) return x;
    throw ProxError("graph TV prox: dual projection budget exhausted, duality gap " + std::to_string(gap), gap);
}

// ---------------------------------------------------------------------------
// PowerTransform
// ---------------------------------------------------------------------------

PowerTransform::PowerTransform(std::shared_ptr<const HomogeneousFunctional> base, double r)
    : base_(std::move(base)), r_(r) {
    if (!base_) throw std::invalid_argument("PowerTransform: base functional required");
    if (!(r_ > 1.0)) throw std::invalid_argument("PowerTransform: power r must exceed 1");
}

std::string PowerTransform::name() const {
    return "power(" + base_->name() + ", r=" + std::to_string(r_) + ")";
}

double PowerTransform::evaluate(const Vector& u) const {
    return std::pow(base_->evaluate(u), r_) / r_;
}

// prox_{tau J^r/r}(v) = prox_{sigma base}(v) where sigma solves the scalar
// fixed point sigma = tau * base(prox_{sigma base}(v))^{r-1}; the right side
// is non-increasing in sigma, so bisection on [0, tau*base(v)^{r-1}] applies.
Vector PowerTransform::prox(const Vector& v, double tau, double tol) const {
    space().require_dim(v);
    if (!(tau > 0.0)) throw std::invalid_argument("prox: tau must be positive");
    const double jv = base_->evaluate(v);
    if (jv <= 0.0) return v;

    const double inner_tol = std::max(1e-14, 0.05 * tol);
    const auto sigma_mismatch = [&](double sigma, Vector* out) {
        if (sigma <= 0.0) {
            if (out) *out = v;
            return -tau * std::pow(jv, r_ - 1.0);
        }
        Vector u = base_->prox(v, sigma, inner_tol);
        const double ju = base_->evaluate(u);
        if (out) *out = std::move(u);
        return sigma - tau * std::pow(ju, r_ - 1.0);
    };

    double lo = 0.0;
    double hi = tau * std::pow(jv, r_ - 1.0);
    double sigma = hi;
    Vector u;
    for (int iter = 0; iter < 100; ++iter) {
        sigma = 0.5 * (lo + hi);
        const double phi = sigma_mismatch(sigma, &u);
        if (phi > 0.0) {
            hi = sigma;
        } else {
            lo = sigma;
        }
        if (hi - lo <= 1e-15 * hi) break;
    }
    sigma = 0.5 * (lo + hi);
    sigma_mismatch(sigma, &u);
    return pin_nullspace_component(v, std::move(u));
}

}  // namespace homflow
