#include "homflow/zoo.hpp"

#include <cmath>
#include <random>

namespace homflow::zoo {

namespace {

std::shared_ptr<GraphDirichletEnergy> make_graph(int n, std::vector<GraphDirichletEnergy::Edge> edges,
                                                 double p, std::string name) {
    return std::make_shared<GraphDirichletEnergy>(n, std::move(edges), p, std::move(name));
}

}  // namespace

std::shared_ptr<GraphDirichletEnergy> two_node(double p, double weight) {
    return make_graph(2, {{0, 1, weight}}, p, "two_node(p=" + std::to_string(p) + ")");
}

std::shared_ptr<GraphDirichletEnergy> path_graph(int n, double p, double weight) {
    std::vector<GraphDirichletEnergy::Edge> edges;
    for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, weight});
    return make_graph(n, std::move(edges), p,
                      "path" + std::to_string(n) + "(p=" + std::to_string(p) + ")");
}

std::shared_ptr<GraphDirichletEnergy> cycle_graph(int n, double p, double weight) {
    std::vector<GraphDirichletEnergy::Edge> edges;
    for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, weight});
    return make_graph(n, std::move(edges), p,
                      "cycle" + std::to_string(n) + "(p=" + std::to_string(p) + ")");
}

std::shared_ptr<GraphDirichletEnergy> disjoint_pairs(double p, double w_fast, double w_slow) {
    return make_graph(4, {{0, 1, w_fast}, {2, 3, w_slow}}, p,
                      "disjoint_pairs(p=" + std::to_string(p) + ")");
}

std::shared_ptr<QuadraticForm> diag_quadratic(std::vector<double> diagonal) {
    const int n = static_cast<int>(diagonal.size());
    Matrix K = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) K(i, i) = diagonal[static_cast<size_t>(i)];
    return std::make_shared<QuadraticForm>(K, "diag_quadratic");
}

Matrix triangular_real_spectrum(double lambda, double alpha) {
    Matrix A(2, 2);
    A << lambda, alpha, 0.0, lambda;
    return A;
}

Matrix complex_spectrum_counterexample() {
    Matrix A(3, 3);
    A << 1, 0, 0, 0, 1, 1, 0, -1, 1;
    return A;
}

Matrix rotation_perturbed_identity(double alpha) {
    Matrix A(2, 2);
    A << 1.0, alpha, -alpha, 1.0;
    return A;
}

Vector random_datum(const HomogeneousFunctional& J, unsigned seed, bool nonnegative) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(nonnegative ? 0.1 : -1.0, 1.0);
    const InnerProductSpace& space = J.space();
    for (int attempt = 0; attempt < 64; ++attempt) {
        Vector f(space.dim());
        for (int i = 0; i < space.dim(); ++i) f[i] = coord(rng);
        Vector candidate = nonnegative ? f : J.nullspace().project_out(space, f);
        const double n = space.norm(candidate);
        const double n_perp = space.norm(J.nullspace().project_out(space, candidate));
        if (n > 1e-6 && n_perp > 1e-3) return candidate / n;
    }
    throw std::runtime_error("random_datum: failed to sample a usable datum");
}

std::vector<FlowProblem> flow_problems(unsigned seed) {
    std::vector<FlowProblem> problems;

    const auto add = [&](std::shared_ptr<const HomogeneousFunctional> J, Vector datum, FlowConfig cfg,
                         const std::string& tag) {
        problems.push_back({J->name() + "/" + tag, std::move(J), std::move(datum), cfg});
    };

    FlowConfig finite;
    finite.tau0 = 2e-3;
    finite.t_max = 50.0;
    finite.extinction_tol = 1e-7;
    finite.prox_tol = 1e-12;
    finite.max_steps = 200000;
    finite.tail_resolution = 0.01;

    FlowConfig infinite;
    infinite.tau0 = 5e-3;
    infinite.t_max = 20.0;
    infinite.extinction_tol = 1e-14;
    infinite.prox_tol = 1e-12;
    infinite.max_steps = 200000;

    unsigned s = seed;
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
        const FlowConfig& cfg = p < 2.0 ? finite : infinite;
        {
            auto J = two_node(p);
            add(J, random_datum(*J, ++s), cfg, "random");
        }
        {
            auto J = path_graph(5, p);
            add(J, random_datum(*J, ++s), cfg, "random");
        }
        {
            auto J = cycle_graph(6, p);
            add(J, random_datum(*J, ++s), cfg, "random");
        }
        {
            auto J = disjoint_pairs(p, 2.0, 1.0);
            add(J, random_datum(*J, ++s), cfg, "random");
        }
    }

    auto quad = diag_quadratic({1.0, 2.0});
    Vector e1(2), mixed(2), e2(2);
    e1 << 1.0, 0.0;
    mixed << 1.0, 1.0;
    e2 << 0.0, 1.0;
    FlowConfig quad_cfg = infinite;
    quad_cfg.tau0 = 1e-3;
    quad_cfg.t_max = 10.0;
    add(quad, e1, quad_cfg, "e1");
    add(quad, mixed, quad_cfg, "mixed");
    add(quad, e2, quad_cfg, "e2");

    return problems;
}

}  // namespace homflow::zoo
