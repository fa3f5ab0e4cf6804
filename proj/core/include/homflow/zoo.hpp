#pragma once

#include "homflow/flow.hpp"
#include "homflow/opflow.hpp"

#include <memory>

namespace homflow::zoo {

std::shared_ptr<GraphDirichletEnergy> two_node(double p, double weight = 1.0);
std::shared_ptr<GraphDirichletEnergy> path_graph(int n, double p, double weight = 1.0);
std::shared_ptr<GraphDirichletEnergy> cycle_graph(int n, double p, double weight = 1.0);
/// Two disjoint two-node graphs with separate edge weights (nodes {0,1}, {2,3}).
std::shared_ptr<GraphDirichletEnergy> disjoint_pairs(double p, double w_fast, double w_slow);
std::shared_ptr<QuadraticForm> diag_quadratic(std::vector<double> diagonal);

/// [[lambda, alpha], [0, lambda]]: coercive for lambda > |alpha|/2, one real eigenvalue.
Matrix triangular_real_spectrum(double lambda, double alpha);
/// [[1,0,0],[0,1,1],[0,-1,1]]: coercive with eigenvalues 1 and 1 +- i.
Matrix complex_spectrum_counterexample();
/// [[1,alpha],[-alpha,1]]: coercive without a real eigenvalue.
Matrix rotation_perturbed_identity(double alpha);

/// Deterministic pseudo-random datum in the space of J; projected onto
/// N(J)^perp unless nonnegative data is requested.
Vector random_datum(const HomogeneousFunctional& J, unsigned seed, bool nonnegative = false);

struct FlowProblem {
    std::string name;
    std::shared_ptr<const HomogeneousFunctional> functional;
    Vector datum;
    FlowConfig config;
};

/// The built-in battery: quadratic forms and path/cycle/disjoint graphs at
/// p in {1, 1.5, 2, 3} with deterministic data.
std::vector<FlowProblem> flow_problems(unsigned seed = 20240601u);

}  // namespace homflow::zoo
