#ifndef RIGIDKIT_SOLVE_HPP
#define RIGIDKIT_SOLVE_HPP

#include "rigidkit/rigidity.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace rigidkit {

struct SolveConfig {
    double tol = 1e-10;   // residual norm accepted as solved
    int max_iter = 200;   // Levenberg-Marquardt iterations per restart
    int restarts = 8;     // random re-initializations
    std::uint64_t seed = 1;

    void validate() const;
};

// Root-sum-square of all incidence constraint values; 0 iff the framework
// satisfies every pin exactly.
double residual(const Framework& fr);

// Stacked constraint values for a subset of hyperedges (all by default).
Eigen::VectorXd residual_vector(const PinnedInstance& inst, const Eigen::MatrixXd& points,
                                const std::vector<int>& edges);
// Analytic Jacobian of the same stacked system with respect to the chart
// coordinates of `free_vertices` (columns ordered vertex-major).
Eigen::MatrixXd residual_jacobian(const PinnedInstance& inst,
                                  const Eigen::MatrixXd& points,
                                  const std::vector<int>& edges,
                                  const std::vector<int>& free_vertices);

struct SolveReport {
    bool converged = false;
    double residual = 0.0;   // best residual norm reached
    int restarts_used = 0;
    Eigen::MatrixXd points;  // best point set (valid framework iff converged)
};

// Damped Newton / Levenberg-Marquardt over the free vertices, with random
// chart initializations per restart. Frozen vertices keep the coordinates
// given in `init` (which must then be provided for them).
SolveReport solve(const PinnedInstance& inst, const SolveConfig& cfg,
                  const std::optional<Eigen::MatrixXd>& init = std::nullopt,
                  const std::vector<int>& frozen = {});

// Same, restricted to a subsystem: only `edges` contribute equations and only
// `free_vertices` move; every other vertex must be pre-set in `points`.
SolveReport solve_subsystem(const PinnedInstance& inst, const std::vector<int>& edges,
                            const std::vector<int>& free_vertices,
                            Eigen::MatrixXd points, const SolveConfig& cfg);

struct SubsystemReport {
    bool converged = false;
    double residual = 0.0;
    int restarts_used = 0;
};

// In-place variant used by the incremental pipeline: cost depends only on the
// subsystem size, not on the total vertex count. Skips instance validation;
// the caller validates once up front.
SubsystemReport solve_subsystem_inplace(const PinnedInstance& inst,
                                        const std::vector<int>& edges,
                                        const std::vector<int>& free_vertices,
                                        Eigen::MatrixXd& points, const SolveConfig& cfg);

} // namespace rigidkit

#endif
