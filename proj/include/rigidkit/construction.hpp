#ifndef RIGIDKIT_CONSTRUCTION_HPP
#define RIGIDKIT_CONSTRUCTION_HPP

#include "rigidkit/solve.hpp"

#include <cstdint>
#include <vector>

namespace rigidkit {

struct Stage1Size {
    int k = 0;         // smallest k with C(k(d-s), s) >= k(d-1)
    int num_vertices;  // k(d-s)
    int num_edges;     // k(d-1)
};

Stage1Size stage1_size(int d, int s);

// Trace of the incremental construction: the seed hypergraph H0, the template
// block B1 appended in stage 2, and one replica of B1 per further stage.
// Edges are s-uniform with weight 1 (one pin each).
struct ConstructionTrace {
    int d = 0, s = 0, k = 0;

    struct Block {
        std::vector<int> new_vertices;
        std::vector<int> edges;  // indices into the hypergraph's edge list
    };
    Block stage1;
    std::vector<Block> blocks;       // stage 2 first, then its replicas
    std::vector<int> base_vertices;  // V_B: stage-1 vertices reused by every block
    int pins_consumed = 0;           // = number of edges
    int leftover = 0;                // data points beyond the last full block
};

struct Construction {
    WeightedHypergraph hypergraph;
    ConstructionTrace trace;
};

// Builds the (d-1,0)-tight hypergraph consuming as many of the m pins as
// stage boundaries allow. Throws when m is below the stage-1 minimum.
// The seed only shuffles candidate-edge order in stage 1; every output is
// tight regardless.
Construction build_construction(int d, int s, int m, std::uint64_t seed);

struct IncrementalReport {
    bool converged = false;
    int failed_block = -1;  // -1 = stage 1, i >= 0 = blocks[i]; only if !converged
    double residual = 0.0;
    Framework framework;
};

// Solves stage 1 first, then each block with the base vertices frozen.
// `pins` holds one chart pin per hyperedge, in edge order.
IncrementalReport incremental_solve(const Construction& con,
                                    const std::vector<Eigen::VectorXd>& pins,
                                    const SolveConfig& cfg);

} // namespace rigidkit

#endif
