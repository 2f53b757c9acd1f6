#ifndef RIGIDKIT_DRPLAN_HPP
#define RIGIDKIT_DRPLAN_HPP

#include "rigidkit/sparsity.hpp"

#include <utility>
#include <vector>

namespace rigidkit {

// Decomposition-recombination plan over a tight hypergraph. Internal nodes
// are connected tight vertex-induced subgraphs; their children are either all
// vertex-maximal proper such subgraphs (when these pairwise share no vertex)
// or exactly two that do share a vertex. Nodes without a proper tight
// connected subgraph decompose into one leaf per hyperedge.
struct DRNode {
    std::vector<int> vertices;   // original vertex indices, sorted
    std::vector<int> edges;      // original edge indices induced by `vertices`
                                 // (for leaves: the single hyperedge)
    std::vector<int> children;   // node indices; empty = leaf
};

struct DRPlan {
    std::vector<DRNode> nodes;  // node 0 is the root
    int max_fan_in = 0;         // largest child count over all nodes
};

// Requires a connected tight hypergraph (throws otherwise). Subset
// enumeration is exponential; guarded to num_vertices <= 20.
DRPlan drplan(const WeightedHypergraph& h);

// Maximum subsystem whose rows are independent: pins are kept greedily, each
// pin accepted only if all its d-|e_k| copies fit the sparsity count at once.
struct MaxRigidResult {
    WeightedHypergraph hypergraph;            // kept edges with reduced weights
    std::vector<int> edge_map;                // kept edge -> original edge
    std::vector<std::vector<int>> kept_pins;  // per original edge, kept pin l's
    std::vector<std::pair<int, int>> dropped; // (edge, pin) rejected
};

MaxRigidResult max_rigid_subsystem(const WeightedHypergraph& h);

} // namespace rigidkit

#endif
