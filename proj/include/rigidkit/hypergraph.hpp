#ifndef RIGIDKIT_HYPERGRAPH_HPP
#define RIGIDKIT_HYPERGRAPH_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

namespace rigidkit {

// Weighted hypergraph H = (V, E, m) in ambient dimension d. Vertices are
// opaque string ids, mapped to dense indices by declaration order; all
// operations work on the indices. The weight m_k of a hyperedge is the
// dimension of the subspace pinned to it, i.e. its pin count.
struct WeightedHypergraph {
    int d = 0;
    std::vector<std::string> vertex_ids;

    struct Hyperedge {
        std::vector<int> vertices;  // sorted ascending, nonempty, |e| < d
        int weight = 1;             // m_k >= 1
    };
    std::vector<Hyperedge> hyperedges;

    int num_vertices() const { return static_cast<int>(vertex_ids.size()); }
    int num_edges() const { return static_cast<int>(hyperedges.size()); }

    // number of rows the hyperedge contributes to the rigidity matrix
    int copies_of(int k) const {
        const auto& e = hyperedges[k];
        return e.weight * (d - static_cast<int>(e.vertices.size()));
    }
    int total_copies() const {
        int n = 0;
        for (int k = 0; k < num_edges(); ++k) n += copies_of(k);
        return n;
    }
    int total_pins() const {
        int n = 0;
        for (const auto& e : hyperedges) n += e.weight;
        return n;
    }

    // throws std::invalid_argument on any invariant violation;
    // allow_duplicate_sets permits several hyperedges on the same vertex set
    // (general rigidity analysis); dictionary-learning instances reject them.
    void validate(bool allow_duplicate_sets = true) const;
};

// Expansion of H: each hyperedge e_k replaced by m_k (d - |e_k|) labeled
// copies, ordered by k then ordinal. Copies carry no pin identity of their
// own; row labels (t, l) are assigned by the labeling search.
struct MultiHypergraph {
    WeightedHypergraph base;

    struct Copy {
        int edge = 0;     // index into base.hyperedges
        int ordinal = 0;  // position within E^k
    };
    std::vector<Copy> copies;

    int num_vertices() const { return base.num_vertices(); }
    int num_copies() const { return static_cast<int>(copies.size()); }
    const std::vector<int>& copy_vertices(int c) const {
        return base.hyperedges[copies[c].edge].vertices;
    }
};

// A system instance: hypergraph plus the pins, in the affine chart
// (d-1 coordinates each). pins[k] has exactly m_k entries; an instance with
// no pins at all (pins empty) is valid for combinatorial queries.
struct PinnedInstance {
    WeightedHypergraph hypergraph;
    std::vector<std::vector<Eigen::VectorXd>> pins;  // pins[k][l], size d-1

    bool has_pins() const { return !pins.empty(); }
    void validate() const;  // hypergraph invariants + pin counts/finiteness
};

MultiHypergraph expand(const WeightedHypergraph& h);

WeightedHypergraph induced_subgraph(const WeightedHypergraph& h,
                                    const std::vector<int>& vertex_subset);

// true if every vertex is reachable from every other through shared hyperedges
bool is_connected(const WeightedHypergraph& h);

} // namespace rigidkit

#endif
