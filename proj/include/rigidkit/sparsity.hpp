#ifndef RIGIDKIT_SPARSITY_HPP
#define RIGIDKIT_SPARSITY_HPP

#include "rigidkit/hypergraph.hpp"

#include <cstdint>
#include <vector>

namespace rigidkit {

// State of the (k,l)-pebble game over a multi-hypergraph. Throughout the game
// pebbles[v] + out-degree(v) == k for every vertex; a copy is placed when its
// tail is set.
struct PebbleState {
    int k = 0;
    std::vector<int> pebbles;   // per vertex
    std::vector<int> tail;      // per copy; -1 = not placed
};

struct PebbleGame {
    // Starts with k pebbles on every vertex and no copies placed.
    PebbleGame(const MultiHypergraph& mh, int k, int l = 0);

    // Tries to place copy c (gathering pebbles by depth-first search first);
    // returns false if the sparsity count forbids it. Deterministic: DFS visits
    // copies in index order, vertices in edge order.
    bool try_insert(int copy);

    // Rolls the game back to an earlier snapshot (used for atomic multi-copy
    // insertions). Snapshots are whole-state copies; the game is small.
    PebbleState snapshot() const { return state_; }
    void restore(const PebbleState& s) { state_ = s; }

    int free_pebbles() const;
    const PebbleState& state() const { return state_; }

private:
    bool gather_pebble(const std::vector<int>& targets);

    const MultiHypergraph& mh_;
    int l_;
    PebbleState state_;
    std::vector<std::vector<int>> out_copies_;  // per vertex, copies tailed there
};

struct SparsityResult {
    bool sparse = false;
    PebbleState state;              // orientation witness when sparse
    int rejected_copy = -1;         // first copy that could not be inserted
};

// Decides (k,l)-sparsity by inserting copies in index order. Acceptance of
// every copy is equivalent to sparsity; on acceptance the orientation is a
// witness with out-degree <= k everywhere.
SparsityResult pebble_game(const MultiHypergraph& mh, int k, int l = 0);

// sparse and |E-hat| == k |V|
bool is_tight(const MultiHypergraph& mh, int k);

// Partition of the copies of a tight multi-hypergraph into k edge-disjoint
// map-graphs: per-copy map index in [0,k) and tail vertex, with every vertex
// the tail of exactly one copy in each map.
struct MapDecomposition {
    std::vector<int> map_index;  // per copy
    std::vector<int> tail;       // per copy
};

// Precondition: is_tight(mh, k); throws std::invalid_argument otherwise.
// Uses the pebble-game orientation (out-degree exactly k per vertex) and
// distributes each vertex's out-copies greedily over the k maps in copy order.
MapDecomposition map_decompose(const MultiHypergraph& mh, int k);

// Same, with copies inserted in the given order; different orders may give
// different (always valid) decompositions.
MapDecomposition map_decompose_ordered(const MultiHypergraph& mh, int k,
                                       const std::vector<int>& order);

// Validates both MapDecomposition invariants in linear time.
bool map_decomposition_valid(const MultiHypergraph& mh, int k,
                             const MapDecomposition& md);

// Exact oracle by enumeration of all vertex subsets; |V| <= 20 guarded.
bool brute_force_sparse(const MultiHypergraph& mh, int k);

// pebble_game with copies inserted in the given order (same decision,
// possibly different witness); order must be a permutation of the copies.
SparsityResult pebble_game_ordered(const MultiHypergraph& mh, int k, int l,
                                   const std::vector<int>& order);

} // namespace rigidkit

#endif
