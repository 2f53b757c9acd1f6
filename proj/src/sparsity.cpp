#include "rigidkit/sparsity.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <stdexcept>

namespace rigidkit {

PebbleGame::PebbleGame(const MultiHypergraph& mh, int k, int l) : mh_(mh), l_(l) {
    if (k < 1 || l < 0) throw std::invalid_argument("pebble game needs k >= 1, l >= 0");
    state_.k = k;
    state_.pebbles.assign(mh.num_vertices(), k);
    state_.tail.assign(mh.num_copies(), -1);
    out_copies_.assign(mh.num_vertices(), {});
}

int PebbleGame::free_pebbles() const {
    return std::accumulate(state_.pebbles.begin(), state_.pebbles.end(), 0);
}

// Depth-first search for a free pebble reachable from `targets` along placed
// copies (following tail -> other-vertex arcs), shifting it back onto the
// first target-set vertex on the path. Returns false when the reachable
// closure holds no pebble outside the targets.
bool PebbleGame::gather_pebble(const std::vector<int>& targets) {
    const int n = mh_.num_vertices();
    std::vector<char> visited(n, 0);
    std::vector<int> parent_vertex(n, -1), parent_copy(n, -1);
    std::vector<int> stack;
    for (int v : targets) {
        visited[v] = 1;
        stack.push_back(v);
    }
    // rebuild per-vertex out lists lazily from tails (kept incrementally)
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int c : out_copies_[v]) {
            if (state_.tail[c] != v) continue;  // stale entry after a shift
            for (int u : mh_.copy_vertices(c)) {
                if (visited[u]) continue;
                visited[u] = 1;
                parent_vertex[u] = v;
                parent_copy[u] = c;
                if (state_.pebbles[u] > 0) {
                    // shift the pebble back along the path to the target set
                    int w = u;
                    while (parent_vertex[w] != -1) {
                        const int pv = parent_vertex[w];
                        const int pc = parent_copy[w];
                        assert(state_.pebbles[w] > 0);
                        --state_.pebbles[w];
                        ++state_.pebbles[pv];
                        state_.tail[pc] = w;
                        out_copies_[w].push_back(pc);
                        w = pv;
                    }
                    return true;
                }
                stack.push_back(u);
            }
        }
    }
    return false;
}

bool PebbleGame::try_insert(int copy) {
    const auto& verts = mh_.copy_vertices(copy);
    auto on_edge = [&] {
        int s = 0;
        for (int v : verts) s += state_.pebbles[v];
        return s;
    };
    while (on_edge() < l_ + 1) {
        if (!gather_pebble(verts)) return false;
    }
    for (int v : verts) {
        if (state_.pebbles[v] > 0) {
            --state_.pebbles[v];
            state_.tail[copy] = v;
            out_copies_[v].push_back(copy);
            return true;
        }
    }
    return false;  // unreachable: on_edge() >= 1
}

SparsityResult pebble_game(const MultiHypergraph& mh, int k, int l) {
    std::vector<int> order(mh.num_copies());
    std::iota(order.begin(), order.end(), 0);
    return pebble_game_ordered(mh, k, l, order);
}

SparsityResult pebble_game_ordered(const MultiHypergraph& mh, int k, int l,
                                   const std::vector<int>& order) {
    PebbleGame game(mh, k, l);
    SparsityResult res;
    for (int c : order) {
        if (!game.try_insert(c)) {
            res.sparse = false;
            res.rejected_copy = c;
            res.state = game.state();
            return res;
        }
#ifndef NDEBUG
        // pebble conservation: free pebbles + placed copies == k|V| (l = 0)
        int placed = 0;
        for (int t : game.state().tail) placed += (t >= 0);
        assert(game.free_pebbles() + placed == k * mh.num_vertices() || l != 0);
#endif
    }
    res.sparse = true;
    res.state = game.state();
    return res;
}

bool is_tight(const MultiHypergraph& mh, int k) {
    if (mh.num_copies() != k * mh.num_vertices()) return false;
    return pebble_game(mh, k).sparse;
}

MapDecomposition map_decompose(const MultiHypergraph& mh, int k) {
    std::vector<int> order(mh.num_copies());
    std::iota(order.begin(), order.end(), 0);
    return map_decompose_ordered(mh, k, order);
}

MapDecomposition map_decompose_ordered(const MultiHypergraph& mh, int k,
                                       const std::vector<int>& order) {
    auto res = pebble_game_ordered(mh, k, 0, order);
    if (!res.sparse || mh.num_copies() != k * mh.num_vertices())
        throw std::invalid_argument("map_decompose requires a (k,0)-tight multi-hypergraph");
    // out-degree is exactly k per vertex; hand that vertex's copies one per map
    MapDecomposition md;
    md.map_index.assign(mh.num_copies(), -1);
    md.tail = res.state.tail;
    std::vector<int> next_map(mh.num_vertices(), 0);
    for (int c = 0; c < mh.num_copies(); ++c) {
        const int v = md.tail[c];
        md.map_index[c] = next_map[v]++;
    }
    return md;
}

bool map_decomposition_valid(const MultiHypergraph& mh, int k,
                             const MapDecomposition& md) {
    if (static_cast<int>(md.map_index.size()) != mh.num_copies()) return false;
    if (static_cast<int>(md.tail.size()) != mh.num_copies()) return false;
    std::vector<int> seen(mh.num_vertices() * k, 0);
    for (int c = 0; c < mh.num_copies(); ++c) {
        const int v = md.tail[c];
        const int j = md.map_index[c];
        if (j < 0 || j >= k) return false;
        const auto& verts = mh.copy_vertices(c);
        if (std::find(verts.begin(), verts.end(), v) == verts.end()) return false;
        ++seen[v * k + j];
    }
    // out-degree exactly one per (vertex, map)
    return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
}

bool brute_force_sparse(const MultiHypergraph& mh, int k) {
    const int n = mh.num_vertices();
    if (n > 20) throw std::invalid_argument("brute_force_sparse guarded at |V| <= 20");
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        int count = 0;
        for (int c = 0; c < mh.num_copies(); ++c) {
            bool inside = true;
            for (int v : mh.copy_vertices(c))
                if (!(mask >> v & 1)) { inside = false; break; }
            count += inside;
        }
        if (count > k * __builtin_popcount(mask)) return false;
    }
    return true;
}

} // namespace rigidkit
