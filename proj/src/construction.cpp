#include "rigidkit/construction.hpp"

#include "rigidkit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rigidkit {

namespace {

// C(n, r) with saturation; inputs stay tiny
long long binomial(int n, int r) {
    if (r < 0 || r > n) return 0;
    long long acc = 1;
    for (int i = 1; i <= r; ++i) {
        acc = acc * (n - r + i) / i;
        if (acc > (1LL << 50)) return 1LL << 50;
    }
    return acc;
}

std::vector<std::vector<int>> subsets_of_size(const std::vector<int>& pool, int size) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
        if (static_cast<int>(cur.size()) == size) {
            out.push_back(cur);
            return;
        }
        for (std::size_t i = start; i + (size - cur.size()) <= pool.size(); ++i) {
            cur.push_back(pool[i]);
            rec(i + 1);
            cur.pop_back();
        }
    };
    rec(0);
    return out;
}

// Incremental (k,0) pebble game used by the construction stages. Supports
// atomic multi-copy insertion with rollback and an optional vertex filter
// restricting where pebbles may travel (stage 2 keeps them inside V_1).
struct IncrementalGame {
    int k = 0;
    std::vector<int> pebbles;
    struct Placed {
        std::vector<int> verts;
        int tail;
    };
    std::vector<Placed> placed;
    std::vector<char> allowed;  // empty = no restriction

    bool vertex_allowed(int v) const { return allowed.empty() || allowed[v]; }

    bool gather(const std::vector<int>& targets) {
        const int n = static_cast<int>(pebbles.size());
        std::vector<char> visited(n, 0);
        std::vector<int> parent_vertex(n, -1), parent_copy(n, -1), stack;
        for (int v : targets) {
            if (!vertex_allowed(v)) continue;
            visited[v] = 1;
            stack.push_back(v);
        }
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (std::size_t c = 0; c < placed.size(); ++c) {
                if (placed[c].tail != v) continue;
                for (int u : placed[c].verts) {
                    if (visited[u] || !vertex_allowed(u)) continue;
                    visited[u] = 1;
                    parent_vertex[u] = v;
                    parent_copy[u] = static_cast<int>(c);
                    if (pebbles[u] > 0) {
                        int w = u;
                        while (parent_vertex[w] != -1) {
                            --pebbles[w];
                            ++pebbles[parent_vertex[w]];
                            placed[parent_copy[w]].tail = w;
                            w = parent_vertex[w];
                        }
                        return true;
                    }
                    stack.push_back(u);
                }
            }
        }
        return false;
    }

    bool add_one(const std::vector<int>& verts) {
        auto on_edge = [&] {
            int s = 0;
            for (int v : verts) s += pebbles[v];
            return s;
        };
        while (on_edge() < 1)
            if (!gather(verts)) return false;
        for (int v : verts) {
            if (pebbles[v] > 0) {
                --pebbles[v];
                placed.push_back({verts, v});
                return true;
            }
        }
        return false;
    }

    // all-or-nothing insertion of `count` copies
    bool add_copies(const std::vector<int>& verts, int count) {
        const auto pebbles_backup = pebbles;
        const auto placed_size = placed.size();
        for (int c = 0; c < count; ++c) {
            if (!add_one(verts)) {
                pebbles = pebbles_backup;
                placed.resize(placed_size);
                return false;
            }
        }
        return true;
    }
};

} // namespace

Stage1Size stage1_size(int d, int s) {
    if (s < 1 || s >= d) throw std::invalid_argument("stage1_size requires 1 <= s < d");
    for (int k = 1;; ++k) {
        if (binomial(k * (d - s), s) >= static_cast<long long>(k) * (d - 1))
            return {k, k * (d - s), k * (d - 1)};
    }
}

Construction build_construction(int d, int s, int m, std::uint64_t seed) {
    const Stage1Size s1 = stage1_size(d, s);
    if (m < s1.num_edges)
        throw std::invalid_argument("m = " + std::to_string(m) +
                                    " is below the stage-1 minimum of " +
                                    std::to_string(s1.num_edges) + " pins");
    const int num_blocks = m / (d - 1) - s1.k;

    Construction con;
    auto& h = con.hypergraph;
    auto& trace = con.trace;
    h.d = d;
    trace.d = d;
    trace.s = s;
    trace.k = s1.k;

    for (int v = 0; v < s1.num_vertices; ++v) h.vertex_ids.push_back("v" + std::to_string(v));

    // stage 1: greedy pebble game over the s-subsets of V0
    std::vector<int> v0(s1.num_vertices);
    std::iota(v0.begin(), v0.end(), 0);
    auto candidates = subsets_of_size(v0, s);
    bool built = false;
    for (int attempt = 0; attempt < 16 && !built; ++attempt) {
        auto order = candidates;
        if (attempt > 0 || seed != 0) {
            Rng rng = Rng::substream(seed, "construction-stage1-" + std::to_string(attempt));
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[rng.next_below(i)]);
        }
        IncrementalGame game;
        game.k = d - 1;
        game.pebbles.assign(s1.num_vertices, d - 1);
        std::vector<std::vector<int>> accepted;
        for (const auto& e : order) {
            if (static_cast<int>(accepted.size()) == s1.num_edges) break;
            if (game.add_copies(e, d - s)) accepted.push_back(e);
        }
        if (static_cast<int>(accepted.size()) == s1.num_edges) {
            for (const auto& e : accepted) h.hyperedges.push_back({e, 1});
            built = true;
        }
    }
    if (!built) throw std::runtime_error("stage 1 construction failed to reach tightness");
    trace.stage1.new_vertices = v0;
    trace.stage1.edges.resize(s1.num_edges);
    std::iota(trace.stage1.edges.begin(), trace.stage1.edges.end(), 0);

    if (num_blocks > 0) {
        // stage 2: fresh pebbles on V1 only; pebbles may not leave V1
        std::vector<int> v1(d - s);
        std::iota(v1.begin(), v1.end(), s1.num_vertices);
        for (int v : v1) h.vertex_ids.push_back("v" + std::to_string(v));
        std::vector<int> pool = v0;
        pool.insert(pool.end(), v1.begin(), v1.end());
        auto stage2_candidates = subsets_of_size(pool, s);
        // drop pure-V0 subsets, prefer few V1 vertices, then lex
        std::erase_if(stage2_candidates, [&](const std::vector<int>& e) {
            return e.back() < s1.num_vertices;
        });
        std::stable_sort(stage2_candidates.begin(), stage2_candidates.end(),
                         [&](const auto& a, const auto& b) {
                             auto v1_count = [&](const std::vector<int>& e) {
                                 return std::count_if(e.begin(), e.end(), [&](int v) {
                                     return v >= s1.num_vertices;
                                 });
                             };
                             return v1_count(a) < v1_count(b);
                         });
        IncrementalGame game;
        game.k = d - 1;
        game.pebbles.assign(h.num_vertices(), 0);
        for (int v : v1) game.pebbles[v] = d - 1;
        game.allowed.assign(h.num_vertices(), 0);
        for (int v : v1) game.allowed[v] = 1;
        ConstructionTrace::Block b1;
        b1.new_vertices = v1;
        for (const auto& e : stage2_candidates) {
            if (static_cast<int>(b1.edges.size()) == d - 1) break;
            if (game.add_copies(e, d - s)) {
                b1.edges.push_back(h.num_edges());
                h.hyperedges.push_back({e, 1});
            }
        }
        if (static_cast<int>(b1.edges.size()) != d - 1)
            throw std::runtime_error("stage 2 construction failed");
        std::vector<char> in_base(h.num_vertices(), 0);
        for (int ei : b1.edges)
            for (int v : h.hyperedges[ei].vertices)
                if (v < s1.num_vertices) in_base[v] = 1;
        for (int v = 0; v < s1.num_vertices; ++v)
            if (in_base[v]) trace.base_vertices.push_back(v);
        trace.blocks.push_back(b1);

        // stage 3: append copies of the B1 template onto the base vertices.
        // V1 indices are contiguous, so the remap is an offset — O(1) per block.
        const std::vector<int> b1_edges = trace.blocks[0].edges;
        for (int i = 1; i < num_blocks; ++i) {
            ConstructionTrace::Block bi;
            const int offset = h.num_vertices() - s1.num_vertices;
            for (int j = 0; j < d - s; ++j) {
                const int nv = h.num_vertices();
                bi.new_vertices.push_back(nv);
                h.vertex_ids.push_back("v" + std::to_string(nv));
            }
            for (int ei : b1_edges) {
                std::vector<int> verts;
                for (int v : h.hyperedges[ei].vertices)
                    verts.push_back(v >= s1.num_vertices ? v + offset : v);
                std::sort(verts.begin(), verts.end());
                bi.edges.push_back(h.num_edges());
                h.hyperedges.push_back({verts, 1});
            }
            trace.blocks.push_back(std::move(bi));
        }
    }
    trace.pins_consumed = h.num_edges();
    trace.leftover = m - h.num_edges();
    return con;
}

IncrementalReport incremental_solve(const Construction& con,
                                    const std::vector<Eigen::VectorXd>& pins,
                                    const SolveConfig& cfg) {
    cfg.validate();
    const auto& h = con.hypergraph;
    if (static_cast<int>(pins.size()) != h.num_edges())
        throw std::invalid_argument("incremental_solve needs one pin per hyperedge");
    PinnedInstance inst;
    inst.hypergraph = h;
    inst.pins.resize(h.num_edges());
    for (int k = 0; k < h.num_edges(); ++k) inst.pins[k] = {pins[k]};
    inst.validate();

    IncrementalReport rep;
    Eigen::MatrixXd points = Eigen::MatrixXd::Constant(
        h.num_vertices(), h.d - 1, std::numeric_limits<double>::quiet_NaN());

    SolveConfig stage_cfg = cfg;
    stage_cfg.seed = Rng::substream_seed(cfg.seed, "stage1");
    // stage 1 is the only global search and has O(1) size; spend restarts there
    stage_cfg.restarts = std::max(cfg.restarts, 64);
    auto s1 = solve_subsystem_inplace(inst, con.trace.stage1.edges,
                                      con.trace.stage1.new_vertices, points, stage_cfg);
    if (!s1.converged) {
        rep.failed_block = -1;
        rep.residual = s1.residual;
        rep.framework = Framework{inst, points};
        return rep;
    }
    for (std::size_t i = 0; i < con.trace.blocks.size(); ++i) {
        stage_cfg.seed = Rng::substream_seed(cfg.seed, "block-" + std::to_string(i));
        auto sb = solve_subsystem_inplace(inst, con.trace.blocks[i].edges,
                                          con.trace.blocks[i].new_vertices, points,
                                          stage_cfg);
        if (!sb.converged) {
            rep.failed_block = static_cast<int>(i);
            rep.residual = sb.residual;
            rep.framework = Framework{inst, points};
            return rep;
        }
    }
    rep.framework = Framework{inst, points};
    rep.residual = residual(rep.framework);
    rep.converged = rep.residual <= cfg.tol * std::sqrt(static_cast<double>(h.num_edges()));
    return rep;
}

} // namespace rigidkit
