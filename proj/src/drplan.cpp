#include "rigidkit/drplan.hpp"

#include <algorithm>
#include <stdexcept>

namespace rigidkit {

namespace {

std::vector<int> induced_edges(const WeightedHypergraph& h, const std::vector<char>& in) {
    std::vector<int> out;
    for (int k = 0; k < h.num_edges(); ++k) {
        bool all = true;
        for (int v : h.hyperedges[k].vertices) all = all && in[v];
        if (all) out.push_back(k);
    }
    return out;
}

bool subset_tight_connected(const WeightedHypergraph& h, const std::vector<int>& verts,
                            const std::vector<int>& edges) {
    if (edges.empty()) return false;
    WeightedHypergraph sub;
    sub.d = h.d;
    std::vector<int> remap(h.num_vertices(), -1);
    for (std::size_t i = 0; i < verts.size(); ++i) {
        remap[verts[i]] = static_cast<int>(i);
        sub.vertex_ids.push_back(h.vertex_ids[verts[i]]);
    }
    for (int k : edges) {
        WeightedHypergraph::Hyperedge e;
        for (int v : h.hyperedges[k].vertices) e.vertices.push_back(remap[v]);
        e.weight = h.hyperedges[k].weight;
        sub.hyperedges.push_back(std::move(e));
    }
    if (!is_connected(sub)) return false;
    return is_tight(expand(sub), h.d - 1);
}

struct PlanBuilder {
    const WeightedHypergraph& h;
    DRPlan plan;

    int build(const std::vector<int>& verts, const std::vector<int>& edges) {
        const int id = static_cast<int>(plan.nodes.size());
        plan.nodes.push_back({verts, edges, {}});
        if (edges.size() <= 1) return id;

        // all proper connected tight vertex-induced subgraphs, by bitmask
        const int n = static_cast<int>(verts.size());
        std::vector<std::pair<std::vector<int>, std::vector<int>>> tights;
        std::vector<char> in(h.num_vertices(), 0);
        for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
            std::vector<int> sub;
            for (int i = 0; i < n; ++i)
                if (mask & (1u << i)) sub.push_back(verts[i]);
            std::fill(in.begin(), in.end(), 0);
            for (int v : sub) in[v] = 1;
            auto sube = induced_edges(h, in);
            int copies = 0;
            for (int k : sube) copies += h.copies_of(k);
            if (copies != (h.d - 1) * static_cast<int>(sub.size())) continue;
            if (subset_tight_connected(h, sub, sube))
                tights.emplace_back(std::move(sub), std::move(sube));
        }
        // keep the vertex-maximal ones
        std::vector<std::pair<std::vector<int>, std::vector<int>>> maximal;
        for (const auto& a : tights) {
            bool dominated = false;
            for (const auto& b : tights)
                if (a.first.size() < b.first.size() &&
                    std::includes(b.first.begin(), b.first.end(), a.first.begin(),
                                  a.first.end()))
                    dominated = true;
            if (!dominated) maximal.push_back(a);
        }

        std::vector<std::pair<std::vector<int>, std::vector<int>>> children;
        if (maximal.empty()) {
            for (int k : edges)
                children.emplace_back(h.hyperedges[k].vertices, std::vector<int>{k});
        } else {
            auto share_vertex = [](const std::vector<int>& a, const std::vector<int>& b) {
                std::vector<int> inter;
                std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                                      std::back_inserter(inter));
                return !inter.empty();
            };
            int pi = -1, pj = -1;
            for (std::size_t i = 0; i < maximal.size() && pi < 0; ++i)
                for (std::size_t j = i + 1; j < maximal.size() && pi < 0; ++j)
                    if (share_vertex(maximal[i].first, maximal[j].first)) {
                        pi = static_cast<int>(i);
                        pj = static_cast<int>(j);
                    }
            if (pi >= 0) {
                children.push_back(maximal[pi]);
                children.push_back(maximal[pj]);
            } else {
                children = maximal;
            }
        }
        for (const auto& [cv, ce] : children) {
            const int cid = build(cv, ce);
            plan.nodes[id].children.push_back(cid);
        }
        plan.max_fan_in =
            std::max(plan.max_fan_in, static_cast<int>(plan.nodes[id].children.size()));
        return id;
    }
};

} // namespace

DRPlan drplan(const WeightedHypergraph& h) {
    h.validate();
    if (h.num_vertices() > 18)
        throw std::invalid_argument("drplan: subset enumeration limited to 18 vertices");
    if (!is_connected(h)) throw std::invalid_argument("drplan requires a connected system");
    if (!is_tight(expand(h), h.d - 1))
        throw std::invalid_argument("drplan requires a tight system");

    std::vector<int> verts(h.num_vertices());
    for (int v = 0; v < h.num_vertices(); ++v) verts[v] = v;
    std::vector<int> edges(h.num_edges());
    for (int k = 0; k < h.num_edges(); ++k) edges[k] = k;
    PlanBuilder pb{h, {}};
    pb.build(verts, edges);
    return pb.plan;
}

MaxRigidResult max_rigid_subsystem(const WeightedHypergraph& h) {
    h.validate();
    const MultiHypergraph mh = expand(h);
    PebbleGame game(mh, h.d - 1);

    MaxRigidResult res;
    res.kept_pins.resize(h.num_edges());
    int copy_base = 0;
    for (int k = 0; k < h.num_edges(); ++k) {
        const auto& e = h.hyperedges[k];
        const int group = h.d - static_cast<int>(e.vertices.size());
        for (int l = 0; l < e.weight; ++l) {
            const auto snap = game.snapshot();
            bool ok = true;
            for (int c = 0; c < group && ok; ++c)
                ok = game.try_insert(copy_base + l * group + c);
            if (ok) {
                res.kept_pins[k].push_back(l);
            } else {
                game.restore(snap);
                res.dropped.emplace_back(k, l);
            }
        }
        copy_base += h.copies_of(k);
    }

    res.hypergraph.d = h.d;
    res.hypergraph.vertex_ids = h.vertex_ids;
    for (int k = 0; k < h.num_edges(); ++k) {
        if (res.kept_pins[k].empty()) continue;
        res.hypergraph.hyperedges.push_back(
            {h.hyperedges[k].vertices, static_cast<int>(res.kept_pins[k].size())});
        res.edge_map.push_back(k);
    }
    return res;
}

} // namespace rigidkit
