#include "rigidkit/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace rigidkit {

void WeightedHypergraph::validate(bool allow_duplicate_sets) const {
    if (d < 2) throw std::invalid_argument("ambient dimension d must be >= 2");
    std::set<std::string> seen_ids(vertex_ids.begin(), vertex_ids.end());
    if (static_cast<int>(seen_ids.size()) != num_vertices())
        throw std::invalid_argument("duplicate vertex id");
    std::set<std::vector<int>> seen_sets;
    for (int k = 0; k < num_edges(); ++k) {
        const auto& e = hyperedges[k];
        if (e.vertices.empty())
            throw std::invalid_argument("hyperedge " + std::to_string(k) + " is empty");
        if (static_cast<int>(e.vertices.size()) >= d)
            throw std::invalid_argument("hyperedge " + std::to_string(k) +
                                        " has |e| >= d (rank bound violated)");
        if (!std::is_sorted(e.vertices.begin(), e.vertices.end()) ||
            std::adjacent_find(e.vertices.begin(), e.vertices.end()) != e.vertices.end())
            throw std::invalid_argument("hyperedge " + std::to_string(k) +
                                        " vertex list not strictly increasing");
        if (e.vertices.front() < 0 || e.vertices.back() >= num_vertices())
            throw std::invalid_argument("hyperedge " + std::to_string(k) +
                                        " references unknown vertex");
        if (e.weight < 1)
            throw std::invalid_argument("hyperedge " + std::to_string(k) +
                                        " has weight < 1");
        if (e.weight > static_cast<int>(e.vertices.size()))
            throw std::invalid_argument(
                "hyperedge " + std::to_string(k) +
                " has weight m_k > |e_k| (pinning subspace would exceed the span)");
        if (!seen_sets.insert(e.vertices).second && !allow_duplicate_sets)
            throw std::invalid_argument("duplicate hyperedge vertex set at index " +
                                        std::to_string(k));
    }
}

void PinnedInstance::validate() const {
    hypergraph.validate();
    if (pins.empty()) return;
    if (static_cast<int>(pins.size()) != hypergraph.num_edges())
        throw std::invalid_argument("pin list count does not match hyperedge count");
    for (int k = 0; k < hypergraph.num_edges(); ++k) {
        if (static_cast<int>(pins[k].size()) != hypergraph.hyperedges[k].weight)
            throw std::invalid_argument("hyperedge " + std::to_string(k) + " declares " +
                                        std::to_string(hypergraph.hyperedges[k].weight) +
                                        " pins but provides " +
                                        std::to_string(pins[k].size()));
        for (const auto& pin : pins[k]) {
            if (pin.size() != hypergraph.d - 1)
                throw std::invalid_argument("pin of hyperedge " + std::to_string(k) +
                                            " has wrong dimension");
            if (!pin.allFinite())
                throw std::invalid_argument("pin of hyperedge " + std::to_string(k) +
                                            " has non-finite coordinates");
        }
    }
}

MultiHypergraph expand(const WeightedHypergraph& h) {
    h.validate();
    MultiHypergraph mh;
    mh.base = h;
    for (int k = 0; k < h.num_edges(); ++k) {
        const int copies = h.copies_of(k);
        for (int c = 0; c < copies; ++c) mh.copies.push_back({k, c});
    }
    return mh;
}

WeightedHypergraph induced_subgraph(const WeightedHypergraph& h,
                                    const std::vector<int>& vertex_subset) {
    std::vector<char> in(h.num_vertices(), 0);
    for (int v : vertex_subset) {
        if (v < 0 || v >= h.num_vertices())
            throw std::invalid_argument("vertex subset out of range");
        in[v] = 1;
    }
    WeightedHypergraph sub;
    sub.d = h.d;
    std::vector<int> remap(h.num_vertices(), -1);
    for (int v = 0; v < h.num_vertices(); ++v) {
        if (in[v]) {
            remap[v] = sub.num_vertices();
            sub.vertex_ids.push_back(h.vertex_ids[v]);
        }
    }
    for (const auto& e : h.hyperedges) {
        if (std::all_of(e.vertices.begin(), e.vertices.end(),
                        [&](int v) { return in[v]; })) {
            WeightedHypergraph::Hyperedge f;
            f.weight = e.weight;
            for (int v : e.vertices) f.vertices.push_back(remap[v]);
            sub.hyperedges.push_back(std::move(f));
        }
    }
    return sub;
}

bool is_connected(const WeightedHypergraph& h) {
    const int n = h.num_vertices();
    if (n <= 1) return true;
    std::vector<int> parent(n);
    for (int v = 0; v < n; ++v) parent[v] = v;
    auto find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (const auto& e : h.hyperedges)
        for (std::size_t i = 1; i < e.vertices.size(); ++i)
            parent[find(e.vertices[i])] = find(e.vertices[0]);
    const int root = find(0);
    for (int v = 1; v < n; ++v)
        if (find(v) != root) return false;
    return true;
}

} // namespace rigidkit
