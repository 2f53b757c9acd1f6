#include "rigidkit/rigidity.hpp"

#include "rigidkit/prime_field.hpp"
#include "rigidkit/rng.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace rigidkit {

namespace {

// 1-based column coordinates C(t) = {1, ..., |e|-1} u {|e|-1+t}
std::vector<int> minor_columns(int edge_size, int t) {
    std::vector<int> cols;
    for (int j = 1; j <= edge_size - 1; ++j) cols.push_back(j);
    cols.push_back(edge_size - 1 + t);
    return cols;
}

template <class Scalar>
Scalar small_det(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& m) {
    const int n = static_cast<int>(m.rows());
    if (n == 1) return m(0, 0);
    if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    Scalar det(0);
    Scalar sign(1);
    for (int r = 0; r < n; ++r) {
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> sub(n - 1, n - 1);
        for (int i = 0, ii = 0; i < n; ++i) {
            if (i == r) continue;
            for (int c = 1; c < n; ++c) sub(ii, c - 1) = m(i, c);
            ++ii;
        }
        det += sign * m(r, 0) * small_det<Scalar>(sub);
        sign = -sign;
    }
    return det;
}

// D^k_{t,j}: determinant of the minor column block with coordinate j's column
// replaced by ones (zero when j is outside C(t)).
template <class Scalar>
Scalar d_coefficient(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& edge_points,
                     int t, int j) {
    const int sz = static_cast<int>(edge_points.rows());
    const auto cols = minor_columns(sz, t);
    const auto pos = std::find(cols.begin(), cols.end(), j);
    if (pos == cols.end()) return Scalar(0);
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(sz, sz);
    for (int c = 0; c < sz; ++c) {
        const int coord = cols[c];
        for (int r = 0; r < sz; ++r)
            m(r, c) = (coord == j) ? Scalar(1) : edge_points(r, coord - 1);
    }
    return small_det<Scalar>(m);
}

std::vector<RowLabel> make_row_labels(const WeightedHypergraph& h) {
    std::vector<RowLabel> labels;
    for (int k = 0; k < h.num_edges(); ++k) {
        const auto& e = h.hyperedges[k];
        const int sz = static_cast<int>(e.vertices.size());
        for (int t = 1; t <= h.d - sz; ++t)
            for (int l = 1; l <= e.weight; ++l) labels.push_back({k, t, l});
    }
    return labels;
}

} // namespace

Eigen::MatrixXd Framework::edge_points(int k) const {
    const auto& verts = instance.hypergraph.hyperedges[k].vertices;
    Eigen::MatrixXd m(verts.size(), d() - 1);
    for (std::size_t i = 0; i < verts.size(); ++i) m.row(i) = points.row(verts[i]);
    return m;
}

void Framework::validate(double tol) const {
    instance.validate();
    if (!instance.has_pins())
        throw std::invalid_argument("framework requires pins");
    if (points.rows() != instance.hypergraph.num_vertices() ||
        points.cols() != d() - 1)
        throw std::invalid_argument("point matrix shape mismatch");
    for (int k = 0; k < instance.hypergraph.num_edges(); ++k)
        for (const auto& pin : instance.pins[k])
            barycentric(edge_points(k), pin, tol);  // throws when outside span
}

Eigen::VectorXd barycentric(const Eigen::MatrixXd& points, const Eigen::VectorXd& pin,
                            double tol) {
    const int sz = static_cast<int>(points.rows());
    if (sz < 1 || points.cols() != pin.size())
        throw std::invalid_argument("barycentric: shape mismatch");
    const double scale = std::max(1.0, std::max(points.cwiseAbs().maxCoeff(),
                                                pin.cwiseAbs().maxCoeff()));
    if (sz == 1) {
        if ((points.row(0).transpose() - pin).norm() > tol * scale)
            throw std::invalid_argument("barycentric: pin outside span of points");
        Eigen::VectorXd b(1);
        b(0) = 1.0;
        return b;
    }
    Eigen::MatrixXd diff(points.cols(), sz - 1);
    for (int i = 1; i < sz; ++i)
        diff.col(i - 1) = (points.row(i) - points.row(0)).transpose();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(diff);
    qr.setThreshold(1e-10);
    if (qr.rank() < sz - 1)
        throw std::invalid_argument("barycentric: points are affinely dependent");
    const Eigen::VectorXd rhs = pin - points.row(0).transpose();
    const Eigen::VectorXd c = qr.solve(rhs);
    if ((diff * c - rhs).norm() > tol * scale)
        throw std::invalid_argument("barycentric: pin outside span of points");
    Eigen::VectorXd b(sz);
    b(0) = 1.0 - c.sum();
    b.tail(sz - 1) = c;
    return b;
}

template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> assemble_generic(
    const WeightedHypergraph& h,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& points,
    const std::vector<std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>>& bary) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const int d = h.d;
    Mat m = Mat::Constant(h.total_copies(), (d - 1) * h.num_vertices(), Scalar(0));
    int row = 0;
    for (int k = 0; k < h.num_edges(); ++k) {
        const auto& e = h.hyperedges[k];
        const int sz = static_cast<int>(e.vertices.size());
        Mat pts(sz, d - 1);
        for (int i = 0; i < sz; ++i)
            for (int j = 0; j < d - 1; ++j) pts(i, j) = points(e.vertices[i], j);
        for (int t = 1; t <= d - sz; ++t) {
            std::vector<Scalar> dcoef(d);
            for (int j : minor_columns(sz, t)) dcoef[j] = d_coefficient<Scalar>(pts, t, j);
            for (int l = 1; l <= e.weight; ++l) {
                const auto& b = bary[k][l - 1];
                for (int i = 0; i < sz; ++i)
                    for (int j : minor_columns(sz, t))
                        m(row, RigidityMatrix::column(e.vertices[i], j, d)) =
                            dcoef[j] * b(i);
                ++row;
            }
        }
    }
    return m;
}

template Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic> assemble_generic<double>(
    const WeightedHypergraph&,
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>&,
    const std::vector<std::vector<Eigen::Matrix<double, Eigen::Dynamic, 1>>>&);
template Eigen::Matrix<Fp61, Eigen::Dynamic, Eigen::Dynamic> assemble_generic<Fp61>(
    const WeightedHypergraph&,
    const Eigen::Matrix<Fp61, Eigen::Dynamic, Eigen::Dynamic>&,
    const std::vector<std::vector<Eigen::Matrix<Fp61, Eigen::Dynamic, 1>>>&);

RigidityMatrix assemble(const Framework& fr) {
    const auto& h = fr.instance.hypergraph;
    std::vector<std::vector<Eigen::VectorXd>> bary(h.num_edges());
    for (int k = 0; k < h.num_edges(); ++k) {
        const Eigen::MatrixXd pts = fr.edge_points(k);
        for (const auto& pin : fr.instance.pins[k]) {
            try {
                bary[k].push_back(barycentric(pts, pin));
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument("hyperedge " + std::to_string(k) + ", pin " +
                                            std::to_string(bary[k].size() + 1) + ": " +
                                            e.what());
            }
        }
    }
    RigidityMatrix m;
    m.d = h.d;
    m.num_vertices = h.num_vertices();
    m.row_labels = make_row_labels(h);
    m.entries = assemble_generic<double>(h, fr.points, bary);
    return m;
}

double constraint_value(const Eigen::MatrixXd& edge_points, const Eigen::VectorXd& pin,
                        int t) {
    const int sz = static_cast<int>(edge_points.rows());
    const auto cols = minor_columns(sz, t);
    Eigen::MatrixXd m(sz, sz);
    for (int c = 0; c < sz; ++c)
        for (int r = 0; r < sz; ++r)
            m(r, c) = edge_points(r, cols[c] - 1) - pin(cols[c] - 1);
    return small_det<double>(m);
}

Eigen::MatrixXd constraint_gradient(const Eigen::MatrixXd& edge_points,
                                    const Eigen::VectorXd& pin, int t) {
    const int sz = static_cast<int>(edge_points.rows());
    const auto cols = minor_columns(sz, t);
    Eigen::MatrixXd base(sz, sz);
    for (int c = 0; c < sz; ++c)
        for (int r = 0; r < sz; ++r)
            base(r, c) = edge_points(r, cols[c] - 1) - pin(cols[c] - 1);
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(sz, edge_points.cols());
    for (int i = 0; i < sz; ++i) {
        for (int c = 0; c < sz; ++c) {
            Eigen::MatrixXd m = base;
            m.row(i).setZero();
            m(i, c) = 1.0;
            grad(i, cols[c] - 1) = small_det<double>(m);
        }
    }
    return grad;
}

RigidityMatrix assemble_raw(const Framework& fr) {
    const auto& h = fr.instance.hypergraph;
    RigidityMatrix m;
    m.d = h.d;
    m.num_vertices = h.num_vertices();
    m.row_labels = make_row_labels(h);
    m.entries = Eigen::MatrixXd::Zero(h.total_copies(), (h.d - 1) * h.num_vertices());
    for (int row = 0; row < static_cast<int>(m.row_labels.size()); ++row) {
        const auto& lab = m.row_labels[row];
        const auto& verts = h.hyperedges[lab.edge].vertices;
        const Eigen::MatrixXd grad = constraint_gradient(
            fr.edge_points(lab.edge), fr.instance.pins[lab.edge][lab.l - 1], lab.t);
        for (std::size_t i = 0; i < verts.size(); ++i)
            for (int j = 1; j <= h.d - 1; ++j)
                m.entries(row, RigidityMatrix::column(verts[i], j, h.d)) =
                    grad(static_cast<int>(i), j - 1);
    }
    return m;
}

namespace {

int float_rank(const Eigen::MatrixXd& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    const double cutoff =
        sv(0) * kRankTolerance * static_cast<double>(std::max(m.rows(), m.cols()));
    int r = 0;
    for (int i = 0; i < sv.size(); ++i) r += (sv(i) > cutoff);
    return r;
}

template <class Scalar, class Gen>
std::vector<std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>> random_bary(
    const WeightedHypergraph& h, Gen&& gen) {
    std::vector<std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>> bary(h.num_edges());
    for (int k = 0; k < h.num_edges(); ++k) {
        const int sz = static_cast<int>(h.hyperedges[k].vertices.size());
        for (int l = 0; l < h.hyperedges[k].weight; ++l) {
            Eigen::Matrix<Scalar, Eigen::Dynamic, 1> b(sz);
            Scalar sum(0);
            for (int i = 0; i + 1 < sz; ++i) {
                b(i) = gen();
                sum += b(i);
            }
            b(sz - 1) = Scalar(1) - sum;
            bary[k].push_back(std::move(b));
        }
    }
    return bary;
}

} // namespace

int generic_rank(const WeightedHypergraph& h, int trials, std::uint64_t seed,
                 RankBackend backend) {
    if (trials < 1) throw std::invalid_argument("generic_rank: trials >= 1 required");
    h.validate();
    const int n = h.num_vertices();
    const int d = h.d;
    int best = 0;
    const int max_rank = std::min(h.total_copies(), (d - 1) * n);
    for (int trial = 0; trial < trials && best < max_rank; ++trial) {
        Rng rng = Rng::substream(seed, "rank-trial-" + std::to_string(trial));
        if (backend == RankBackend::PrimeField) {
            MatrixFp pts(n, d - 1);
            for (int v = 0; v < n; ++v)
                for (int j = 0; j < d - 1; ++j) pts(v, j) = Fp61(rng.next_u64());
            auto bary = random_bary<Fp61>(h, [&] { return Fp61(rng.next_u64()); });
            best = std::max(best, rank_mod_p(assemble_generic<Fp61>(h, pts, bary)));
        } else {
            Eigen::MatrixXd pts(n, d - 1);
            for (int v = 0; v < n; ++v)
                for (int j = 0; j < d - 1; ++j) pts(v, j) = rng.uniform(-1.0, 1.0);
            auto bary = random_bary<double>(h, [&] { return rng.uniform(-1.0, 1.0); });
            best = std::max(best, float_rank(assemble_generic<double>(h, pts, bary)));
        }
    }
    return best;
}

std::string to_string(RigidityClass c) {
    switch (c) {
        case RigidityClass::MinimallyRigid: return "minimally-rigid";
        case RigidityClass::Flexible: return "flexible";
        case RigidityClass::Overconstrained: return "overconstrained";
        case RigidityClass::Mixed: return "mixed";
    }
    return "?";
}

namespace {

// Per-hyperedge (t,l) assignment for copies with known (column group, tail).
// Returns per-copy (t,l) or empty on infeasibility. groups/tails are parallel,
// groups 0-based; t is forced to j - |e| + 1 (1-based j) whenever j >= |e|.
struct EdgeShape {
    int size = 0;    // |e_k|
    int weight = 1;  // m_k
    int d = 0;
};

bool assign_tl_rec(const EdgeShape& e, const std::vector<int>& groups,
                   const std::vector<int>& tails, std::size_t idx,
                   std::vector<std::pair<int, int>>& out) {
    if (idx == groups.size()) return true;
    const int j = groups[idx] + 1;  // 1-based column group
    const int tmax = e.d - e.size;
    int tlo = 1, thi = tmax;
    if (j >= e.size) tlo = thi = j - e.size + 1;
    for (int t = tlo; t <= thi; ++t) {
        bool t_ok = true;
        for (std::size_t p = 0; p < idx; ++p)
            if (out[p].first == t && tails[p] == tails[idx]) { t_ok = false; break; }
        if (!t_ok) continue;
        for (int l = 1; l <= e.weight; ++l) {
            bool ok = true;
            for (std::size_t p = 0; p < idx; ++p) {
                if (out[p].first == t && out[p].second == l) { ok = false; break; }
                if (out[p].second == l && groups[p] == groups[idx]) { ok = false; break; }
            }
            if (!ok) continue;
            out[idx] = {t, l};
            if (assign_tl_rec(e, groups, tails, idx + 1, out)) return true;
        }
    }
    return false;
}

std::vector<std::pair<int, int>> assign_tl(const EdgeShape& e,
                                           const std::vector<int>& groups,
                                           const std::vector<int>& tails) {
    std::vector<std::pair<int, int>> out(groups.size());
    if (!assign_tl_rec(e, groups, tails, 0, out)) out.clear();
    return out;
}

// Complete search for a map decomposition plus compatible labeling: assigns
// every copy a (column group, tail) slot -- each (vertex, group) slot used
// exactly once -- then a per-hyperedge (t,l) bijection. Copies of the same
// hyperedge get lexicographically increasing slots (symmetry breaking).
struct LabelSearch {
    const WeightedHypergraph& h;
    int k;  // number of maps = d-1
    std::vector<int> edge_order;
    std::vector<char> used;  // (vertex, group) slots
    std::vector<std::vector<std::pair<int, int>>> slots;  // per edge: (group, tail)
    bool found = false;

    explicit LabelSearch(const WeightedHypergraph& hg) : h(hg), k(hg.d - 1) {
        edge_order.resize(h.num_edges());
        std::iota(edge_order.begin(), edge_order.end(), 0);
        // most-constrained first: fewer tail choices
        std::stable_sort(edge_order.begin(), edge_order.end(), [&](int a, int b) {
            return h.hyperedges[a].vertices.size() < h.hyperedges[b].vertices.size();
        });
        used.assign(h.num_vertices() * k, 0);
        slots.resize(h.num_edges());
    }

    bool run() { return search_edge(0); }

    bool search_edge(std::size_t ei) {
        if (ei == edge_order.size()) return true;
        const int e = edge_order[ei];
        slots[e].assign(h.copies_of(e), {-1, -1});
        return search_copy(ei, 0, {-1, -1});
    }

    bool search_copy(std::size_t ei, int ci, std::pair<int, int> prev) {
        const int e = edge_order[ei];
        const auto& verts = h.hyperedges[e].vertices;
        if (ci == h.copies_of(e)) {
            // per-edge feasibility of (t,l) before moving on
            EdgeShape shape{static_cast<int>(verts.size()), h.hyperedges[e].weight, h.d};
            std::vector<int> groups, tails;
            for (const auto& s : slots[e]) {
                groups.push_back(s.first);
                tails.push_back(s.second);
            }
            if (assign_tl(shape, groups, tails).empty()) return false;
            return search_edge(ei + 1);
        }
        for (int g = 0; g < k; ++g) {
            for (int v : verts) {
                const std::pair<int, int> slot{g, v};
                if (slot <= prev) continue;  // symmetry breaking within the edge
                if (used[v * k + g]) continue;
                used[v * k + g] = 1;
                slots[e][ci] = slot;
                if (search_copy(ei, ci + 1, slot)) return true;
                used[v * k + g] = 0;
            }
        }
        return false;
    }

    CompatibleLabeling witness() const {
        CompatibleLabeling lab;
        lab.copies.resize(expandable_total());
        int base = 0;
        std::vector<int> copy_base(h.num_edges());
        for (int e = 0; e < h.num_edges(); ++e) {
            copy_base[e] = base;
            base += h.copies_of(e);
        }
        for (int e = 0; e < h.num_edges(); ++e) {
            EdgeShape shape{static_cast<int>(h.hyperedges[e].vertices.size()),
                            h.hyperedges[e].weight, h.d};
            std::vector<int> groups, tails;
            for (const auto& s : slots[e]) {
                groups.push_back(s.first);
                tails.push_back(s.second);
            }
            const auto tl = assign_tl(shape, groups, tails);
            for (std::size_t c = 0; c < tl.size(); ++c) {
                auto& cl = lab.copies[copy_base[e] + static_cast<int>(c)];
                cl.map_index = groups[c];
                cl.tail = tails[c];
                cl.t = tl[c].first;
                cl.l = tl[c].second;
            }
        }
        return lab;
    }

    int expandable_total() const { return h.total_copies(); }
};

} // namespace

bool labeling_valid(const WeightedHypergraph& h, const CompatibleLabeling& lab) {
    const int k = h.d - 1;
    if (static_cast<int>(lab.copies.size()) != h.total_copies()) return false;
    std::vector<int> slot_use(h.num_vertices() * k, 0);
    int idx = 0;
    for (int e = 0; e < h.num_edges(); ++e) {
        const auto& verts = h.hyperedges[e].vertices;
        const int sz = static_cast<int>(verts.size());
        const int copies = h.copies_of(e);
        std::vector<CopyLabel> mine(lab.copies.begin() + idx,
                                    lab.copies.begin() + idx + copies);
        idx += copies;
        std::vector<char> pair_seen(static_cast<std::size_t>(h.d - sz) *
                                        h.hyperedges[e].weight,
                                    0);
        for (std::size_t a = 0; a < mine.size(); ++a) {
            const auto& c = mine[a];
            if (c.map_index < 0 || c.map_index >= k) return false;
            if (std::find(verts.begin(), verts.end(), c.tail) == verts.end()) return false;
            if (c.t < 1 || c.t > h.d - sz) return false;
            if (c.l < 1 || c.l > h.hyperedges[e].weight) return false;
            const int j = c.map_index + 1;
            if (j >= sz && c.t != j - sz + 1) return false;  // zero pattern
            auto& seen = pair_seen[static_cast<std::size_t>(c.t - 1) *
                                       h.hyperedges[e].weight +
                                   (c.l - 1)];
            if (seen) return false;
            seen = 1;
            ++slot_use[c.tail * k + c.map_index];
            for (std::size_t b = 0; b < a; ++b) {
                if (mine[b].l == c.l && mine[b].map_index == c.map_index) return false;  // 2a
                if (mine[b].t == c.t && mine[b].tail == c.tail) return false;            // 2b
            }
        }
    }
    return std::all_of(slot_use.begin(), slot_use.end(), [](int s) { return s == 1; });
}

std::optional<CompatibleLabeling> compatible_labeling(const MapDecomposition& md,
                                                      const WeightedHypergraph& h) {
    const int k = h.d - 1;
    const auto mh = expand(h);
    if (!map_decomposition_valid(mh, k, md))
        throw std::invalid_argument("compatible_labeling: invalid map decomposition");
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        CompatibleLabeling lab;
        lab.copies.resize(mh.num_copies());
        bool ok = true;
        int idx = 0;
        for (int e = 0; e < h.num_edges() && ok; ++e) {
            const int copies = h.copies_of(e);
            EdgeShape shape{static_cast<int>(h.hyperedges[e].vertices.size()),
                            h.hyperedges[e].weight, h.d};
            std::vector<int> groups, tails;
            for (int c = idx; c < idx + copies; ++c) {
                groups.push_back(perm[md.map_index[c]]);
                tails.push_back(md.tail[c]);
            }
            const auto tl = assign_tl(shape, groups, tails);
            if (tl.empty()) {
                ok = false;
                break;
            }
            for (int c = 0; c < copies; ++c) {
                auto& cl = lab.copies[idx + c];
                cl.map_index = groups[c];
                cl.tail = tails[c];
                cl.t = tl[c].first;
                cl.l = tl[c].second;
            }
            idx += copies;
        }
        if (ok) return lab;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::nullopt;
}

namespace {

// underlying-hypergraph configurations that force pins out of general
// position: a vertex subset V' with |V'| < d carrying more than |V'| pins
void general_position_warnings(const WeightedHypergraph& h,
                               std::vector<std::string>& warnings) {
    const int n = h.num_vertices();
    const int cap = std::min(n, h.d - 1);
    std::vector<int> subset;
    auto pin_count = [&](const std::vector<int>& vs) {
        std::vector<char> in(n, 0);
        for (int v : vs) in[v] = 1;
        int pins = 0;
        for (const auto& e : h.hyperedges)
            if (std::all_of(e.vertices.begin(), e.vertices.end(),
                            [&](int v) { return in[v]; }))
                pins += e.weight;
        return pins;
    };
    std::function<void(int, int)> rec = [&](int start, int remaining) {
        if (remaining == 0) {
            const int pins = pin_count(subset);
            if (pins > static_cast<int>(subset.size())) {
                std::string ids;
                for (int v : subset)
                    ids += (ids.empty() ? "" : ",") + h.vertex_ids[v];
                warnings.push_back("vertex subset {" + ids + "} carries " +
                                   std::to_string(pins) +
                                   " pins; pins cannot be in general position");
            }
            return;
        }
        for (int v = start; v <= n - remaining; ++v) {
            subset.push_back(v);
            rec(v + 1, remaining - 1);
            subset.pop_back();
        }
    };
    for (int size = 1; size <= cap; ++size) rec(0, size);
}

// Hyperedges with identical vertex sets produce algebraically identical row
// blocks (same D coefficients), so conditions (2a)/(2b) must treat them as one
// hyperedge with the summed weight. Returns the merged hypergraph plus, per
// original edge, (merged edge index, pin offset inside the merged edge).
std::pair<WeightedHypergraph, std::vector<std::pair<int, int>>> merge_duplicates(
    const WeightedHypergraph& h) {
    WeightedHypergraph merged;
    merged.d = h.d;
    merged.vertex_ids = h.vertex_ids;
    std::vector<std::pair<int, int>> where(h.num_edges());
    for (int k = 0; k < h.num_edges(); ++k) {
        const auto& e = h.hyperedges[k];
        int at = -1;
        for (int m = 0; m < merged.num_edges(); ++m)
            if (merged.hyperedges[m].vertices == e.vertices) {
                at = m;
                break;
            }
        if (at < 0) {
            merged.hyperedges.push_back({e.vertices, e.weight});
            where[k] = {merged.num_edges() - 1, 0};
        } else {
            where[k] = {at, merged.hyperedges[at].weight};
            merged.hyperedges[at].weight += e.weight;
        }
    }
    return {merged, where};
}

// Re-indexes a labeling of the merged hypergraph onto the original copies.
CompatibleLabeling split_labeling(const WeightedHypergraph& h,
                                  const WeightedHypergraph& merged,
                                  const std::vector<std::pair<int, int>>& where,
                                  const CompatibleLabeling& lab) {
    std::vector<int> merged_base(merged.num_edges());
    for (int m = 0, base = 0; m < merged.num_edges(); ++m) {
        merged_base[m] = base;
        base += merged.copies_of(m);
    }
    CompatibleLabeling out;
    out.copies.resize(h.total_copies());
    int idx = 0;
    for (int k = 0; k < h.num_edges(); ++k) {
        const auto& e = h.hyperedges[k];
        const auto [m, offset] = where[k];
        const int mw = merged.hyperedges[m].weight;
        for (int t = 1; t <= h.d - static_cast<int>(e.vertices.size()); ++t)
            for (int l = 1; l <= e.weight; ++l) {
                CopyLabel cl =
                    lab.copies[merged_base[m] + (t - 1) * mw + (offset + l - 1)];
                cl.l = l;  // pin index local to the original edge
                out.copies[idx++] = cl;
            }
    }
    return out;
}

void nesting_warnings(const WeightedHypergraph& h,
                      std::vector<std::string>& warnings) {
    for (int a = 0; a < h.num_edges(); ++a)
        for (int b = 0; b < h.num_edges(); ++b) {
            if (a == b) continue;
            const auto& ea = h.hyperedges[a].vertices;
            const auto& eb = h.hyperedges[b].vertices;
            if (ea.size() >= eb.size()) continue;
            if (std::includes(eb.begin(), eb.end(), ea.begin(), ea.end())) {
                warnings.push_back(
                    "hyperedge spans are nested; derived incidences may force "
                    "pins out of general position");
                return;
            }
        }
}

} // namespace

RigidityVerdict combinatorial_check(const WeightedHypergraph& h) {
    h.validate();
    RigidityVerdict verdict;
    const int k = h.d - 1;
    const auto mh = expand(h);
    const int total = mh.num_copies();
    const int target = k * h.num_vertices();
    const auto [merged, where] = merge_duplicates(h);
    general_position_warnings(merged, verdict.warnings);
    nesting_warnings(merged, verdict.warnings);

    const auto game = pebble_game(mh, k);
    if (game.sparse && total == target) {
        LabelSearch search(merged);
        if (search.run()) {
            verdict.cls = RigidityClass::MinimallyRigid;
            verdict.labeling = merged.num_edges() == h.num_edges()
                                   ? search.witness()
                                   : split_labeling(h, merged, where, search.witness());
        } else {
            verdict.cls = RigidityClass::Mixed;
            verdict.warnings.push_back(
                "tight counts but no compatible labeling exists; "
                "the system is generically dependent and flexible");
        }
    } else if (game.sparse) {
        verdict.cls = RigidityClass::Flexible;
    } else {
        // count the greedily independent copies to separate rigid-redundant
        // from mixed cases
        PebbleGame g(mh, k, 0);
        int independent = 0;
        for (int c = 0; c < mh.num_copies(); ++c) independent += g.try_insert(c);
        verdict.cls = (independent == target) ? RigidityClass::Overconstrained
                                              : RigidityClass::Mixed;
    }
    return verdict;
}

double pure_condition_value(const Framework& fr) {
    const auto m = assemble(fr);
    if (m.rows() != m.cols())
        throw std::invalid_argument("pure condition requires a square rigidity matrix");
    return m.entries.partialPivLu().determinant();
}

double pure_condition_relative(const Framework& fr) {
    const auto m = assemble(fr);
    if (m.rows() != m.cols())
        throw std::invalid_argument("pure condition requires a square rigidity matrix");
    const double det = m.entries.partialPivLu().determinant();
    double norm_product = 1.0;
    for (int r = 0; r < m.rows(); ++r) {
        const double nrm = m.entries.row(r).norm();
        if (nrm == 0.0) return 0.0;
        norm_product *= nrm;
    }
    return std::abs(det) / norm_product;
}

Eigen::MatrixXd flex_basis(const Framework& fr) {
    const int cols = (fr.d() - 1) * fr.instance.hypergraph.num_vertices();
    if (fr.instance.hypergraph.num_edges() == 0)
        return Eigen::MatrixXd::Identity(cols, cols);
    const auto m = assemble(fr);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m.entries, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff =
        (sv.size() && sv(0) > 0)
            ? sv(0) * kRankTolerance * static_cast<double>(std::max(m.rows(), m.cols()))
            : 0.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) rank += (sv(i) > cutoff);
    return svd.matrixV().rightCols(cols - rank);
}

} // namespace rigidkit
