#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rigidkit/construction.hpp"
#include "rigidkit/drplan.hpp"
#include "rigidkit/rng.hpp"

#include <numeric>
#include <set>

using namespace rigidkit;

namespace {

WeightedHypergraph small_rigid() {
    WeightedHypergraph h;
    h.d = 3;
    h.vertex_ids = {"v1", "v2", "v3", "v4"};
    h.hyperedges = {{{0}, 1}, {{1}, 1}, {{0, 2}, 1}, {{1, 3}, 1}, {{2, 3}, 2}};
    return h;
}

// consistent pins sampled from a hidden realization
PinnedInstance planted_instance(const WeightedHypergraph& h, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd pts(h.num_vertices(), h.d - 1);
    for (int v = 0; v < h.num_vertices(); ++v)
        for (int j = 0; j < h.d - 1; ++j) pts(v, j) = rng.uniform(-2.0, 2.0);
    PinnedInstance inst;
    inst.hypergraph = h;
    inst.pins.resize(h.num_edges());
    for (int k = 0; k < h.num_edges(); ++k) {
        const auto& verts = h.hyperedges[k].vertices;
        for (int l = 0; l < h.hyperedges[k].weight; ++l) {
            Eigen::VectorXd pin = Eigen::VectorXd::Zero(h.d - 1);
            double total = 0.0;
            std::vector<double> b(verts.size());
            for (auto& bi : b) {
                bi = rng.uniform(0.1, 1.0);
                total += bi;
            }
            for (std::size_t i = 0; i < verts.size(); ++i)
                pin += (b[i] / total) * pts.row(verts[i]).transpose();
            inst.pins[k].push_back(pin);
        }
    }
    return inst;
}

} // namespace

TEST_CASE("residual jacobian matches finite differences") {
    const auto inst = planted_instance(small_rigid(), 17);
    Rng rng(18);
    Eigen::MatrixXd pts(4, 2);
    for (int v = 0; v < 4; ++v)
        for (int j = 0; j < 2; ++j) pts(v, j) = rng.uniform(-1.0, 1.0);
    std::vector<int> edges(5), free_verts(4);
    std::iota(edges.begin(), edges.end(), 0);
    std::iota(free_verts.begin(), free_verts.end(), 0);
    const Eigen::MatrixXd jac = residual_jacobian(inst, pts, edges, free_verts);
    const double eps = 1e-6;
    for (int v = 0; v < 4; ++v)
        for (int j = 0; j < 2; ++j) {
            Eigen::MatrixXd hi = pts, lo = pts;
            hi(v, j) += eps;
            lo(v, j) -= eps;
            const Eigen::VectorXd fd = (residual_vector(inst, hi, edges) -
                                        residual_vector(inst, lo, edges)) /
                                       (2 * eps);
            const int col = v * 2 + j;
            for (int r = 0; r < jac.rows(); ++r)
                CHECK(jac(r, col) == doctest::Approx(fd(r)).epsilon(1e-6));
        }
}

TEST_CASE("solve recovers a consistent realization") {
    const auto inst = planted_instance(small_rigid(), 5);
    SolveConfig cfg;
    cfg.seed = 2;
    cfg.restarts = 32;
    const auto rep = solve(inst, cfg);
    REQUIRE(rep.converged);
    CHECK(rep.residual <= cfg.tol);
    const Framework fr{inst, rep.points};
    CHECK(residual(fr) <= 1e-8);
    CHECK_NOTHROW(fr.validate());
}

TEST_CASE("solve with frozen vertices keeps them fixed") {
    const auto inst = planted_instance(small_rigid(), 5);
    SolveConfig cfg;
    cfg.seed = 2;
    cfg.restarts = 32;
    const auto rep = solve(inst, cfg);
    REQUIRE(rep.converged);
    Eigen::MatrixXd init = rep.points;
    init.row(3).setConstant(0.123);  // perturb only the free vertex
    const auto rep2 = solve(inst, cfg, init, {0, 1, 2});
    REQUIRE(rep2.converged);
    CHECK(rep2.points.topRows(3) == rep.points.topRows(3));
}

TEST_CASE("solver failure is reported, not silently retried") {
    // inconsistent overconstrained system: 3 pins forced onto the line of a
    // single vertex pair cannot all be met
    WeightedHypergraph h;
    h.d = 3;
    h.vertex_ids = {"a", "b"};
    h.hyperedges = {{{0, 1}, 2}, {{0}, 1}, {{1}, 1}};
    PinnedInstance inst;
    inst.hypergraph = h;
    Eigen::VectorXd p1(2), p2(2), p3(2), p4(2);
    p1 << 0, 0;
    p2 << 1, 0;
    p3 << 0, 1;
    p4 << 1, 1;
    inst.pins = {{p1, p2}, {p3}, {p4}};
    SolveConfig cfg;
    cfg.restarts = 4;
    const auto rep = solve(inst, cfg);
    CHECK_FALSE(rep.converged);
    CHECK(rep.restarts_used == 4);
}

TEST_CASE("stage-1 sizes") {
    CHECK(stage1_size(3, 2).k == 5);
    CHECK(stage1_size(3, 2).num_vertices == 5);
    CHECK(stage1_size(3, 2).num_edges == 10);
    CHECK(stage1_size(4, 2).k == 2);
    CHECK(stage1_size(4, 3).k == 6);
    CHECK(stage1_size(5, 2).k == 2);
    CHECK_THROWS_AS(stage1_size(3, 3), std::invalid_argument);
}

TEST_CASE("construction output is tight at every scale") {
    for (const auto& [d, s, m] : {std::tuple{3, 2, 10}, {3, 2, 24}, {3, 2, 25},
                                  {4, 2, 6}, {4, 2, 9}, {4, 2, 33}, {4, 3, 18},
                                  {3, 2, 200}}) {
        CAPTURE(d);
        CAPTURE(s);
        CAPTURE(m);
        const auto con = build_construction(d, s, m, 0);
        const auto& h = con.hypergraph;
        CHECK_NOTHROW(h.validate(false));
        CHECK(is_connected(h));
        CHECK(is_tight(expand(h), d - 1));
        // every consumed pin is one edge; count identity of the tight system
        CHECK((d - s) * con.trace.pins_consumed == (d - 1) * h.num_vertices());
        CHECK(con.trace.pins_consumed + con.trace.leftover == m);
        CHECK(con.trace.leftover < d - 1);
        for (const auto& e : h.hyperedges) {
            CHECK(static_cast<int>(e.vertices.size()) == s);
            CHECK(e.weight == 1);
        }
    }
}

TEST_CASE("construction below the stage-1 minimum names the minimum") {
    CHECK_THROWS_WITH_AS(build_construction(3, 2, 9, 0), doctest::Contains("10"),
                         std::invalid_argument);
}

TEST_CASE("construction blocks replicate the stage-2 template") {
    const auto con = build_construction(3, 2, 24, 0);
    CHECK(con.hypergraph.num_vertices() == 12);
    CHECK(con.hypergraph.num_edges() == 24);
    REQUIRE(con.trace.blocks.size() == 7);
    const auto& b1 = con.trace.blocks.front();
    for (std::size_t i = 1; i < con.trace.blocks.size(); ++i) {
        const auto& bi = con.trace.blocks[i];
        CHECK(bi.new_vertices.size() == b1.new_vertices.size());
        REQUIRE(bi.edges.size() == b1.edges.size());
        // base vertices are shared, new vertices are the block's own
        for (std::size_t j = 0; j < bi.edges.size(); ++j) {
            const auto& et = con.hypergraph.hyperedges[b1.edges[j]].vertices;
            const auto& ei = con.hypergraph.hyperedges[bi.edges[j]].vertices;
            REQUIRE(et.size() == ei.size());
            for (std::size_t t = 0; t < et.size(); ++t) {
                const bool base_t = std::find(b1.new_vertices.begin(),
                                              b1.new_vertices.end(),
                                              et[t]) == b1.new_vertices.end();
                if (base_t)
                    CHECK(et[t] == ei[t]);
                else
                    CHECK(std::find(bi.new_vertices.begin(), bi.new_vertices.end(),
                                    ei[t]) != bi.new_vertices.end());
            }
        }
    }
}

TEST_CASE("construction is deterministic in the seed") {
    const auto a = build_construction(3, 2, 24, 42);
    const auto b = build_construction(3, 2, 24, 42);
    REQUIRE(a.hypergraph.num_edges() == b.hypergraph.num_edges());
    for (int k = 0; k < a.hypergraph.num_edges(); ++k)
        CHECK(a.hypergraph.hyperedges[k].vertices ==
              b.hypergraph.hyperedges[k].vertices);
}

TEST_CASE("incremental solve realizes planted construction pins") {
    const auto con = build_construction(3, 2, 24, 1);
    const auto inst = planted_instance(con.hypergraph, 9);
    std::vector<Eigen::VectorXd> pins;
    for (const auto& edge_pins : inst.pins) pins.push_back(edge_pins[0]);
    SolveConfig cfg;
    cfg.seed = 3;
    cfg.restarts = 16;
    const auto rep = incremental_solve(con, pins, cfg);
    REQUIRE(rep.converged);
    CHECK(residual(rep.framework) <= cfg.tol * 5);
}

TEST_CASE("drplan structural invariants") {
    for (const auto& h : {small_rigid(), build_construction(3, 2, 10, 0).hypergraph,
                          build_construction(3, 2, 14, 0).hypergraph}) {
        const auto plan = drplan(h);
        REQUIRE_FALSE(plan.nodes.empty());
        // the root covers the whole system
        CHECK(static_cast<int>(plan.nodes[0].vertices.size()) == h.num_vertices());
        CHECK(static_cast<int>(plan.nodes[0].edges.size()) == h.num_edges());
        int max_children = 0;
        for (const auto& node : plan.nodes) {
            max_children = std::max(max_children,
                                    static_cast<int>(node.children.size()));
            if (node.children.empty()) {
                CHECK(node.edges.size() == 1);
                continue;
            }
            for (int cid : node.children) {
                const auto& child = plan.nodes[cid];
                CHECK(child.vertices.size() <= node.vertices.size());
                CHECK(std::includes(node.vertices.begin(), node.vertices.end(),
                                    child.vertices.begin(), child.vertices.end()));
                if (child.edges.size() > 1) {
                    // internal children are connected tight subsystems
                    const auto sub = induced_subgraph(h, child.vertices);
                    CHECK(is_connected(sub));
                    CHECK(is_tight(expand(sub), h.d - 1));
                }
            }
        }
        CHECK(plan.max_fan_in == max_children);
    }
}

TEST_CASE("drplan rejects unsuitable inputs") {
    auto flex = small_rigid();
    flex.hyperedges[4].weight = 1;
    CHECK_THROWS_AS(drplan(flex), std::invalid_argument);
}

TEST_CASE("max rigid subsystem keeps sparse inputs whole") {
    const auto h = small_rigid();
    const auto res = max_rigid_subsystem(h);
    CHECK(res.dropped.empty());
    CHECK(res.hypergraph.num_edges() == h.num_edges());
    CHECK(res.hypergraph.total_copies() == h.total_copies());
}

TEST_CASE("max rigid subsystem drops just enough pins") {
    auto h = small_rigid();
    h.hyperedges.push_back({{0, 3}, 1});  // one copy too many
    const auto res = max_rigid_subsystem(h);
    REQUIRE(res.dropped.size() == 1);
    CHECK(res.dropped[0].first == 5);
    const auto mh = expand(res.hypergraph);
    CHECK(pebble_game(mh, h.d - 1).sparse);
    CHECK(is_tight(mh, h.d - 1));
    // pin-atomicity: a weight-2 edge loses both or neither copy of a pin
    for (std::size_t k = 0; k < res.kept_pins.size(); ++k)
        CHECK(static_cast<int>(res.kept_pins[k].size()) +
                  static_cast<int>(std::count_if(
                      res.dropped.begin(), res.dropped.end(),
                      [&](auto& p) { return p.first == static_cast<int>(k); })) ==
              h.hyperedges[k].weight);
}
