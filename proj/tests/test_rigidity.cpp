#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rigidkit/prime_field.hpp"
#include "rigidkit/rigidity.hpp"
#include "rigidkit/rng.hpp"

#include <Eigen/Dense>

using namespace rigidkit;

namespace {

WeightedHypergraph small_rigid() {
    WeightedHypergraph h;
    h.d = 3;
    h.vertex_ids = {"v1", "v2", "v3", "v4"};
    h.hyperedges = {{{0}, 1}, {{1}, 1}, {{0, 2}, 1}, {{1, 3}, 1}, {{2, 3}, 2}};
    return h;
}

// random chart points plus pins sampled inside each hyperedge's span, so the
// resulting framework is exactly consistent
Framework random_framework(const WeightedHypergraph& h, Rng& rng) {
    Framework fr;
    fr.instance.hypergraph = h;
    fr.points.resize(h.num_vertices(), h.d - 1);
    for (int v = 0; v < h.num_vertices(); ++v)
        for (int j = 0; j < h.d - 1; ++j) fr.points(v, j) = rng.uniform(-2.0, 2.0);
    fr.instance.pins.resize(h.num_edges());
    for (int k = 0; k < h.num_edges(); ++k) {
        const auto& verts = h.hyperedges[k].vertices;
        for (int l = 0; l < h.hyperedges[k].weight; ++l) {
            Eigen::VectorXd pin = Eigen::VectorXd::Zero(h.d - 1);
            double total = 0.0;
            std::vector<double> b(verts.size());
            for (std::size_t i = 0; i < verts.size(); ++i) {
                b[i] = rng.uniform(0.1, 1.0);
                total += b[i];
            }
            for (std::size_t i = 0; i < verts.size(); ++i)
                pin += (b[i] / total) * fr.points.row(verts[i]).transpose();
            fr.instance.pins[k].push_back(pin);
        }
    }
    return fr;
}

} // namespace

TEST_CASE("barycentric coordinates") {
    Eigen::MatrixXd pts(2, 2);
    pts << 0, 0, 2, 2;
    Eigen::VectorXd pin(2);
    pin << 0.5, 0.5;
    const auto b = barycentric(pts, pin);
    CHECK(b(0) == doctest::Approx(0.75));
    CHECK(b(1) == doctest::Approx(0.25));

    pin << 1.0, 0.0;  // off the line
    CHECK_THROWS_WITH_AS(barycentric(pts, pin), doctest::Contains("outside"),
                         std::invalid_argument);

    Eigen::MatrixXd dup(2, 2);
    dup << 1, 1, 1, 1;
    CHECK_THROWS_WITH_AS(barycentric(dup, pin), doctest::Contains("dependent"),
                         std::invalid_argument);
}

TEST_CASE("hand-checked row: collinearity constraint in d=3") {
    Eigen::MatrixXd pts(2, 2);
    pts << 0, 0, 2, 2;
    Eigen::VectorXd pin(2);
    pin << 1, 1;
    CHECK(constraint_value(pts, pin, 1) == doctest::Approx(0.0));
    const Eigen::MatrixXd grad = constraint_gradient(pts, pin, 1);
    // det [[p1 - q], [p2 - q]] with q = (1,1): d/dp1 = (p2y-qy, -(p2x-qx)) =
    // (1,-1) and d/dp2 = (-(p1y-qy), p1x-qx) = (1,-1), up to one overall sign
    CHECK(std::abs(grad(0, 0)) == doctest::Approx(1.0));
    CHECK(grad(0, 0) == doctest::Approx(grad(1, 0)));
    CHECK(grad(0, 1) == doctest::Approx(grad(1, 1)));
    CHECK(grad(0, 0) == doctest::Approx(-grad(0, 1)));
}

TEST_CASE("simplified rows are scalar multiples of the raw Jacobian rows") {
    Rng rng(31337);
    const auto h = small_rigid();
    for (int trial = 0; trial < 25; ++trial) {
        const Framework fr = random_framework(h, rng);
        const RigidityMatrix simp = assemble(fr);
        const RigidityMatrix raw = assemble_raw(fr);
        REQUIRE(simp.rows() == raw.rows());
        for (int r = 0; r < simp.rows(); ++r) {
            const double denom = simp.entries.row(r).norm();
            REQUIRE(denom > 0);
            const double c =
                raw.entries.row(r).dot(simp.entries.row(r)) / (denom * denom);
            const double dev = (raw.entries.row(r) - c * simp.entries.row(r)).norm() /
                               raw.entries.row(r).norm();
            CHECK(dev <= 1e-8);
        }
    }
}

TEST_CASE("analytic constraint gradient matches finite differences") {
    Rng rng(777);
    const auto h = small_rigid();
    const Framework fr = random_framework(h, rng);
    const int k = 4;
    Eigen::MatrixXd pts = fr.edge_points(k);
    const Eigen::VectorXd pin = fr.instance.pins[k][0];
    const Eigen::MatrixXd grad = constraint_gradient(pts, pin, 1);
    const double eps = 1e-6;
    for (int i = 0; i < pts.rows(); ++i)
        for (int j = 0; j < pts.cols(); ++j) {
            Eigen::MatrixXd hi = pts, lo = pts;
            hi(i, j) += eps;
            lo(i, j) -= eps;
            const double fd =
                (constraint_value(hi, pin, 1) - constraint_value(lo, pin, 1)) /
                (2 * eps);
            CHECK(grad(i, j) == doctest::Approx(fd).epsilon(1e-6));
        }
}

TEST_CASE("prime field arithmetic") {
    const Fp61 a(123456789), b(987654321);
    CHECK((a * b).value() == (static_cast<__int128>(123456789) * 987654321) %
                                 ((static_cast<std::uint64_t>(1) << 61) - 1));
    CHECK((a * a.inverse()).value() == 1);
    CHECK((a - a).value() == 0);
    CHECK((Fp61(0) - Fp61(1)).value() == (static_cast<std::uint64_t>(1) << 61) - 2);
}

TEST_CASE("rank backends agree on the reference graph and its weakenings") {
    const auto h = small_rigid();
    CHECK(generic_rank(h, 3, 5, RankBackend::PrimeField) == 8);
    CHECK(generic_rank(h, 3, 5, RankBackend::Float) == 8);

    auto weak = h;
    weak.hyperedges[4].weight = 1;  // one pin fewer
    CHECK(generic_rank(weak, 3, 5, RankBackend::PrimeField) == 7);
    CHECK(generic_rank(weak, 3, 5, RankBackend::Float) == 7);
}

TEST_CASE("combinatorial check classifies the reference graph and variants") {
    const auto h = small_rigid();
    const auto verdict = combinatorial_check(h);
    CHECK(verdict.cls == RigidityClass::MinimallyRigid);
    REQUIRE(verdict.labeling.has_value());
    CHECK(labeling_valid(h, *verdict.labeling));

    auto flex = h;
    flex.hyperedges[4].weight = 1;
    CHECK(combinatorial_check(flex).cls == RigidityClass::Flexible);

    auto over = h;
    over.hyperedges.push_back({{0, 3}, 1});
    CHECK(combinatorial_check(over).cls == RigidityClass::Overconstrained);
}

TEST_CASE("forced non-generic pins produce a general-position warning") {
    // d=4 system: tight with a
    // valid labeling, but three hyperedges with four pins share only three
    // vertices, so real pins can never be generic
    WeightedHypergraph h;
    h.d = 4;
    h.vertex_ids = {"v1", "v2", "v3", "v4"};
    h.hyperedges = {{{0, 1}, 2}, {{0, 2}, 1}, {{1, 2}, 1}, {{0, 3}, 1}, {{1, 3}, 1}};
    CHECK(expand(h).num_copies() == 12);
    const auto verdict = combinatorial_check(h);
    CHECK(verdict.cls == RigidityClass::MinimallyRigid);
    REQUIRE_FALSE(verdict.warnings.empty());
    // the numeric oracle sees the rank deficit that the forced special
    // position causes; the warning explains the oracle disagreement
    CHECK(generic_rank(h, 3, 11) < 12);
}

TEST_CASE("flex basis has one column per missing rank") {
    Rng rng(4242);
    auto h = small_rigid();
    h.hyperedges[4].weight = 1;
    const Framework fr = random_framework(h, rng);
    const Eigen::MatrixXd basis = flex_basis(fr);
    CHECK(basis.cols() == 1);
    // kernel vectors annihilate the rigidity matrix
    const RigidityMatrix m = assemble(fr);
    CHECK((m.entries * basis).norm() <= 1e-8 * m.entries.norm());
}

TEST_CASE("pure condition separates generic from degenerate frameworks") {
    Rng rng(2024);
    const auto h = small_rigid();
    const Framework generic = random_framework(h, rng);
    const double pc = pure_condition_relative(generic);
    CHECK(std::abs(pc) > kPureConditionTolerance);

    // push the two pins of the weight-2 hyperedge together
    Framework degen = generic;
    degen.instance.pins[4][1] =
        degen.instance.pins[4][0] + Eigen::VectorXd::Constant(2, 1e-12);
    const double pc2 = pure_condition_relative(degen);
    CHECK(std::abs(pc2) < std::abs(pc) * 1e-6);
}
