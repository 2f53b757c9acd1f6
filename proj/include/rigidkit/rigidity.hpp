#ifndef RIGIDKIT_RIGIDITY_HPP
#define RIGIDKIT_RIGIDITY_HPP

#include "rigidkit/hypergraph.hpp"
#include "rigidkit/sparsity.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rigidkit {

// A realization of a pinned instance: one chart point per vertex. Rows of
// `points` follow vertex order, d-1 coordinates each.
struct Framework {
    PinnedInstance instance;
    Eigen::MatrixXd points;

    int d() const { return instance.hypergraph.d; }
    // chart coordinates of the vertices of hyperedge k, stacked as rows
    Eigen::MatrixXd edge_points(int k) const;
    // throws if some pin is outside the affine span of its hyperedge's points
    void validate(double tol = 1e-8) const;
};

// Barycentric coordinates b of `pin` w.r.t. the rows of `points`
// (sum b_i = 1, sum b_i points_i = pin). Throws std::invalid_argument when the
// points are affinely dependent or the pin lies outside their span.
Eigen::VectorXd barycentric(const Eigen::MatrixXd& points, const Eigen::VectorXd& pin,
                            double tol = 1e-8);

struct RowLabel {
    int edge = 0;
    int t = 1;  // 1-based minor index, 1 <= t <= d - |e_k|
    int l = 1;  // 1-based pin index, 1 <= l <= m_k
};

// Dense rigidity matrix, rows ordered by (edge, t, l). Columns are vertex
// major: column(v, j) holds coordinate group j of vertex v.
struct RigidityMatrix {
    Eigen::MatrixXd entries;
    std::vector<RowLabel> row_labels;
    int d = 0;
    int num_vertices = 0;

    static int column(int v, int j, int d) { return v * (d - 1) + (j - 1); }
    int rows() const { return static_cast<int>(entries.rows()); }
    int cols() const { return static_cast<int>(entries.cols()); }
};

// Simplified rows: entry for vertex i, coordinate j is D^k_{t,j} b^{k,l}_i.
RigidityMatrix assemble(const Framework& fr);

// Raw Jacobian of the minor equations, for cross-checking: row (k,t,l), entry
// for vertex i, coordinate j is the partial derivative of
// det(E^k_l[., C(t)]) with respect to p^k_{i,j}.
RigidityMatrix assemble_raw(const Framework& fr);

// Single constraint: value of det(E^k_l[., C(t)]) for one hyperedge's point
// block (rows = chart points of the edge's vertices) and one pin; t is 1-based.
double constraint_value(const Eigen::MatrixXd& edge_points, const Eigen::VectorXd& pin,
                        int t);
// Its gradient with respect to the point block, same shape as edge_points.
Eigen::MatrixXd constraint_gradient(const Eigen::MatrixXd& edge_points,
                                    const Eigen::VectorXd& pin, int t);

// Generic assembly kernel shared by the float and prime-field rank backends:
// points is |V| x (d-1), bary[k][l] the barycentric vector of pin (k,l).
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> assemble_generic(
    const WeightedHypergraph& h,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& points,
    const std::vector<std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>>& bary);

enum class RankBackend { Float, PrimeField };

// Maximum rank of the rigidity matrix over `trials` random evaluations of
// points and barycentric coefficients. The prime-field backend is exact per
// evaluation; the float backend thresholds singular values.
int generic_rank(const WeightedHypergraph& h, int trials, std::uint64_t seed,
                 RankBackend backend = RankBackend::PrimeField);

enum class RigidityClass { MinimallyRigid, Flexible, Overconstrained, Mixed };
std::string to_string(RigidityClass c);

// Witness for the main theorem: per copy (in expansion order) the map / column
// group, tail vertex, and row label (t,l).
struct CopyLabel {
    int map_index = 0;  // column group, 0-based
    int tail = 0;
    int t = 1;
    int l = 1;
};
struct CompatibleLabeling {
    std::vector<CopyLabel> copies;
};

// Checks the labeling against the theorem's conditions (2a), (2b), the
// structural zero pattern, and the map-decomposition invariants.
bool labeling_valid(const WeightedHypergraph& h, const CompatibleLabeling& lab);

// Labeling for one fixed map decomposition: per-hyperedge assignment of (t,l)
// to copies, trying map-to-column-group associations; nullopt on failure.
std::optional<CompatibleLabeling> compatible_labeling(const MapDecomposition& md,
                                                      const WeightedHypergraph& h);

struct RigidityVerdict {
    RigidityClass cls = RigidityClass::Flexible;
    int numeric_rank = -1;  // filled by callers that also run the rank oracle
    std::optional<CompatibleLabeling> labeling;
    Eigen::MatrixXd flex_basis;  // optional, columns = kernel vectors
    std::vector<std::string> warnings;
};

// The main combinatorial decision: counts + pebble game + complete search for
// a map decomposition with a compatible labeling. Pure hypergraph computation.
RigidityVerdict combinatorial_check(const WeightedHypergraph& h);

// Determinant of the (square) rigidity matrix. Near-zero magnitude relative to
// the product of row norms flags a non-generic framework.
double pure_condition_value(const Framework& fr);
double pure_condition_relative(const Framework& fr);

// Orthonormal basis of the rigidity-matrix kernel, one column per flex.
Eigen::MatrixXd flex_basis(const Framework& fr);

// Relative singular-value cutoff for the float rank backend.
inline constexpr double kRankTolerance = 1e-9;
// Relative |det| cutoff below which a framework is flagged non-generic.
inline constexpr double kPureConditionTolerance = 1e-9;

} // namespace rigidkit

#endif
