#ifndef RIGIDKIT_DICTLEARN_HPP
#define RIGIDKIT_DICTLEARN_HPP

#include "rigidkit/construction.hpp"

#include <string>
#include <vector>

namespace rigidkit {

// m data points in ambient dimension d, each assumed to lie on an unknown
// s-dimensional subspace spanned by s dictionary vectors. `support` (fitted
// mode only) names those vectors per point, as indices into `vertex_ids`.
struct Dataset {
    int d = 0;
    int s = 0;
    Eigen::MatrixXd points;  // m x d, rows nonzero and finite

    std::vector<std::string> vertex_ids;       // empty unless supports given
    std::vector<std::vector<int>> support;     // per point, sorted, size <= s

    int size() const { return static_cast<int>(points.rows()); }
    bool has_support() const { return !support.empty(); }
    void validate() const;
};

struct Dictionary {
    int d = 0;
    int s = 0;
    Eigen::MatrixXd vectors;  // n x d, unit rows, first nonzero coordinate > 0
    std::vector<std::string> vertex_ids;

    // per data point of the learned-from dataset
    std::vector<std::vector<int>> supports;     // indices into `vectors` rows
    std::vector<Eigen::VectorXd> coefficients;  // dense over the support
    std::vector<double> residuals;              // relative reconstruction error

    int size() const { return static_cast<int>(vectors.rows()); }
};

// ceil((d-s) m / (d-1)): the generic lower bound on dictionary size
int size_bound(int m, int d, int s);

// Affine chart through a seeded random rotation: to_chart(x) = y_1..d-1 / y_d
// with y = R x. The rotation keeps generic data away from the chart boundary;
// lift() inverts it and returns a sign-fixed unit vector parallel to x.
struct ChartMap {
    Eigen::MatrixXd rot;  // d x d orthogonal

    static ChartMap random(int d, std::uint64_t seed);
    Eigen::VectorXd to_chart(const Eigen::VectorXd& x) const;
    Eigen::VectorXd lift(const Eigen::VectorXd& q) const;
};

struct LearnReport {
    Dictionary dictionary;
    Construction construction;
    bool converged = false;
    int failed_block = -2;  // -2 = n/a, -1 = stage 1, i >= 0 = block i
    int used = 0;           // data points consumed as pins
    int leftover = 0;       // points beyond the last stage boundary
};

// The O(m) pipeline: chart the data, build the tight hypergraph, realize it
// incrementally, lift the realization to unit dictionary vectors and fit the
// per-point coefficients. Throws on invalid sizes; solver failure is reported.
LearnReport learn_random(const Dataset& X, int s, const SolveConfig& cfg);

struct FittedReport {
    Dictionary dictionary;
    bool converged = false;
    // residuals of pins excluded from the solved core (overconstrained input)
    std::vector<double> validation_residuals;
    std::vector<std::string> warnings;
};

// Fitted mode: the support hypergraph is given. An overconstrained system is
// reduced to a maximum rigid core; leftover pins are checked after the solve
// and breaches are flagged as non-generic-data warnings.
FittedReport learn_fitted(const Dataset& X, const SolveConfig& cfg);

struct VerifyReport {
    std::vector<double> errors;      // relative reconstruction error per point
    std::vector<int> support_sizes;  // nonzero count of each theta
    bool pass = false;
};

VerifyReport verify(const Dataset& X, const Dictionary& D, int s, double tol);

// document IO (schemas shared with the command-line tool)
Dataset parse_dataset(const std::string& text);          // structured document
Dataset parse_delimited(const std::string& text);        // one point per row
std::string serialize_dataset(const Dataset& X);
Dictionary parse_dictionary(const std::string& text);
std::string serialize_dictionary(const Dictionary& D);

} // namespace rigidkit

#endif
