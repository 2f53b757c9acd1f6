#include "rigidkit/prime_field.hpp"

namespace rigidkit {

int rank_mod_p(MatrixFp m) {
    const int rows = static_cast<int>(m.rows());
    const int cols = static_cast<int>(m.cols());
    int rank = 0;
    for (int col = 0; col < cols && rank < rows; ++col) {
        int pivot = -1;
        for (int r = rank; r < rows; ++r) {
            if (!m(r, col).is_zero()) {
                pivot = r;
                break;
            }
        }
        if (pivot < 0) continue;
        m.row(pivot).swap(m.row(rank));
        const Fp61 inv = m(rank, col).inverse();
        for (int r = rank + 1; r < rows; ++r) {
            if (m(r, col).is_zero()) continue;
            const Fp61 f = m(r, col) * inv;
            for (int c = col; c < cols; ++c) m(r, c) -= f * m(rank, c);
        }
        ++rank;
    }
    return rank;
}

} // namespace rigidkit
