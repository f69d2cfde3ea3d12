#include <algorithm>

#include "yieldrisk/mixed_model.hpp"

namespace yieldrisk {

// Z = (L L')^{-1} satisfies, for i >= j on the pattern of L,
//   Z(i,j) = delta_ij / L(j,j)^2 - (1 / L(j,j)) * sum_{k > j, L(k,j) != 0} L(k,j) Z(i,k).
// Every Z(i,k) needed lies on the pattern of L (columns k > j), so the
// recurrence runs right to left and stores Z in L's layout.
Eigen::VectorXd selected_inverse_diagonal(const Eigen::SparseMatrix<double>& L) {
    const Eigen::Index n = L.cols();
    const int* outer = L.outerIndexPtr();
    const int* inner = L.innerIndexPtr();
    const double* lv = L.valuePtr();
    std::vector<double> z(static_cast<std::size_t>(L.nonZeros()), 0.0);

    // Z(row, col) with row >= col; the pattern guarantees presence.
    auto lookup = [&](int row, int col) -> double {
        const int* b = inner + outer[col];
        const int* e = inner + outer[col + 1];
        const int* it = std::lower_bound(b, e, row);
        return z[static_cast<std::size_t>(it - inner)];
    };

    for (Eigen::Index jj = n - 1; jj >= 0; --jj) {
        const int j = static_cast<int>(jj);
        const int begin = outer[j];
        const int end = outer[j + 1];
        const double ljj = lv[begin];  // diagonal stored first
        // Off-diagonal entries, bottom-up so every Z(i,k) with k > i in this
        // column's pattern is already available via column i.
        for (int p = end - 1; p > begin; --p) {
            const int i = inner[p];
            double acc = 0.0;
            for (int r = begin + 1; r < end; ++r) {
                const int k = inner[r];
                const double zik = (k >= i) ? lookup(k, i) : lookup(i, k);
                acc += lv[r] * zik;
            }
            z[static_cast<std::size_t>(p)] = -acc / ljj;
        }
        double acc = 0.0;
        for (int r = begin + 1; r < end; ++r) acc += lv[r] * z[static_cast<std::size_t>(r)];
        z[static_cast<std::size_t>(begin)] = 1.0 / (ljj * ljj) - acc / ljj;
    }

    Eigen::VectorXd diag(n);
    for (Eigen::Index j = 0; j < n; ++j) diag[j] = z[static_cast<std::size_t>(outer[j])];
    return diag;
}

}  // namespace yieldrisk
