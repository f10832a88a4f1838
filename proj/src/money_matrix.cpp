#include "wtn/money_matrix.hpp"

#include <cmath>
#include <string>

#include "wtn/error.hpp"

namespace wtn {

MoneyMatrix::MoneyMatrix(int year, CountryTable table, DenseMatrix values)
    : year_(year), table_(std::move(table)), values_(std::move(values)) {
    const std::size_t n = table_.size();
    if (values_.size() != n) {
        throw Error("money matrix is " + std::to_string(values_.size()) + "x" + std::to_string(values_.size()) +
                    " but the country table has " + std::to_string(n) + " entries");
    }
    bool any_positive = false;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = values_(i, j);
            if (!std::isfinite(v) || v < 0.0) {
                throw Error("money matrix entry (" + table_.iso(i) + "," + table_.iso(j) +
                            ") must be finite and non-negative");
            }
            if (i == j && v != 0.0) throw Error("money matrix has self-trade for " + table_.iso(i));
            any_positive = any_positive || v > 0.0;
        }
    }
    if (!any_positive) throw Error("money matrix has no positive flow");
}

double MoneyMatrix::total() const {
    double sum = 0.0;
    for (double v : values_.data()) sum += v;
    return sum;
}

MoneyMatrix scale_matrix(const MoneyMatrix& m, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error("scale factor must be positive and finite");
    DenseMatrix scaled = m.values();
    for (double& v : scaled.data()) v *= lambda;
    return MoneyMatrix(m.year(), m.table(), std::move(scaled));
}

}  // namespace wtn
