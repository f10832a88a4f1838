#pragma once

#include <cstddef>
#include <vector>

#include "wtn/country_table.hpp"

namespace wtn {

/// Row-major dense square matrix of doubles.
class DenseMatrix {
public:
    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

    std::size_t size() const noexcept { return n_; }
    double& operator()(std::size_t row, std::size_t col) { return data_[row * n_ + col]; }
    double operator()(std::size_t row, std::size_t col) const { return data_[row * n_ + col]; }

    const std::vector<double>& data() const noexcept { return data_; }
    std::vector<double>& data() noexcept { return data_; }

    bool operator==(const DenseMatrix&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

/// Annual bilateral trade flows. Entry (importer, exporter) holds the value
/// exported from `exporter` to `importer`, i.e. values(c', c) = M_{c'c}.
///
/// Invariants (checked on construction): square N x N with N = table size,
/// entries finite and >= 0, zero diagonal, at least one positive entry.
class MoneyMatrix {
public:
    MoneyMatrix(int year, CountryTable table, DenseMatrix values);

    int year() const noexcept { return year_; }
    const CountryTable& table() const noexcept { return table_; }
    const DenseMatrix& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return table_.size(); }

    double flow(CountryIndex exporter, CountryIndex importer) const {
        return values_(importer, exporter);
    }
    double total() const;

private:
    int year_;
    CountryTable table_;
    DenseMatrix values_;
};

/// Multiplies every entry by lambda. Throws wtn::Error unless lambda > 0.
MoneyMatrix scale_matrix(const MoneyMatrix& m, double lambda);

}  // namespace wtn
