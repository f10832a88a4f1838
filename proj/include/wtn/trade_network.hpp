#pragma once

#include <string>
#include <vector>

#include "wtn/country_table.hpp"
#include "wtn/money_matrix.hpp"

namespace wtn {

/// Column-stochastic share matrices and trade probabilities derived from a
/// money matrix. Immutable after construction and safe to share read-only
/// between threads.
///
/// With M_{c'c} the flow from c to c':
///   export_share(c', c) = M_{c'c} / M*_c   (S, columns indexed by exporter)
///   import_share(c', c) = M_{cc'} / M_c    (S*, columns indexed by importer)
///   import_prob[c] = M_c / M,  export_prob[c] = M*_c / M
/// A country with no exports (imports) gets an all-zero column in S (S*).
class TradeNetwork {
public:
    explicit TradeNetwork(const MoneyMatrix& m);

    std::size_t size() const noexcept { return table_.size(); }
    int year() const noexcept { return year_; }
    const CountryTable& table() const noexcept { return table_; }

    /// S_{c'c}: share of c's exports that go to c'.
    const DenseMatrix& S() const noexcept { return s_; }
    /// S*_{c'c}: share of c's imports that come from c'.
    const DenseMatrix& S_star() const noexcept { return s_star_; }

    /// P_c (import trade probability).
    const std::vector<double>& P() const noexcept { return p_; }
    /// P*_c (export trade probability).
    const std::vector<double>& P_star() const noexcept { return p_star_; }

    /// M_c, total imports of c.
    const std::vector<double>& M_in() const noexcept { return m_in_; }
    /// M*_c, total exports of c.
    const std::vector<double>& M_out() const noexcept { return m_out_; }
    double M_total() const noexcept { return m_total_; }

private:
    int year_;
    CountryTable table_;
    DenseMatrix s_;
    DenseMatrix s_star_;
    std::vector<double> p_;
    std::vector<double> p_star_;
    std::vector<double> m_in_;
    std::vector<double> m_out_;
    double m_total_ = 0.0;
};

inline TradeNetwork build_trade_network(const MoneyMatrix& m) { return TradeNetwork(m); }

enum class TradeDirection { import, export_ };

/// Top-k countries by P (import) or P* (export), descending, ties by iso.
/// Throws wtn::Error unless 1 <= k <= N.
std::vector<std::string> top_countries(const TradeNetwork& net, TradeDirection key, std::size_t k);

}  // namespace wtn
