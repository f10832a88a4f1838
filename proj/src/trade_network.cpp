#include "wtn/trade_network.hpp"

#include <algorithm>
#include <numeric>

#include "wtn/error.hpp"

namespace wtn {

TradeNetwork::TradeNetwork(const MoneyMatrix& m)
    : year_(m.year()), table_(m.table()), s_(m.size()), s_star_(m.size()),
      p_(m.size(), 0.0), p_star_(m.size(), 0.0), m_in_(m.size(), 0.0), m_out_(m.size(), 0.0) {
    const std::size_t n = m.size();
    const DenseMatrix& money = m.values();

    // M_c: row sums (imports of c); M*_c: column sums (exports of c).
    for (std::size_t to = 0; to < n; ++to) {
        for (std::size_t from = 0; from < n; ++from) {
            const double v = money(to, from);
            m_in_[to] += v;
            m_out_[from] += v;
        }
    }
    m_total_ = std::accumulate(m_in_.begin(), m_in_.end(), 0.0);
    if (!(m_total_ > 0.0)) throw Error("trade network: total trade volume is zero");

    for (std::size_t c = 0; c < n; ++c) {
        if (m_out_[c] > 0.0) {
            for (std::size_t cp = 0; cp < n; ++cp) s_(cp, c) = money(cp, c) / m_out_[c];
        }
        if (m_in_[c] > 0.0) {
            for (std::size_t cp = 0; cp < n; ++cp) s_star_(cp, c) = money(c, cp) / m_in_[c];
        }
        p_[c] = m_in_[c] / m_total_;
        p_star_[c] = m_out_[c] / m_total_;
    }
}

std::vector<std::string> top_countries(const TradeNetwork& net, TradeDirection key, std::size_t k) {
    const std::size_t n = net.size();
    if (k < 1 || k > n) throw Error("top_countries: k must be in [1, " + std::to_string(n) + "]");
    const auto& prob = key == TradeDirection::import ? net.P() : net.P_star();
    std::vector<CountryIndex> order(n);
    std::iota(order.begin(), order.end(), CountryIndex{0});
    std::stable_sort(order.begin(), order.end(), [&](CountryIndex a, CountryIndex b) {
        if (prob[a] != prob[b]) return prob[a] > prob[b];
        return net.table().iso(a) < net.table().iso(b);
    });
    std::vector<std::string> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(net.table().iso(order[i]));
    return out;
}

}  // namespace wtn
