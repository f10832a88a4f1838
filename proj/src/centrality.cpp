#include "wtn/centrality.hpp"

#include <cmath>
#include <numeric>

namespace wtn {

GoogleOperator::GoogleOperator(const DenseMatrix& stochastic, double alpha) : s_(&stochastic), alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("google matrix: alpha must lie in (0, 1)");
    const std::size_t n = stochastic.size();
    if (n == 0) throw Error("google matrix: empty input");
    for (std::size_t col = 0; col < n; ++col) {
        double sum = 0.0;
        bool all_zero = true;
        for (std::size_t row = 0; row < n; ++row) {
            const double v = stochastic(row, col);
            if (!(v >= 0.0) || !std::isfinite(v)) throw Error("google matrix: entries must be finite and >= 0");
            sum += v;
            all_zero = all_zero && v == 0.0;
        }
        if (all_zero) {
            dangling_.push_back(col);
        } else if (std::abs(sum - 1.0) > 1e-9) {
            throw Error("google matrix: column " + std::to_string(col) + " sums to " + std::to_string(sum));
        }
    }
}

void GoogleOperator::apply(std::span<const double> in, std::span<double> out) const {
    const std::size_t n = size();
    if (in.size() != n || out.size() != n) throw Error("google matrix: vector size mismatch");
    const DenseMatrix& s = *s_;
    const double mass = std::accumulate(in.begin(), in.end(), 0.0);
    double dangling_mass = 0.0;
    for (std::size_t col : dangling_) dangling_mass += in[col];
    const double dn = static_cast<double>(n);
    const double shift = alpha_ * dangling_mass / dn + (1.0 - alpha_) * mass / dn;
    for (std::size_t row = 0; row < n; ++row) {
        double acc = 0.0;
        for (std::size_t col = 0; col < n; ++col) acc += s(row, col) * in[col];
        out[row] = alpha_ * acc + shift;
    }
}

CentralityVector power_iterate(const GoogleOperator& op, const PowerOptions& opts, CentralityDirection direction) {
    if (!(opts.tol > 0.0)) throw Error("power iteration: tol must be positive");
    const std::size_t n = op.size();
    std::vector<double> v(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n, 0.0);
    double residual = 0.0;
    for (std::size_t it = 1; it <= opts.max_iter; ++it) {
        op.apply(v, next);
        const double mass = std::accumulate(next.begin(), next.end(), 0.0);
        residual = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] /= mass;
            residual += std::abs(next[i] - v[i]);
        }
        v.swap(next);
        if (residual < opts.tol) return {std::move(v), op.alpha(), direction, residual, it};
    }
    throw ConvergenceError("power iteration did not reach residual " + std::to_string(opts.tol) + " within " +
                               std::to_string(opts.max_iter) + " iterations (last residual " +
                               std::to_string(residual) + ")",
                           residual);
}

CentralityVector pagerank(const TradeNetwork& net, double alpha, const PowerOptions& opts) {
    return power_iterate(GoogleOperator(net.S(), alpha), opts, CentralityDirection::pagerank);
}

CentralityVector cheirank(const TradeNetwork& net, double alpha, const PowerOptions& opts) {
    return power_iterate(GoogleOperator(net.S_star(), alpha), opts, CentralityDirection::cheirank);
}

CouplingWeights centrality_weights(const TradeNetwork& net, double alpha, const PowerOptions& opts) {
    const CentralityVector pr = pagerank(net, alpha, opts);
    const CentralityVector cr = cheirank(net, alpha, opts);
    CouplingWeights w;
    w.node_weight.resize(net.size());
    for (std::size_t c = 0; c < net.size(); ++c) w.node_weight[c] = pr.values[c] + cr.values[c];
    return w;
}

}  // namespace wtn
