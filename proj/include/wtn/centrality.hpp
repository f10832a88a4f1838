#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wtn/error.hpp"
#include "wtn/money_matrix.hpp"
#include "wtn/spin_dynamics.hpp"
#include "wtn/trade_network.hpp"

namespace wtn {

/// Damped Google operator G = alpha * S' + (1 - alpha)/N * E, where S' is
/// the column-stochastic input with all-zero columns replaced by uniform
/// 1/N columns. Applied matrix-free; G itself is never formed.
class GoogleOperator {
public:
    /// Keeps a reference to `stochastic`, which must outlive the operator.
    /// Throws wtn::Error if alpha is outside (0, 1) or a column sums to
    /// neither 0 nor 1.
    GoogleOperator(const DenseMatrix& stochastic, double alpha);

    std::size_t size() const noexcept { return s_->size(); }
    double alpha() const noexcept { return alpha_; }
    const std::vector<std::size_t>& dangling() const noexcept { return dangling_; }

    /// out = G * in. Sizes must match size().
    void apply(std::span<const double> in, std::span<double> out) const;

private:
    const DenseMatrix* s_;
    double alpha_;
    std::vector<std::size_t> dangling_;
};

enum class CentralityDirection { pagerank, cheirank };

struct CentralityVector {
    std::vector<double> values;
    double alpha = 0.0;
    CentralityDirection direction = CentralityDirection::pagerank;
    double residual = 0.0;
    std::size_t iterations = 0;
};

struct PowerOptions {
    double tol = 1e-12;
    std::size_t max_iter = 10000;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual) : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// v <- G v from the uniform vector, renormalized to unit L1 mass each
/// step, until ||v_new - v_old||_1 < tol. Throws ConvergenceError (with the
/// last residual) if max_iter is reached first.
CentralityVector power_iterate(const GoogleOperator& op, const PowerOptions& opts = {},
                               CentralityDirection direction = CentralityDirection::pagerank);

/// PageRank on S: the chain follows money toward importers.
CentralityVector pagerank(const TradeNetwork& net, double alpha, const PowerOptions& opts = {});
/// CheiRank on S*: the chain follows money back toward exporters.
CentralityVector cheirank(const TradeNetwork& net, double alpha, const PowerOptions& opts = {});

/// node_weight[c] = PageRank(c) + CheiRank(c).
CouplingWeights centrality_weights(const TradeNetwork& net, double alpha, const PowerOptions& opts = {});

}  // namespace wtn
