#include "wtn/spin_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wtn/error.hpp"

namespace wtn {

ResolvedAnchors::ResolvedAnchors(const AnchorSpec& spec, const CountryTable& table)
    : pin_(table.size(), 0) {
    if (spec.usd_fixed.empty() || spec.cny_fixed.empty()) {
        throw Error("anchors: both the USD and the CNY anchor sets must be non-empty");
    }
    auto pin = [&](const std::vector<std::string>& codes, Spin value) {
        for (const auto& iso : codes) {
            const auto c = table.index_of(iso);
            if (pin_[c] != 0 && pin_[c] != value) throw Error("anchors: " + table.iso(c) + " is in both anchor sets");
            pin_[c] = value;
        }
    };
    pin(spec.usd_fixed, kUsd);
    pin(spec.cny_fixed, kCny);
    for (CountryIndex c = 0; c < pin_.size(); ++c) {
        if (pin_[c] == 0) free_.push_back(c);
        else if (pin_[c] == kUsd) ++usd_count_;
        else ++cny_count_;
    }
}

ResolvedAnchors ResolvedAnchors::swapped() const {
    ResolvedAnchors out;
    out.pin_ = pin_;
    for (auto& p : out.pin_) p = static_cast<Spin>(-p);
    out.free_ = free_;
    out.usd_count_ = cny_count_;
    out.cny_count_ = usd_count_;
    return out;
}

SpinConfig::SpinConfig(const ResolvedAnchors& anchors, Spin fill)
    : sigma_(anchors.size(), fill), fixed_(anchors.size(), 0) {
    if (fill != kUsd && fill != kCny) throw Error("spin value must be -1 or +1");
    for (CountryIndex c = 0; c < sigma_.size(); ++c) {
        if (anchors.is_fixed(c)) {
            sigma_[c] = anchors.pinned(c);
            fixed_[c] = 1;
        }
    }
}

void SpinConfig::set(CountryIndex c, Spin s) {
    if (s != kUsd && s != kCny) throw Error("spin value must be -1 or +1");
    if (fixed_.at(c)) {
        if (s != sigma_[c]) throw Error("cannot change an anchored spin");
        return;
    }
    sigma_[c] = s;
}

std::size_t SpinConfig::usd_count() const {
    return static_cast<std::size_t>(std::count(sigma_.begin(), sigma_.end(), kUsd));
}

double SpinConfig::usd_fraction() const {
    return static_cast<double>(usd_count()) / static_cast<double>(sigma_.size());
}

CouplingWeights trade_probability_weights(const TradeNetwork& net) {
    CouplingWeights w;
    w.node_weight.resize(net.size());
    for (CountryIndex c = 0; c < net.size(); ++c) w.node_weight[c] = net.P()[c] + net.P_star()[c];
    return w;
}

namespace {

void check_sizes(const TradeNetwork& net, const CouplingWeights& w, std::size_t spins) {
    if (w.node_weight.size() != net.size() || spins != net.size()) {
        throw Error("network, weights and spin configuration sizes differ");
    }
}

}  // namespace

LocalField interaction_energy(const TradeNetwork& net, const CouplingWeights& w, const SpinConfig& spins,
                              CountryIndex c) {
    check_sizes(net, w, spins.size());
    if (c >= net.size()) throw Error("interaction_energy: country index out of range");
    const DenseMatrix& s = net.S();
    const DenseMatrix& s_star = net.S_star();
    double sum = 0.0;
    for (CountryIndex cp = 0; cp < net.size(); ++cp) {
        if (cp == c) continue;
        sum += spins[cp] * ((s(cp, c) + s_star(cp, c)) * w.node_weight[cp]);
    }
    return {c, 0.5 * sum};
}

Spin apply_flip_rule(const LocalField& field, Spin current) {
    if (!std::isfinite(field.value)) throw Error("non-finite local field");
    if (field.value < 0.0) return kUsd;
    if (field.value > 0.0) return kCny;
    return current;
}

Coupling::Coupling(const TradeNetwork& net, const CouplingWeights& w) : n_(net.size()), k_(n_ * n_, 0.0) {
    if (w.node_weight.size() != n_) throw Error("coupling weights size differs from network size");
    for (double x : w.node_weight) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw Error("coupling weights must be finite and non-negative");
    }
    const DenseMatrix& s = net.S();
    const DenseMatrix& s_star = net.S_star();
    for (CountryIndex c = 0; c < n_; ++c) {
        for (CountryIndex cp = 0; cp < n_; ++cp) {
            if (cp == c) continue;
            k_[c * n_ + cp] = (s(cp, c) + s_star(cp, c)) * w.node_weight[cp];
        }
    }
}

double Coupling::field(std::span<const Spin> sigma, CountryIndex c) const {
    // Same summation order as interaction_energy; the diagonal is skipped
    // rather than multiplied by zero so that -0.0 and NaN cannot leak in.
    const double* row = k_.data() + c * n_;
    double sum = 0.0;
    for (CountryIndex cp = 0; cp < n_; ++cp) {
        if (cp == c) continue;
        sum += sigma[cp] * row[cp];
    }
    return 0.5 * sum;
}

bool Coupling::update(SpinConfig& spins, CountryIndex c) const {
    const Spin current = spins.sigma_[c];
    const Spin next = apply_flip_rule({c, field(spins.sigma(), c)}, current);
    if (next == current) return false;
    spins.sigma_[c] = next;
    return true;
}

SweepStats sweep(const Coupling& coupling, const ResolvedAnchors& anchors, SpinConfig& spins, Rng& rng,
                 SweepOrder order) {
    if (spins.size() != coupling.size() || anchors.size() != coupling.size()) {
        throw Error("sweep: size mismatch between coupling, anchors and spins");
    }
    SweepStats stats;
    const auto& free = anchors.free_indices();
    if (free.empty()) return stats;

    if (order == SweepOrder::permutation) {
        std::vector<CountryIndex> visit = free;
        shuffle(std::span<CountryIndex>(visit), rng);
        for (CountryIndex c : visit) {
            ++stats.field_evaluations;
            if (coupling.update(spins, c)) ++stats.flips;
        }
    } else {
        for (std::size_t i = 0; i < free.size(); ++i) {
            const CountryIndex c = free[static_cast<std::size_t>(uniform_below(rng, free.size()))];
            ++stats.field_evaluations;
            if (coupling.update(spins, c)) ++stats.flips;
        }
    }
    return stats;
}

SpinConfig sweep(const TradeNetwork& net, const CouplingWeights& w, const ResolvedAnchors& anchors,
                 const SpinConfig& spins, Rng& rng, SweepOrder order) {
    SpinConfig out = spins;
    sweep(Coupling(net, w), anchors, out, rng, order);
    return out;
}

namespace {

bool coupling_fixed_point(const Coupling& coupling, const ResolvedAnchors& anchors, const SpinConfig& spins) {
    for (CountryIndex c : anchors.free_indices()) {
        if (apply_flip_rule({c, coupling.field(spins, c)}, spins[c]) != spins[c]) return false;
    }
    return true;
}

}  // namespace

RelaxationResult relax(const Coupling& coupling, const ResolvedAnchors& anchors, const SpinConfig& initial, Rng& rng,
                       const RelaxOptions& opts) {
    if (opts.tau_max < 1) throw Error("relax: tau_max must be at least 1");
    RelaxationResult result{initial, {}, false, 0};
    result.trajectory.reserve(static_cast<std::size_t>(opts.tau_max) + 1);
    result.trajectory.push_back({0, initial.usd_fraction()});

    for (int tau = 1; tau <= opts.tau_max; ++tau) {
        const SweepStats stats = sweep(coupling, anchors, result.final, rng, opts.order);
        result.trajectory.push_back({tau, result.final.usd_fraction()});
        result.tau_stop = tau;
        if (stats.flips == 0) {
            // A full permutation sweep without flips proves a fixed point;
            // sampling with replacement may have skipped some countries.
            if (opts.order == SweepOrder::permutation || coupling_fixed_point(coupling, anchors, result.final)) {
                result.converged = true;
                break;
            }
        }
    }
    return result;
}

RelaxationResult relax(const TradeNetwork& net, const CouplingWeights& w, const ResolvedAnchors& anchors,
                       const SpinConfig& initial, Rng& rng, const RelaxOptions& opts) {
    return relax(Coupling(net, w), anchors, initial, rng, opts);
}

bool is_fixed_point(const TradeNetwork& net, const CouplingWeights& w, const SpinConfig& spins) {
    check_sizes(net, w, spins.size());
    for (CountryIndex c = 0; c < spins.size(); ++c) {
        if (spins.is_fixed(c)) continue;
        if (apply_flip_rule(interaction_energy(net, w, spins, c), spins[c]) != spins[c]) return false;
    }
    return true;
}

std::vector<SpinConfig> enumerate_fixed_points(const TradeNetwork& net, const CouplingWeights& w,
                                               const ResolvedAnchors& anchors, std::size_t max_free) {
    const auto& free = anchors.free_indices();
    const std::size_t k = free.size();
    if (k > max_free) {
        throw Error("enumerate_fixed_points: " + std::to_string(k) + " free spins exceed the limit of " +
                    std::to_string(max_free));
    }
    if (k >= 63) throw Error("enumerate_fixed_points: too many free spins");
    std::vector<SpinConfig> out;
    const std::uint64_t total = std::uint64_t{1} << k;
    for (std::uint64_t code = 0; code < total; ++code) {
        SpinConfig spins(anchors);
        for (std::size_t i = 0; i < k; ++i) spins.set(free[i], ((code >> i) & 1U) ? kUsd : kCny);
        if (is_fixed_point(net, w, spins)) out.push_back(std::move(spins));
    }
    return out;
}

}  // namespace wtn
