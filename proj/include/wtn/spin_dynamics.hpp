#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wtn/country_table.hpp"
#include "wtn/rng.hpp"
#include "wtn/trade_network.hpp"

namespace wtn {

/// Trade currency preference. USD is spin -1, CNY is spin +1.
using Spin = std::int8_t;
inline constexpr Spin kUsd = -1;
inline constexpr Spin kCny = +1;

/// Countries whose spin is pinned for a whole simulation.
struct AnchorSpec {
    std::vector<std::string> usd_fixed;
    std::vector<std::string> cny_fixed;

    /// The baseline setup: US pinned to USD, CN pinned to CNY.
    static AnchorSpec baseline() { return {{"US"}, {"CN"}}; }
};

/// AnchorSpec resolved against a CountryTable: per-country pin value
/// (0 for free countries).
class ResolvedAnchors {
public:
    /// Throws wtn::Error if a set is empty, the sets overlap, or a code is
    /// not in the table.
    ResolvedAnchors(const AnchorSpec& spec, const CountryTable& table);

    std::size_t size() const noexcept { return pin_.size(); }
    bool is_fixed(CountryIndex c) const { return pin_[c] != 0; }
    Spin pinned(CountryIndex c) const { return pin_[c]; }
    const std::vector<CountryIndex>& free_indices() const noexcept { return free_; }
    std::size_t usd_count() const noexcept { return usd_count_; }
    std::size_t cny_count() const noexcept { return cny_count_; }

    /// The same anchors with USD and CNY roles exchanged.
    ResolvedAnchors swapped() const;

private:
    ResolvedAnchors() = default;
    std::vector<Spin> pin_;
    std::vector<CountryIndex> free_;
    std::size_t usd_count_ = 0;
    std::size_t cny_count_ = 0;
};

/// Spin configuration with anchored entries. Anchored spins always equal
/// their pinned value; set() on an anchored country throws.
class SpinConfig {
public:
    /// Free spins start at `fill`; anchors at their pinned value.
    SpinConfig(const ResolvedAnchors& anchors, Spin fill = kCny);

    std::size_t size() const noexcept { return sigma_.size(); }
    Spin operator[](CountryIndex c) const { return sigma_[c]; }
    std::span<const Spin> sigma() const noexcept { return sigma_; }
    bool is_fixed(CountryIndex c) const { return fixed_[c] != 0; }

    void set(CountryIndex c, Spin s);
    /// Fraction of all N countries (anchors included) with spin -1.
    double usd_fraction() const;
    std::size_t usd_count() const;

    bool operator==(const SpinConfig&) const = default;

private:
    friend class Coupling;
    std::vector<Spin> sigma_;
    std::vector<std::uint8_t> fixed_;
};

/// Per-partner weight in the interaction energy, (P + P*) by default.
struct CouplingWeights {
    std::vector<double> node_weight;
};

/// node_weight[c] = P[c] + P*[c].
CouplingWeights trade_probability_weights(const TradeNetwork& net);

struct LocalField {
    CountryIndex country = 0;
    double value = 0.0;
};

/// E_c = 1/2 sum_{c' != c} sigma_{c'} (S_{c'c} + S*_{c'c}) w_{c'}, evaluated
/// directly from the network matrices.
LocalField interaction_energy(const TradeNetwork& net, const CouplingWeights& w,
                              const SpinConfig& spins, CountryIndex c);

/// -1 for a negative field, +1 for a positive one, `current` on an exact
/// zero. Throws wtn::Error on a non-finite field.
Spin apply_flip_rule(const LocalField& field, Spin current);

/// Precomputed coupling rows K(c, c') = (S_{c'c} + S*_{c'c}) w_{c'} laid out
/// contiguously per country. field() reproduces interaction_energy bit for bit.
class Coupling {
public:
    Coupling(const TradeNetwork& net, const CouplingWeights& w);

    std::size_t size() const noexcept { return n_; }
    double field(std::span<const Spin> sigma, CountryIndex c) const;
    double field(const SpinConfig& spins, CountryIndex c) const { return field(spins.sigma(), c); }
    /// Updates country c in place; returns true if it flipped.
    bool update(SpinConfig& spins, CountryIndex c) const;

private:
    std::size_t n_;
    std::vector<double> k_;
};

enum class SweepOrder {
    /// Every free spin visited once per sweep, fresh random permutation.
    permutation,
    /// As many uniform draws (with replacement) as there are free spins.
    with_replacement,
};

struct SweepStats {
    std::size_t field_evaluations = 0;
    std::size_t flips = 0;
};

/// One time step: sequential asynchronous updates of the free spins in
/// random order. Anchored spins are never touched.
SweepStats sweep(const Coupling& coupling, const ResolvedAnchors& anchors, SpinConfig& spins,
                 Rng& rng, SweepOrder order = SweepOrder::permutation);

/// Convenience overload building the coupling on the fly.
SpinConfig sweep(const TradeNetwork& net, const CouplingWeights& w, const ResolvedAnchors& anchors,
                 const SpinConfig& spins, Rng& rng, SweepOrder order = SweepOrder::permutation);

struct TrajectoryPoint {
    int tau = 0;
    double f = 0.0;
};

struct RelaxationResult {
    SpinConfig final;
    std::vector<TrajectoryPoint> trajectory;
    bool converged = false;
    int tau_stop = 0;
};

struct RelaxOptions {
    int tau_max = 10;
    SweepOrder order = SweepOrder::permutation;
};

/// Applies sweeps until one produces no flip (converged) or tau_max sweeps
/// have run. The trajectory starts at tau = 0 with the initial fraction.
RelaxationResult relax(const Coupling& coupling, const ResolvedAnchors& anchors,
                       const SpinConfig& initial, Rng& rng, const RelaxOptions& opts = {});

RelaxationResult relax(const TradeNetwork& net, const CouplingWeights& w, const ResolvedAnchors& anchors,
                       const SpinConfig& initial, Rng& rng, const RelaxOptions& opts = {});

/// True iff no free country would change under the flip rule.
bool is_fixed_point(const TradeNetwork& net, const CouplingWeights& w, const SpinConfig& spins);

/// Brute force over all 2^k assignments of the k free spins. Results are
/// ordered by the binary code of the free spins (bit i set = i-th free
/// country at -1). Throws wtn::Error if k > max_free.
std::vector<SpinConfig> enumerate_fixed_points(const TradeNetwork& net, const CouplingWeights& w,
                                               const ResolvedAnchors& anchors, std::size_t max_free = 20);

}  // namespace wtn
