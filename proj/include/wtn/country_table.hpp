#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wtn {

using CountryIndex = std::size_t;

struct Country {
    std::string iso;
    CountryIndex index = 0;
    std::string name;
};

/// Registry of countries with a dense 0..N-1 index.
///
/// ISO codes are stored uppercase and must be unique. Codes are otherwise
/// opaque labels: any non-empty token without separators is accepted, so
/// non-standard labels used by some aggregates (e.g. "UK") work as-is.
class CountryTable {
public:
    CountryTable() = default;

    /// Builds a table from codes in the given order. Throws wtn::Error on
    /// duplicates, empty/invalid codes, or fewer than two entries.
    explicit CountryTable(std::vector<std::string> isos,
                          std::vector<std::string> names = {});

    /// Same, but sorts the codes ascending first. Duplicates are merged.
    static CountryTable sorted(std::vector<std::string> isos);

    std::size_t size() const noexcept { return entries_.size(); }
    const Country& operator[](CountryIndex i) const { return entries_.at(i); }
    const std::vector<Country>& entries() const noexcept { return entries_; }

    const std::string& iso(CountryIndex i) const { return entries_.at(i).iso; }
    std::optional<CountryIndex> find(std::string_view iso) const;
    /// Throws wtn::Error if the code is not registered.
    CountryIndex index_of(std::string_view iso) const;
    bool contains(std::string_view iso) const { return find(iso).has_value(); }

    bool operator==(const CountryTable& other) const;

private:
    std::vector<Country> entries_;
    std::unordered_map<std::string, CountryIndex> by_iso_;
};

/// Uppercases and trims a country code; returns empty string if the code
/// contains whitespace or separators after trimming.
std::string normalize_iso(std::string_view raw);

}  // namespace wtn
