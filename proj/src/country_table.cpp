#include "wtn/country_table.hpp"

#include <algorithm>
#include <cctype>

#include "wtn/error.hpp"

namespace wtn {

std::string normalize_iso(std::string_view raw) {
    auto is_space = [](unsigned char ch) { return std::isspace(ch) != 0; };
    while (!raw.empty() && is_space(static_cast<unsigned char>(raw.front()))) raw.remove_prefix(1);
    while (!raw.empty() && is_space(static_cast<unsigned char>(raw.back()))) raw.remove_suffix(1);
    std::string out;
    out.reserve(raw.size());
    for (char ch : raw) {
        const auto u = static_cast<unsigned char>(ch);
        if (is_space(u) || ch == ',' || ch == ';' || ch == '"') return {};
        out.push_back(static_cast<char>(std::toupper(u)));
    }
    return out;
}

CountryTable::CountryTable(std::vector<std::string> isos, std::vector<std::string> names) {
    if (isos.size() < 2) throw Error("country table needs at least 2 countries, got " + std::to_string(isos.size()));
    if (!names.empty() && names.size() != isos.size()) throw Error("country table: names/isos size mismatch");
    entries_.reserve(isos.size());
    for (std::size_t i = 0; i < isos.size(); ++i) {
        std::string iso = normalize_iso(isos[i]);
        if (iso.empty()) throw Error("invalid country code '" + isos[i] + "'");
        if (!by_iso_.emplace(iso, i).second) throw Error("duplicate country code '" + iso + "'");
        entries_.push_back({std::move(iso), i, names.empty() ? std::string{} : std::move(names[i])});
    }
}

CountryTable CountryTable::sorted(std::vector<std::string> isos) {
    for (auto& iso : isos) {
        auto norm = normalize_iso(iso);
        if (norm.empty()) throw Error("invalid country code '" + iso + "'");
        iso = std::move(norm);
    }
    std::sort(isos.begin(), isos.end());
    isos.erase(std::unique(isos.begin(), isos.end()), isos.end());
    return CountryTable(std::move(isos));
}

std::optional<CountryIndex> CountryTable::find(std::string_view iso) const {
    auto it = by_iso_.find(normalize_iso(iso));
    if (it == by_iso_.end()) return std::nullopt;
    return it->second;
}

CountryIndex CountryTable::index_of(std::string_view iso) const {
    if (auto idx = find(iso)) return *idx;
    throw Error("unknown country code '" + std::string(iso) + "'");
}

bool CountryTable::operator==(const CountryTable& other) const {
    if (size() != other.size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
        if (entries_[i].iso != other.entries_[i].iso) return false;
    }
    return true;
}

}  // namespace wtn
