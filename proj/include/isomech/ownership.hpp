#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace isomech {

/// Who owns what: items by row, owners by column, 0/1 flags. Every item needs
/// at least one owner.
class OwnershipMatrix {
public:
    OwnershipMatrix(std::vector<std::string> owner_ids, std::vector<std::vector<bool>> flags)
        : owner_ids_(std::move(owner_ids)), flags_(std::move(flags)) {
        if (owner_ids_.empty()) throw StructureError("OwnershipMatrix: no owners");
        for (std::size_t a = 0; a < owner_ids_.size(); ++a) {
            if (owner_ids_[a].empty()) throw StructureError("OwnershipMatrix: empty owner id");
            for (std::size_t b = a + 1; b < owner_ids_.size(); ++b) {
                if (owner_ids_[a] == owner_ids_[b]) {
                    throw StructureError("OwnershipMatrix: duplicate owner id '" + owner_ids_[a] +
                                         "'");
                }
            }
        }
        for (std::size_t i = 0; i < flags_.size(); ++i) {
            if (flags_[i].size() != owner_ids_.size()) {
                throw StructureError("OwnershipMatrix: ragged row " + std::to_string(i + 1));
            }
            bool owned = false;
            for (bool f : flags_[i]) owned = owned || f;
            if (!owned) {
                throw StructureError("OwnershipMatrix: item " + std::to_string(i + 1) +
                                     " has no owner");
            }
        }
    }

    std::size_t items() const { return flags_.size(); }
    std::size_t owners() const { return owner_ids_.size(); }
    const std::vector<std::string>& owner_ids() const { return owner_ids_; }
    bool owns(std::size_t item, std::size_t owner) const { return flags_[item][owner]; }

    /// Header row of owner ids, then one 0/1 row per item.
    static OwnershipMatrix parse_csv(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        if (!std::getline(in, line)) throw StructureError("OwnershipMatrix: empty input");
        const std::vector<std::string> ids = split_row(line);
        std::vector<std::vector<bool>> flags;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const std::vector<std::string> cells = split_row(line);
            if (cells.size() != ids.size()) {
                throw StructureError("OwnershipMatrix: row " + std::to_string(flags.size() + 1) +
                                     " has " + std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(ids.size()));
            }
            std::vector<bool> row;
            row.reserve(cells.size());
            for (const std::string& cell : cells) {
                if (cell == "0") {
                    row.push_back(false);
                } else if (cell == "1") {
                    row.push_back(true);
                } else {
                    throw StructureError("OwnershipMatrix: flag must be 0 or 1, got '" + cell +
                                         "'");
                }
            }
            flags.push_back(std::move(row));
        }
        return OwnershipMatrix(ids, std::move(flags));
    }

    std::string to_csv() const {
        std::string out;
        for (std::size_t a = 0; a < owner_ids_.size(); ++a) {
            if (a > 0) out += ',';
            out += owner_ids_[a];
        }
        out += '\n';
        for (const auto& row : flags_) {
            for (std::size_t a = 0; a < row.size(); ++a) {
                if (a > 0) out += ',';
                out += row[a] ? '1' : '0';
            }
            out += '\n';
        }
        return out;
    }

private:
    static std::vector<std::string> split_row(std::string line) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            cells.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        return cells;
    }

    std::vector<std::string> owner_ids_;
    std::vector<std::vector<bool>> flags_;
};

struct OwnerGroup {
    std::string owner;
    std::vector<std::size_t> items;

    bool operator==(const OwnerGroup&) const = default;
};

/// Greedy disjoint cover: repeatedly hand the owner with the most remaining
/// items all of them, breaking ties by a seeded uniform choice, then retire
/// that owner. Every item lands in exactly one group because it leaves with
/// the first of its owners to be picked.
inline std::vector<OwnerGroup> owner_partition(const OwnershipMatrix& M, std::uint64_t seed = 0) {
    std::mt19937_64 rng(mix_seed(seed, 0x6f776e6572));
    std::vector<bool> item_left(M.items(), true);
    std::vector<bool> owner_left(M.owners(), true);
    std::vector<OwnerGroup> groups;
    std::size_t remaining = M.items();
    while (remaining > 0) {
        std::size_t best_count = 0;
        std::vector<std::size_t> ties;
        for (std::size_t a = 0; a < M.owners(); ++a) {
            if (!owner_left[a]) continue;
            std::size_t count = 0;
            for (std::size_t i = 0; i < M.items(); ++i) {
                if (item_left[i] && M.owns(i, a)) ++count;
            }
            if (count > best_count) {
                best_count = count;
                ties.assign(1, a);
            } else if (count == best_count && count > 0) {
                ties.push_back(a);
            }
        }
        if (best_count == 0) {
            throw StructureError("owner_partition: remaining items have no remaining owner");
        }
        const std::size_t pick = ties[rng() % ties.size()];
        OwnerGroup group;
        group.owner = M.owner_ids()[pick];
        for (std::size_t i = 0; i < M.items(); ++i) {
            if (item_left[i] && M.owns(i, pick)) {
                group.items.push_back(i);
                item_left[i] = false;
                --remaining;
            }
        }
        owner_left[pick] = false;
        groups.push_back(std::move(group));
    }
    return groups;
}

}  // namespace isomech
