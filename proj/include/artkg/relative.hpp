#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "artkg/store.hpp"

namespace artkg {

/// Ordered anchor ids; the order fixes the relative coordinate order.
struct AnchorSet {
    std::vector<std::string> anchor_ids;
    std::map<std::string, std::size_t> per_class_counts;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return anchor_ids.size(); }
    /// Content hash recorded in store sidecars.
    std::string hash() const;

    bool operator==(const AnchorSet&) const = default;
};

nlohmann::json to_json(const AnchorSet& a);
AnchorSet anchor_set_from_json(const nlohmann::json& j);

using WarningSink = std::function<void(const std::string&)>;

/// Draws min(per_class, available) training ids per class without
/// replacement. Classes are visited alphabetically; within a class the
/// draw order is kept. A short class is reported to `warn`.
AnchorSet select_anchors(const std::vector<std::string>& train_ids, const std::map<std::string, std::string>& labels,
                         std::size_t per_class, std::uint64_t seed, const std::vector<std::string>& classes,
                         const WarningSink& warn = {});

/// Cosine similarity; throws on a zero vector or a dimension mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

/// Row i, column j = cosine(item i, anchor j). Both stores must be absolute
/// and of the same family (both KGE or both CV).
EmbeddingStore relativize(const EmbeddingStore& store, const AnchorSet& anchors, const EmbeddingStore& anchor_store,
                          std::size_t threads = 1);

}  // namespace artkg
