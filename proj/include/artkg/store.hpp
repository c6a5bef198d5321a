#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace artkg {

enum class Provenance { KgeAbsolute, CvAbsolute, KgeRelative, CvRelative, Hybrid };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);
bool is_relative(Provenance p);

/// Ordered id -> vector table with a fixed dimension.
class EmbeddingStore {
public:
    EmbeddingStore(std::size_t dim, Provenance provenance);

    /// Rejects duplicate ids, wrong lengths and non-finite entries.
    void add(std::string id, std::span<const double> vector);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }
    Provenance provenance() const noexcept { return provenance_; }
    void set_provenance(Provenance p) noexcept { provenance_ = p; }

    const std::vector<std::string>& ids() const noexcept { return ids_; }
    bool contains(const std::string& id) const { return index_.contains(id); }
    std::optional<std::size_t> find(const std::string& id) const;

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    /// Throws when `id` is absent.
    std::span<const double> vector(const std::string& id) const;

    /// Rows for `ids`, in that order, under the same provenance.
    EmbeddingStore subset(const std::vector<std::string>& ids) const;

    bool operator==(const EmbeddingStore& other) const;

private:
    std::size_t dim_;
    Provenance provenance_;
    std::vector<std::string> ids_;
    std::vector<double> data_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// `id TAB f1 TAB ... TAB fd` per line; floats in shortest round-trip form.
std::string store_to_tsv(const EmbeddingStore& store);

/// Zero-norm rows are rejected here since cosine is undefined for them.
EmbeddingStore store_from_tsv(std::string_view text, Provenance provenance, const std::string& source = "<tsv>");

/// Writes `path` and the JSON sidecar `path.meta.json` (provenance, dim,
/// count plus any caller metadata).
void write_store(const std::string& path, const EmbeddingStore& store, const nlohmann::json& meta = {});

/// Reads the TSV and takes provenance from the sidecar, or from `fallback`
/// when no sidecar exists.
EmbeddingStore read_store(const std::string& path, std::optional<Provenance> fallback = std::nullopt);

std::string sidecar_path(const std::string& path);

}  // namespace artkg
