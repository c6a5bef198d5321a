#include "artkg/store.hpp"

#include <cmath>
#include <filesystem>

#include "artkg/error.hpp"
#include "artkg/util.hpp"

namespace artkg {

std::string_view to_string(Provenance p) {
    switch (p) {
        case Provenance::KgeAbsolute: return "kge-absolute";
        case Provenance::CvAbsolute: return "cv-absolute";
        case Provenance::KgeRelative: return "kge-relative";
        case Provenance::CvRelative: return "cv-relative";
        case Provenance::Hybrid: return "hybrid";
    }
    return "unknown";
}

Provenance provenance_from_string(std::string_view s) {
    for (auto p : {Provenance::KgeAbsolute, Provenance::CvAbsolute, Provenance::KgeRelative, Provenance::CvRelative,
                   Provenance::Hybrid}) {
        if (to_string(p) == s) return p;
    }
    throw Error("unknown provenance '" + std::string(s) + "'");
}

bool is_relative(Provenance p) {
    return p == Provenance::KgeRelative || p == Provenance::CvRelative || p == Provenance::Hybrid;
}

EmbeddingStore::EmbeddingStore(std::size_t dim, Provenance provenance) : dim_(dim), provenance_(provenance) {
    if (dim == 0) throw Error("embedding dimension must be positive");
}

void EmbeddingStore::add(std::string id, std::span<const double> vector) {
    if (id.empty()) throw Error("empty embedding id");
    if (vector.size() != dim_) {
        throw Error("vector for '" + id + "' has dimension " + std::to_string(vector.size()) + ", expected " +
                    std::to_string(dim_));
    }
    for (double v : vector) {
        if (!std::isfinite(v)) throw Error("non-finite entry in vector for '" + id + "'");
    }
    if (index_.contains(id)) throw Error("duplicate embedding id '" + id + "'");
    index_.emplace(id, ids_.size());
    ids_.push_back(std::move(id));
    data_.insert(data_.end(), vector.begin(), vector.end());
}

std::optional<std::size_t> EmbeddingStore::find(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::span<const double> EmbeddingStore::vector(const std::string& id) const {
    auto i = find(id);
    if (!i) throw Error("no embedding for id '" + id + "'");
    return row(*i);
}

EmbeddingStore EmbeddingStore::subset(const std::vector<std::string>& ids) const {
    EmbeddingStore out(dim_, provenance_);
    for (const auto& id : ids) out.add(id, vector(id));
    return out;
}

bool EmbeddingStore::operator==(const EmbeddingStore& other) const {
    return dim_ == other.dim_ && provenance_ == other.provenance_ && ids_ == other.ids_ && data_ == other.data_;
}

std::string store_to_tsv(const EmbeddingStore& store) {
    std::string out;
    for (std::size_t i = 0; i < store.size(); ++i) {
        out += store.ids()[i];
        for (double v : store.row(i)) {
            out += '\t';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

EmbeddingStore store_from_tsv(std::string_view text, Provenance provenance, const std::string& source) {
    std::optional<EmbeddingStore> store;
    std::size_t line_no = 0;
    std::size_t start = 0;
    std::vector<double> row;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string_view::npos) {
            throw Error(source + ":" + std::to_string(line_no) + ": expected id followed by tab-separated values");
        }
        std::string id(line.substr(0, tab));
        row.clear();
        std::size_t c = tab + 1;
        while (true) {
            std::size_t next = line.find('\t', c);
            auto field = line.substr(c, next == std::string_view::npos ? std::string_view::npos : next - c);
            try {
                row.push_back(parse_double(field));
            } catch (const Error& e) {
                throw Error(source + ":" + std::to_string(line_no) + ": " + e.what());
            }
            if (next == std::string_view::npos) break;
            c = next + 1;
        }
        double sq = 0.0;
        for (double v : row) sq += v * v;
        if (sq == 0.0) throw Error(source + ":" + std::to_string(line_no) + ": zero vector for '" + id + "'");
        if (!store) store.emplace(row.size(), provenance);
        try {
            store->add(std::move(id), row);
        } catch (const Error& e) {
            throw Error(source + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!store) throw Error(source + ": no vectors");
    return std::move(*store);
}

std::string sidecar_path(const std::string& path) { return path + ".meta.json"; }

void write_store(const std::string& path, const EmbeddingStore& store, const nlohmann::json& meta) {
    nlohmann::json side = meta.is_object() ? meta : nlohmann::json::object();
    side["provenance"] = to_string(store.provenance());
    side["dim"] = store.dim();
    side["count"] = store.size();
    write_file_atomic(path, store_to_tsv(store));
    write_file_atomic(sidecar_path(path), side.dump(2) + "\n");
}

EmbeddingStore read_store(const std::string& path, std::optional<Provenance> fallback) {
    std::optional<Provenance> provenance = fallback;
    nlohmann::json side;
    if (std::filesystem::exists(sidecar_path(path))) {
        try {
            side = nlohmann::json::parse(read_file(sidecar_path(path)));
            provenance = provenance_from_string(side.at("provenance").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw Error(sidecar_path(path) + ": " + e.what());
        }
    }
    if (!provenance) throw Error(path + ": no sidecar and no provenance given");
    auto store = store_from_tsv(read_file(path), *provenance, path);
    if (side.contains("dim") && side["dim"].get<std::size_t>() != store.dim()) {
        throw Error(path + ": dimension disagrees with its sidecar");
    }
    return store;
}

}  // namespace artkg
