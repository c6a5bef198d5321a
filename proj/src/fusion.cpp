#include "artkg/fusion.hpp"

#include <vector>

#include "artkg/error.hpp"

namespace artkg {

FusionKind fusion_kind_from_string(std::string_view s) {
    if (s == "concat") return FusionKind::Concat;
    if (s == "hadamard") return FusionKind::Hadamard;
    throw Error("unknown fusion kind '" + std::string(s) + "' (expected concat or hadamard)");
}

std::string_view to_string(FusionKind k) { return k == FusionKind::Concat ? "concat" : "hadamard"; }

EmbeddingStore fuse(const EmbeddingStore& a, const EmbeddingStore& b, FusionKind kind) {
    const auto& ia = a.ids();
    const auto& ib = b.ids();
    for (std::size_t i = 0; i < std::max(ia.size(), ib.size()); ++i) {
        if (i >= ia.size() || i >= ib.size() || ia[i] != ib[i]) {
            std::string first = i < ia.size() ? ia[i] : (i < ib.size() ? ib[i] : "");
            throw Error("stores disagree on ids at position " + std::to_string(i) + " ('" + first + "')");
        }
    }
    if (kind == FusionKind::Hadamard && a.dim() != b.dim()) {
        throw Error("hadamard fusion needs equal dimensions, got " + std::to_string(a.dim()) + " and " +
                    std::to_string(b.dim()));
    }

    const std::size_t dim = kind == FusionKind::Concat ? a.dim() + b.dim() : a.dim();
    EmbeddingStore out(dim, Provenance::Hybrid);
    std::vector<double> row(dim);
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto ra = a.row(i);
        auto rb = b.row(i);
        if (kind == FusionKind::Concat) {
            std::copy(ra.begin(), ra.end(), row.begin());
            std::copy(rb.begin(), rb.end(), row.begin() + std::ptrdiff_t(a.dim()));
        } else {
            for (std::size_t k = 0; k < dim; ++k) row[k] = ra[k] * rb[k];
        }
        out.add(ia[i], row);
    }
    return out;
}

}  // namespace artkg
