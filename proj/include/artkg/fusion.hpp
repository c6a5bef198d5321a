#pragma once

#include <string_view>

#include "artkg/store.hpp"

namespace artkg {

enum class FusionKind { Concat, Hadamard };

FusionKind fusion_kind_from_string(std::string_view s);
std::string_view to_string(FusionKind k);

/// Concatenation [a, b] or elementwise product; ids must match in order.
/// Hadamard needs equal dims and never pads.
EmbeddingStore fuse(const EmbeddingStore& a, const EmbeddingStore& b, FusionKind kind);

}  // namespace artkg
