#pragma once

// Edge-list CSV: header `year,commodity,src,dst,weight`, one row per
// directed flow. Reading builds one Layer per (commodity, year) over the
// union of all labels in the file so every layer shares a node universe.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tradenet/net.hpp"

namespace tradenet {

struct RowDiagnostic {
    std::size_t line = 0;  // 1-based input line
    std::string message;
};

struct EdgeListData {
    NodeUniverse universe;
    std::vector<Layer> layers;  // ordered by LayerKey
    std::vector<RowDiagnostic> diagnostics;
};

// Malformed rows are reported in `diagnostics` and skipped; a missing
// header column throws InvalidInput.
EdgeListData read_edge_list(std::istream& in);
EdgeListData read_edge_list(const std::filesystem::path& path);

void write_edge_list(std::ostream& out, std::span<const Layer> layers, const NodeUniverse& universe);

}  // namespace tradenet
