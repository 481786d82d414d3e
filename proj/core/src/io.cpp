#include "tradenet/io.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "tradenet/csv.hpp"
#include "tradenet/errors.hpp"

namespace tradenet {

namespace {

struct PendingRow {
    std::size_t line;
    LabeledEdge edge;
};

}  // namespace

EdgeListData read_edge_list(std::istream& in) {
    csv::Reader reader(in);
    const std::size_t c_year = reader.require("year");
    const std::size_t c_commodity = reader.require("commodity");
    const std::size_t c_src = reader.require("src");
    const std::size_t c_dst = reader.require("dst");
    const std::size_t c_weight = reader.require("weight");
    const std::size_t width = reader.header().size();

    EdgeListData data;
    std::map<LayerKey, std::vector<PendingRow>> grouped;
    std::vector<std::string> labels;

    while (reader.next()) {
        const auto& row = reader.row();
        if (row.size() != width) {
            data.diagnostics.push_back({reader.line(), "expected " + std::to_string(width) + " fields, got " +
                                                           std::to_string(row.size())});
            continue;
        }
        auto year = csv::parse_int(row[c_year]);
        if (!year) {
            data.diagnostics.push_back({reader.line(), "malformed year '" + row[c_year] + "'"});
            continue;
        }
        auto weight = csv::parse_double(row[c_weight]);
        if (!weight) {
            data.diagnostics.push_back({reader.line(), "malformed weight '" + row[c_weight] + "'"});
            continue;
        }
        if (row[c_commodity].empty()) {
            data.diagnostics.push_back({reader.line(), "empty commodity"});
            continue;
        }
        LayerKey key{row[c_commodity], static_cast<int>(*year)};
        grouped[key].push_back({reader.line(), {row[c_src], row[c_dst], *weight}});
    }

    // The universe only holds labels from rows that survive validation;
    // collect them with a dry run per layer first.
    for (auto& [key, rows] : grouped) {
        std::vector<LabeledEdge> edges;
        edges.reserve(rows.size());
        for (const auto& r : rows) edges.push_back(r.edge);
        NodeUniverse scratch;
        auto build = build_layer(edges, scratch, key);
        for (const auto& label : scratch.labels()) labels.push_back(label);
    }
    data.universe = NodeUniverse(std::move(labels));

    for (auto& [key, rows] : grouped) {
        std::vector<LabeledEdge> edges;
        edges.reserve(rows.size());
        for (const auto& r : rows) edges.push_back(r.edge);
        const std::size_t before = data.universe.size();
        auto build = build_layer(edges, data.universe, key);
        if (data.universe.size() != before) throw Error("internal: universe changed while building layers");
        for (const auto& rej : build.rejected)
            data.diagnostics.push_back({rows[rej.row].line, rej.reason});
        data.layers.push_back(std::move(build.layer));
    }
    std::sort(data.diagnostics.begin(), data.diagnostics.end(),
              [](const RowDiagnostic& a, const RowDiagnostic& b) { return a.line < b.line; });
    return data;
}

EdgeListData read_edge_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open edge list '" + path.string() + "'");
    return read_edge_list(in);
}

void write_edge_list(std::ostream& out, std::span<const Layer> layers, const NodeUniverse& universe) {
    csv::Writer w(out);
    w.row({"year", "commodity", "src", "dst", "weight"});
    for (const Layer& layer : layers) {
        for (const LabeledEdge& e : dump_edges(layer, universe))
            w.row({std::to_string(layer.year()), layer.commodity(), e.src, e.dst, csv::format_number(e.weight)});
    }
}

}  // namespace tradenet
