#include "graph_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace selprop {

void TemporalAdjacency::insert_event(const InteractionEvent& e) {
    if (e.source >= lists_.size() || e.destination >= lists_.size())
        throw Error("insert_event: node id out of range");
    if (e.timestamp < 0.0) throw OrderError("insert_event: negative timestamp");
    if (events_inserted_ > 0 && e.timestamp < last_timestamp_)
        throw OrderError("insert_event: timestamp " + std::to_string(e.timestamp) + " precedes last inserted " +
                         std::to_string(last_timestamp_));
    lists_[e.source].push_back({e.destination, e.timestamp});
    lists_[e.destination].push_back({e.source, e.timestamp});
    last_timestamp_ = e.timestamp;
    ++events_inserted_;
}

std::vector<NeighborEntry> TemporalAdjacency::neighbors_at(NodeId node, double t, std::size_t k,
                                                           bool include_self) const {
    const auto& list = lists_.at(node);
    auto end = std::lower_bound(list.begin(), list.end(), t,
                                [](const NeighborEntry& e, double v) { return e.timestamp < v; });
    const auto available = static_cast<std::size_t>(end - list.begin());
    const std::size_t take = std::min(k, available);

    std::vector<NeighborEntry> out;
    out.reserve(take + (include_self ? 1 : 0));
    if (include_self) out.push_back({node, t});
    for (std::size_t i = 0; i < take; ++i) out.push_back(*(end - 1 - static_cast<std::ptrdiff_t>(i)));
    return out;
}

std::size_t TemporalAdjacency::total_entries() const {
    std::size_t n = 0;
    for (const auto& l : lists_) n += l.size();
    return n;
}

void TemporalAdjacency::reset() {
    for (auto& l : lists_) l.clear();
    events_inserted_ = 0;
    last_timestamp_ = 0.0;
}

DatasetFormat parse_dataset_format(const std::string& s) {
    if (s == "jodie_csv") return DatasetFormat::jodie_csv;
    if (s == "edge_list") return DatasetFormat::edge_list;
    throw Error("unknown dataset format '" + s + "' (expected jodie_csv or edge_list)");
}

std::string to_string(DatasetFormat f) { return f == DatasetFormat::jodie_csv ? "jodie_csv" : "edge_list"; }

std::size_t DatasetBundle::inductive_count() const {
    return static_cast<std::size_t>(std::count(inductive.begin(), inductive.end(), true));
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line, bool allow_whitespace) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i <= line.size()) {
        std::size_t j = i;
        while (j < line.size() && line[j] != ',' && !(allow_whitespace && (line[j] == ' ' || line[j] == '\t')))
            ++j;
        auto f = trim(line.substr(i, j - i));
        if (!f.empty() || !allow_whitespace) out.push_back(f);
        i = j + 1;
    }
    return out;
}

double parse_double(std::string_view s, std::size_t row) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw ParseError("cannot parse number '" + std::string(s) + "'", row);
    return v;
}

std::int64_t parse_int(std::string_view s, std::size_t row) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        // ids written as floats ("3.0") are accepted when integral
        double d = parse_double(s, row);
        if (d != static_cast<double>(static_cast<std::int64_t>(d)))
            throw ParseError("node id '" + std::string(s) + "' is not an integer", row);
        return static_cast<std::int64_t>(d);
    }
    return v;
}

struct RawRow {
    std::int64_t src;
    std::int64_t dst;
    double t;
    Vector features;
};

std::map<std::int64_t, NodeId> dense_ids(const std::vector<std::int64_t>& raw, NodeId offset) {
    std::map<std::int64_t, NodeId> m;
    for (auto r : raw) m.emplace(r, 0);
    NodeId next = offset;
    for (auto& [k, v] : m) v = next++;
    return m;
}

}  // namespace

DatasetBundle parse_dataset(std::istream& in, DatasetFormat format, std::string name) {
    std::vector<RawRow> rows;
    std::string line;
    std::size_t row_no = 0;
    std::size_t d_e = 0;
    bool header_skipped = format != DatasetFormat::jodie_csv;

    while (std::getline(in, line)) {
        ++row_no;
        auto view = trim(line);
        if (view.empty() || view.front() == '%' || view.front() == '#') continue;
        if (!header_skipped) {
            header_skipped = true;
            continue;
        }
        auto fields = split_fields(view, format == DatasetFormat::edge_list);
        RawRow r;
        if (format == DatasetFormat::jodie_csv) {
            if (fields.size() < 4) throw ParseError("expected at least 4 fields", row_no);
            r.src = parse_int(fields[0], row_no);
            r.dst = parse_int(fields[1], row_no);
            r.t = parse_double(fields[2], row_no);
            for (std::size_t i = 4; i < fields.size(); ++i) r.features.push_back(parse_double(fields[i], row_no));
            if (rows.empty()) d_e = r.features.size();
            else if (r.features.size() != d_e)
                throw ParseError("edge feature count " + std::to_string(r.features.size()) + " != " +
                                     std::to_string(d_e),
                                 row_no);
        } else {
            // src dst t, or the four-column src dst weight t layout
            if (fields.size() != 3 && fields.size() != 4)
                throw ParseError("expected 3 or 4 fields, got " + std::to_string(fields.size()), row_no);
            r.src = parse_int(fields[0], row_no);
            r.dst = parse_int(fields[1], row_no);
            r.t = parse_double(fields.back(), row_no);
        }
        if (!(r.t >= 0.0)) throw ParseError("negative or invalid timestamp", row_no);
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw ParseError("no events", 0);

    std::stable_sort(rows.begin(), rows.end(), [](const RawRow& a, const RawRow& b) { return a.t < b.t; });

    DatasetBundle b;
    b.name = std::move(name);
    b.d_e = d_e;
    std::vector<std::int64_t> srcs, dsts;
    for (const auto& r : rows) {
        srcs.push_back(r.src);
        dsts.push_back(r.dst);
    }
    std::map<std::int64_t, NodeId> src_map, dst_map;
    if (format == DatasetFormat::jodie_csv) {
        src_map = dense_ids(srcs, 0);
        dst_map = dense_ids(dsts, static_cast<NodeId>(src_map.size()));
        b.bipartite = true;
        b.first_partition_size = src_map.size();
        b.n_nodes = src_map.size() + dst_map.size();
    } else {
        auto all = srcs;
        all.insert(all.end(), dsts.begin(), dsts.end());
        src_map = dense_ids(all, 0);
        dst_map = src_map;
        b.n_nodes = src_map.size();
    }
    b.events.reserve(rows.size());
    for (auto& r : rows)
        b.events.push_back({src_map.at(r.src), dst_map.at(r.dst), r.t, std::move(r.features)});
    chronological_split(b);
    return b;
}

DatasetBundle load_dataset(const std::string& path, DatasetFormat format) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset '" + path + "'");
    auto slash = path.find_last_of('/');
    return parse_dataset(in, format, slash == std::string::npos ? path : path.substr(slash + 1));
}

Tensor load_node_features(const std::string& path, std::size_t n_nodes) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open node features '" + path + "'");
    std::vector<Vector> rows;
    std::string line;
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        auto view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        Vector r;
        for (auto f : split_fields(view, true)) r.push_back(parse_double(f, row_no));
        if (!rows.empty() && r.size() != rows.front().size()) throw ParseError("ragged feature row", row_no);
        rows.push_back(std::move(r));
    }
    if (rows.size() != n_nodes)
        throw Error("node features: " + std::to_string(rows.size()) + " rows for " + std::to_string(n_nodes) +
                    " nodes");
    Tensor t(n_nodes, rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < n_nodes; ++i) std::copy(rows[i].begin(), rows[i].end(), t.row(i).begin());
    return t;
}

void chronological_split(DatasetBundle& b, SplitRatios r) {
    const double sum = r.train + r.val + r.test;
    if (std::abs(sum - 1.0) > 1e-9) throw Error("split ratios must sum to 1");
    const auto n = static_cast<double>(b.events.size());
    b.train_end = static_cast<std::size_t>(std::floor(r.train * n + 1e-9));
    b.val_end = std::min(b.events.size(), static_cast<std::size_t>(std::floor((r.train + r.val) * n + 1e-9)));
    b.inductive.assign(b.n_nodes, true);
    for (std::size_t i = 0; i < b.train_end; ++i) {
        b.inductive[b.events[i].source] = false;
        b.inductive[b.events[i].destination] = false;
    }
}

}  // namespace selprop
