#include <map>
#include <sstream>

#include "doctest.h"
#include "synthetic.hpp"

using namespace selprop;

TEST_CASE("synthetic streams are seeded and ordered") {
    SyntheticSpec spec;
    spec.n_events = 500;
    auto a = generate_synthetic(spec, 3);
    auto b = generate_synthetic(spec, 3);
    auto c = generate_synthetic(spec, 4);
    CHECK(a.events == b.events);
    CHECK_FALSE(a.events == c.events);
    REQUIRE(a.events.size() == 500);
    CHECK(a.n_nodes == 100);
    for (std::size_t i = 0; i < a.events.size(); ++i) {
        CHECK(a.events[i].source != a.events[i].destination);
        CHECK(a.events[i].source < a.n_nodes);
        CHECK(a.events[i].destination < a.n_nodes);
        if (i) CHECK(a.events[i - 1].timestamp <= a.events[i].timestamp);
    }
}

TEST_CASE("community structure and migration") {
    SyntheticSpec spec;
    spec.n_events = 4000;
    spec.noisy_fraction = 0.1;
    spec.stale_fraction = 0.2;
    auto data = generate_synthetic(spec, 1);
    std::size_t noisy = 0, moved = 0;
    for (std::size_t v = 0; v < data.n_nodes; ++v) {
        noisy += data.noisy[v];
        moved += data.community_before[v] != data.community_after[v];
        if (data.noisy[v]) CHECK(data.community_before[v] == data.community_after[v]);
    }
    CHECK(noisy == 10);
    CHECK(moved == 18);  // 20% of the 90 ordinary nodes

    // ordinary-to-ordinary events before the horizon stay mostly inside a community
    std::size_t intra = 0, total = 0;
    for (std::size_t i = 0; i < 2000; ++i) {
        const auto& e = data.events[i];
        if (data.noisy[e.source] || data.noisy[e.destination]) continue;
        ++total;
        intra += data.community_before[e.source] == data.community_before[e.destination];
    }
    CHECK(static_cast<double>(intra) / static_cast<double>(total) > 0.85);
}

TEST_CASE("spec validation") {
    SyntheticSpec spec;
    spec.nodes_per_community = 0;
    CHECK_THROWS(generate_synthetic(spec, 0));
    spec = {};
    spec.p_intra = 1.5;
    CHECK_THROWS(spec.validate());
    spec = {};
    spec.n_events = 0;
    CHECK_THROWS(spec.validate());
}

TEST_CASE("edge list round trip") {
    SyntheticSpec spec;
    spec.n_events = 300;
    auto data = generate_synthetic(spec, 8);
    std::ostringstream out;
    write_edge_list(data.events, out);
    std::istringstream in(out.str());
    auto parsed = parse_dataset(in, DatasetFormat::edge_list, "synthetic");
    REQUIRE(parsed.events.size() == data.events.size());
    for (std::size_t i = 0; i < parsed.events.size(); ++i)
        CHECK(parsed.events[i].timestamp == data.events[i].timestamp);

    auto bundle = bundle_from_events(data.events, data.n_nodes);
    CHECK(bundle.train_end == 240);
    CHECK(bundle.val_end == 270);
    CHECK(bundle.n_nodes == 100);
}
