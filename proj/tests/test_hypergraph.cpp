#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "seqhygan/corpus.hpp"
#include "seqhygan/errors.hpp"
#include "seqhygan/hypergraph.hpp"
#include "seqhygan/matrix.hpp"
#include "support/synthetic.hpp"

using namespace seqhygan;

namespace {

LabeledCorpus two_record_corpus() {
    LabeledCorpus c;
    c.label_set = {"x", "y"};
    c.records.push_back({0, "S1", "x"});
    c.records.push_back({1, "S2", "y"});
    return c;
}

// Structure-level view: each hyperedge as its set of node name strings.
std::multiset<std::set<std::string>> edge_name_sets(const SequenceHypergraph& hg) {
    std::multiset<std::set<std::string>> out;
    for (const auto& edge : hg.edge_nodes) {
        std::set<std::string> names;
        for (std::size_t i : edge) names.insert(hg.node_names[i]);
        out.insert(std::move(names));
    }
    return out;
}

} // namespace

TEST_CASE("direct construction of the 3-node 2-edge example") {
    SequenceHypergraph hg = build_hypergraph(two_record_corpus(), {{"AT", "TG"}, {"TG", "GG"}});
    CHECK(hg.num_nodes() == 3);
    CHECK(hg.num_edges() == 2);
    CHECK(hg.node_names == std::vector<std::string>{"AT", "TG", "GG"});
    CHECK(hg.node_edges[1].size() == 2); // TG is in both hyperedges
    CHECK(hg.nnz == 4);

    HypergraphStats s = stats(hg);
    CHECK(s.kappa == doctest::Approx(4.0 / 3.0));
    CHECK(s.chi == doctest::Approx(2.0));
}

TEST_CASE("single sequence with d distinct tokens has kappa=1, chi=d") {
    LabeledCorpus c;
    c.label_set = {"x"};
    c.records.push_back({0, "S", "x"});
    SequenceHypergraph hg = build_hypergraph(c, {{"a", "b", "c", "d"}});
    HypergraphStats s = stats(hg);
    CHECK(s.kappa == doctest::Approx(1.0));
    CHECK(s.chi == doctest::Approx(4.0));
}

TEST_CASE("duplicate tokens inside a sequence collapse to a set") {
    SequenceHypergraph hg = build_hypergraph(two_record_corpus(), {{"A", "A", "B"}, {"B"}});
    CHECK(hg.edge_nodes[0].size() == 2);
    CHECK(hg.nnz == 3);
}

TEST_CASE("empty token lists are rejected with the sequence id") {
    CHECK_THROWS_WITH_AS(build_hypergraph(two_record_corpus(), {{"A"}, {}}),
                         doctest::Contains("1"), DataError);
}

TEST_CASE("handshake identity nnz = n*kappa = m*chi on random corpora") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 50; ++rep) {
        SequenceHypergraph hg =
            synthetic::random_hypergraph(rng, 5 + uniform_index(rng, 40), 3 + uniform_index(rng, 30), 8);
        // independent nonzero recount straight from the edge sets
        std::size_t nnz = 0;
        for (const auto& e : hg.edge_nodes) nnz += e.size();
        HypergraphStats s = stats(hg);
        CHECK(s.nnz == nnz);
        CHECK(s.kappa * static_cast<double>(s.n) == doctest::Approx(static_cast<double>(nnz)));
        CHECK(s.chi * static_cast<double>(s.m) == doctest::Approx(static_cast<double>(nnz)));
    }
}

TEST_CASE("incidence columns reproduce the hyperedge sets exactly") {
    std::mt19937_64 rng(29);
    SequenceHypergraph hg = synthetic::random_hypergraph(rng, 20, 15, 6);
    // rebuild hyperedges from the node-major adjacency (H columns)
    std::vector<std::vector<std::size_t>> rebuilt(hg.num_edges());
    for (std::size_t i = 0; i < hg.num_nodes(); ++i) {
        for (std::size_t j : hg.node_edges[i]) rebuilt[j].push_back(i);
    }
    for (auto& v : rebuilt) std::sort(v.begin(), v.end());
    CHECK(rebuilt == hg.edge_nodes);
    // every node appears in at least one hyperedge
    for (const auto& edges : hg.node_edges) CHECK(!edges.empty());
}

TEST_CASE("token order permutations leave the hypergraph structure unchanged") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 20; ++rep) {
        std::size_t m = 3 + uniform_index(rng, 10);
        std::vector<std::vector<std::string>> tokens(m);
        LabeledCorpus c;
        c.label_set = {"x"};
        for (std::size_t j = 0; j < m; ++j) {
            std::size_t deg = 1 + uniform_index(rng, 6);
            for (std::size_t d = 0; d < deg; ++d) {
                tokens[j].push_back("t" + std::to_string(uniform_index(rng, 12)));
            }
            c.records.push_back({j, "S", "x"});
        }
        auto shuffled = tokens;
        for (auto& list : shuffled) {
            for (std::size_t i = list.size(); i > 1; --i) {
                std::swap(list[i - 1], list[uniform_index(rng, i)]);
            }
        }
        SequenceHypergraph a = build_hypergraph(c, tokens);
        SequenceHypergraph b = build_hypergraph(c, shuffled);
        CHECK(edge_name_sets(a) == edge_name_sets(b));
        CHECK(a.nnz == b.nnz);
        CHECK(a.num_nodes() == b.num_nodes());
    }
}

TEST_CASE("k-mer node count is bounded by min(total windows, p^k)") {
    std::mt19937_64 rng(37);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t p = 3, k = 2;
        LabeledCorpus c;
        c.label_set = {"x"};
        std::vector<std::vector<std::string>> tokens;
        std::size_t windows = 0;
        std::size_t m = 2 + uniform_index(rng, 10);
        for (std::size_t j = 0; j < m; ++j) {
            std::size_t t = k + uniform_index(rng, 20);
            std::string s;
            for (std::size_t i = 0; i < t; ++i) s += static_cast<char>('A' + uniform_index(rng, p));
            std::vector<std::string> toks;
            for (std::size_t i = 0; i + k <= s.size(); ++i) toks.push_back(s.substr(i, k));
            windows += toks.size();
            tokens.push_back(std::move(toks));
            c.records.push_back({j, s, "x"});
        }
        SequenceHypergraph hg = build_hypergraph(c, tokens);
        std::size_t pk = 1;
        for (std::size_t i = 0; i < k; ++i) pk *= p;
        CHECK(hg.num_nodes() <= std::min(windows, pk));
    }
}

TEST_CASE("incidence export round-trips and writes the documented header") {
    SequenceHypergraph hg = build_hypergraph(two_record_corpus(), {{"AT", "TG"}, {"TG", "GG"}});
    export_incidence(hg, "t_inc.tsv");
    std::ifstream in("t_inc.tsv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "3 2 4");

    IncidenceData data = import_incidence("t_inc.tsv");
    CHECK(data.n == 3);
    CHECK(data.m == 2);
    REQUIRE(data.entries.size() == 4);
    // ascending (node, edge) order
    CHECK(std::is_sorted(data.entries.begin(), data.entries.end()));

    export_edge_labels(hg, "t_lab.tsv");
    export_node_names(hg, "t_nodes.txt");
    SequenceHypergraph back = import_hypergraph("t_inc.tsv", "t_lab.tsv", "t_nodes.txt");
    CHECK(back.edge_nodes == hg.edge_nodes);
    CHECK(back.node_edges == hg.node_edges);
    CHECK(back.node_names == hg.node_names);
    CHECK(back.labels == hg.labels);
    std::remove("t_inc.tsv");
    std::remove("t_lab.tsv");
    std::remove("t_nodes.txt");
}

TEST_CASE("incidence export rejects an empty path") {
    SequenceHypergraph hg = build_hypergraph(two_record_corpus(), {{"A"}, {"B"}});
    CHECK_THROWS_AS(export_incidence(hg, ""), DataError);
}
