#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace seqhygan {

struct LabeledCorpus;

// Nodes are distinct subsequences (first-occurrence order), hyperedges are
// sequences as sets of node indices. The binary incidence matrix H (n x m)
// is kept as adjacency in both directions; H[i][j] = 1 iff node i is in
// hyperedge j.
struct SequenceHypergraph {
    std::vector<std::string> node_names;
    std::vector<std::vector<std::size_t>> edge_nodes; // sorted unique node ids per hyperedge
    std::vector<std::vector<std::size_t>> node_edges; // sorted edge ids per node
    std::vector<std::size_t> labels;                  // label index per hyperedge
    std::vector<std::string> label_names;
    std::size_t nnz = 0;

    std::size_t num_nodes() const { return node_names.size(); }
    std::size_t num_edges() const { return edge_nodes.size(); }
};

struct HypergraphStats {
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t nnz = 0;
    double kappa = 0.0; // mean hyperedges per node
    double chi = 0.0;   // mean nodes per hyperedge
};

// Duplicate tokens inside one sequence collapse: a hyperedge is the set of
// distinct tokens. Every token list must be non-empty.
SequenceHypergraph build_hypergraph(const LabeledCorpus& corpus,
                                    const std::vector<std::vector<std::string>>& tokens);

HypergraphStats stats(const SequenceHypergraph& hg);

// Coordinate-list text: header `n m nnz`, then one `node<TAB>edge` line per
// nonzero in ascending (node, edge) order. Round-trips losslessly.
void export_incidence(const SequenceHypergraph& hg, const std::string& path);

struct IncidenceData {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<std::pair<std::size_t, std::size_t>> entries;
};

IncidenceData import_incidence(const std::string& path);

// Sidecar `edge<TAB>label` lines.
void export_edge_labels(const SequenceHypergraph& hg, const std::string& path);
// One node name per line, in node id order.
void export_node_names(const SequenceHypergraph& hg, const std::string& path);

// Reassembles a hypergraph from the three files above.
SequenceHypergraph import_hypergraph(const std::string& incidence_path,
                                     const std::string& labels_path,
                                     const std::string& nodes_path);

} // namespace seqhygan
