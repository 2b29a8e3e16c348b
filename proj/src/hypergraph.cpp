#include "seqhygan/hypergraph.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "seqhygan/corpus.hpp"
#include "seqhygan/errors.hpp"

namespace seqhygan {

SequenceHypergraph build_hypergraph(const LabeledCorpus& corpus,
                                    const std::vector<std::vector<std::string>>& tokens) {
    if (tokens.size() != corpus.size()) {
        throw std::invalid_argument("build_hypergraph: expected one token list per record");
    }
    SequenceHypergraph hg;
    hg.label_names = corpus.label_set;
    std::unordered_map<std::string, std::size_t> node_id;
    std::unordered_map<std::string, std::size_t> label_id;
    for (std::size_t i = 0; i < hg.label_names.size(); ++i) label_id[hg.label_names[i]] = i;

    for (std::size_t j = 0; j < tokens.size(); ++j) {
        if (tokens[j].empty()) {
            throw DataError("build_hypergraph: sequence id " + std::to_string(j) + " has no tokens");
        }
        std::vector<std::size_t> members;
        for (const std::string& t : tokens[j]) {
            auto it = node_id.find(t);
            std::size_t id;
            if (it == node_id.end()) {
                id = hg.node_names.size();
                node_id.emplace(t, id);
                hg.node_names.push_back(t);
            } else {
                id = it->second;
            }
            members.push_back(id);
        }
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
        hg.nnz += members.size();
        hg.edge_nodes.push_back(std::move(members));
        hg.labels.push_back(label_id.at(corpus.records[j].label));
    }

    hg.node_edges.resize(hg.node_names.size());
    for (std::size_t j = 0; j < hg.edge_nodes.size(); ++j) {
        for (std::size_t i : hg.edge_nodes[j]) hg.node_edges[i].push_back(j);
    }
    return hg;
}

HypergraphStats stats(const SequenceHypergraph& hg) {
    HypergraphStats s;
    s.n = hg.num_nodes();
    s.m = hg.num_edges();
    s.nnz = hg.nnz;
    s.kappa = s.n == 0 ? 0.0 : static_cast<double>(s.nnz) / static_cast<double>(s.n);
    s.chi = s.m == 0 ? 0.0 : static_cast<double>(s.nnz) / static_cast<double>(s.m);
    return s;
}

void export_incidence(const SequenceHypergraph& hg, const std::string& path) {
    if (path.empty()) throw DataError("export_incidence: empty path");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write incidence file: " + path);
    out << hg.num_nodes() << " " << hg.num_edges() << " " << hg.nnz << "\n";
    for (std::size_t i = 0; i < hg.node_edges.size(); ++i) {
        for (std::size_t j : hg.node_edges[i]) out << i << "\t" << j << "\n";
    }
    if (!out) throw DataError("short write: " + path);
}

IncidenceData import_incidence(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open incidence file: " + path);
    IncidenceData data;
    std::size_t nnz = 0;
    if (!(in >> data.n >> data.m >> nnz)) throw DataError(path + ": missing `n m nnz` header");
    std::size_t i, j;
    while (in >> i >> j) {
        if (i >= data.n || j >= data.m) throw DataError(path + ": entry out of range");
        data.entries.emplace_back(i, j);
    }
    if (data.entries.size() != nnz) {
        throw DataError(path + ": expected " + std::to_string(nnz) + " entries, found " +
                        std::to_string(data.entries.size()));
    }
    return data;
}

void export_edge_labels(const SequenceHypergraph& hg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write labels file: " + path);
    for (std::size_t j = 0; j < hg.labels.size(); ++j) {
        out << j << "\t" << hg.label_names[hg.labels[j]] << "\n";
    }
    if (!out) throw DataError("short write: " + path);
}

void export_node_names(const SequenceHypergraph& hg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write node names file: " + path);
    for (const std::string& name : hg.node_names) out << name << "\n";
    if (!out) throw DataError("short write: " + path);
}

SequenceHypergraph import_hypergraph(const std::string& incidence_path,
                                     const std::string& labels_path,
                                     const std::string& nodes_path) {
    IncidenceData inc = import_incidence(incidence_path);
    SequenceHypergraph hg;
    hg.nnz = inc.entries.size();
    hg.edge_nodes.resize(inc.m);
    hg.node_edges.resize(inc.n);
    for (const auto& [i, j] : inc.entries) {
        hg.edge_nodes[j].push_back(i);
        hg.node_edges[i].push_back(j);
    }
    for (auto& v : hg.edge_nodes) std::sort(v.begin(), v.end());
    for (auto& v : hg.node_edges) std::sort(v.begin(), v.end());

    std::ifstream nodes(nodes_path);
    if (!nodes) throw DataError("cannot open node names file: " + nodes_path);
    std::string line;
    while (std::getline(nodes, line)) {
        if (!line.empty()) hg.node_names.push_back(line);
    }
    if (hg.node_names.size() != inc.n) {
        throw DataError(nodes_path + ": expected " + std::to_string(inc.n) + " node names");
    }

    std::ifstream labels(labels_path);
    if (!labels) throw DataError("cannot open labels file: " + labels_path);
    hg.labels.resize(inc.m);
    std::unordered_map<std::string, std::size_t> label_id;
    std::size_t seen = 0;
    while (std::getline(labels, line)) {
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos) throw DataError(labels_path + ": expected `edge<TAB>label`");
        std::size_t edge = std::stoull(line.substr(0, tab));
        std::string label = line.substr(tab + 1);
        if (edge >= inc.m) throw DataError(labels_path + ": edge index out of range");
        auto it = label_id.find(label);
        if (it == label_id.end()) {
            it = label_id.emplace(label, hg.label_names.size()).first;
            hg.label_names.push_back(label);
        }
        hg.labels[edge] = it->second;
        ++seen;
    }
    if (seen != inc.m) throw DataError(labels_path + ": expected one label per hyperedge");
    return hg;
}

} // namespace seqhygan
