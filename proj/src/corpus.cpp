#include "seqhygan/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <unordered_map>

#include "seqhygan/errors.hpp"
#include "seqhygan/matrix.hpp"

namespace seqhygan {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

void push_record(std::vector<SequenceRecord>& records, std::vector<std::string>& label_set,
                 std::unordered_map<std::string, std::size_t>& label_index,
                 std::string symbols, std::string label) {
    if (!label_index.count(label)) {
        label_index[label] = label_set.size();
        label_set.push_back(label);
    }
    SequenceRecord rec;
    rec.id = records.size();
    rec.symbols = upper(std::move(symbols));
    rec.label = std::move(label);
    records.push_back(std::move(rec));
}

LabeledCorpus load_csv(std::ifstream& in, const std::string& path) {
    LabeledCorpus corpus;
    std::unordered_map<std::string, std::size_t> label_index;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw DataError("empty file: " + path);
    ++line_no;
    if (trim(line) != "sequence,label") {
        throw DataError(path + ": expected header `sequence,label`, got `" + trim(line) + "`");
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::size_t comma = line.find(',');
        if (comma == std::string::npos) {
            throw DataError(path + ":" + std::to_string(line_no) + ": missing `,` delimiter");
        }
        std::string seq = trim(line.substr(0, comma));
        std::string label = trim(line.substr(comma + 1));
        if (seq.empty()) throw DataError(path + ":" + std::to_string(line_no) + ": empty sequence");
        if (label.empty()) throw DataError(path + ":" + std::to_string(line_no) + ": empty label");
        push_record(corpus.records, corpus.label_set, label_index, std::move(seq), std::move(label));
    }
    if (corpus.records.empty()) throw DataError("no data rows in " + path);
    return corpus;
}

LabeledCorpus load_fasta(std::ifstream& in, const std::string& path) {
    LabeledCorpus corpus;
    std::unordered_map<std::string, std::size_t> label_index;
    std::string line, label, seq;
    std::size_t line_no = 0, record_line = 0;
    bool have_header = false;
    auto flush = [&] {
        if (!have_header) return;
        if (seq.empty()) {
            throw DataError(path + ":" + std::to_string(record_line) + ": header without sequence");
        }
        if (label.empty()) {
            throw DataError(path + ":" + std::to_string(record_line) + ": empty label");
        }
        push_record(corpus.records, corpus.label_set, label_index, std::move(seq), label);
        seq.clear();
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '>') {
            flush();
            have_header = true;
            record_line = line_no;
            label = trim(t.substr(1));
        } else {
            if (!have_header) {
                throw DataError(path + ":" + std::to_string(line_no) + ": sequence before any `>` header");
            }
            seq += t;
        }
    }
    flush();
    if (corpus.records.empty()) throw DataError("empty file: " + path);
    return corpus;
}

} // namespace

std::size_t LabeledCorpus::label_index(const std::string& label) const {
    for (std::size_t i = 0; i < label_set.size(); ++i) {
        if (label_set[i] == label) return i;
    }
    throw DataError("unknown label: " + label);
}

LabeledCorpus load_corpus(const std::string& path, CorpusFormat format) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    return format == CorpusFormat::csv ? load_csv(in, path) : load_fasta(in, path);
}

LabeledCorpus group_labels(const LabeledCorpus& corpus, std::size_t keep_top,
                           const std::optional<std::string>& other_name) {
    if (keep_top < 1) throw std::invalid_argument("group_labels: keep_top must be >= 1");
    if (keep_top >= corpus.num_classes()) {
        std::cerr << "warning: keep_top=" << keep_top << " >= " << corpus.num_classes()
                  << " distinct labels; group_labels is a no-op\n";
        return corpus;
    }
    std::unordered_map<std::string, std::size_t> freq;
    for (const auto& r : corpus.records) ++freq[r.label];
    std::vector<std::string> order = corpus.label_set;
    std::sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
        if (freq[a] != freq[b]) return freq[a] > freq[b];
        return a < b;
    });
    order.resize(keep_top);
    std::unordered_map<std::string, bool> keep;
    for (const auto& l : order) keep[l] = true;

    LabeledCorpus out;
    std::unordered_map<std::string, std::size_t> label_index;
    for (const auto& r : corpus.records) {
        if (keep.count(r.label)) {
            push_record(out.records, out.label_set, label_index, r.symbols, r.label);
        } else if (other_name) {
            push_record(out.records, out.label_set, label_index, r.symbols, *other_name);
        }
        // dropped otherwise
    }
    if (out.records.empty()) throw DataError("group_labels removed every record");
    return out;
}

SplitAssignment make_split(const LabeledCorpus& corpus, const std::array<double, 3>& ratio,
                           std::uint64_t seed, bool stratified) {
    const std::size_t n = corpus.size();
    if (n < 10) throw DataError("make_split: need at least 10 records, got " + std::to_string(n));
    const double sum = ratio[0] + ratio[1] + ratio[2];
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("make_split: ratios must sum to 1, got " + std::to_string(sum));
    }

    const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratio[0]));
    const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratio[1]));
    if (n_train + n_val > n) throw std::invalid_argument("make_split: degenerate ratios");
    const std::size_t n_test = n - n_train - n_val;

    std::mt19937_64 rng(seed);
    auto shuffle_ids = [&rng](std::vector<std::size_t>& ids) {
        for (std::size_t i = ids.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
            std::swap(ids[i - 1], ids[j]);
        }
    };

    SplitAssignment split;
    split.seed = seed;
    if (!stratified) {
        std::vector<std::size_t> ids(n);
        for (std::size_t i = 0; i < n; ++i) ids[i] = i;
        shuffle_ids(ids);
        split.train_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
        split.val_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train),
                             ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
        split.test_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), ids.end());
        return split;
    }

    // Stratified: allocate per class by largest remainder, then shave any
    // global drift so bucket totals match the unstratified sizes exactly.
    std::map<std::string, std::vector<std::size_t>> by_label;
    for (const auto& r : corpus.records) by_label[r.label].push_back(r.id);
    std::array<std::vector<std::size_t>*, 3> buckets = {&split.train_ids, &split.val_ids, &split.test_ids};
    for (auto& [label, ids] : by_label) {
        shuffle_ids(ids);
        const double nc = static_cast<double>(ids.size());
        std::array<std::size_t, 3> want{};
        std::array<double, 3> frac{};
        std::size_t assigned = 0;
        for (int b = 0; b < 3; ++b) {
            double exact = nc * ratio[b];
            want[b] = static_cast<std::size_t>(exact);
            frac[b] = exact - static_cast<double>(want[b]);
            assigned += want[b];
        }
        while (assigned < ids.size()) {
            int best = 0;
            for (int b = 1; b < 3; ++b) {
                if (frac[b] > frac[best]) best = b;
            }
            ++want[best];
            frac[best] = -1.0;
            ++assigned;
        }
        std::size_t pos = 0;
        for (int b = 0; b < 3; ++b) {
            for (std::size_t k = 0; k < want[b]; ++k) buckets[b]->push_back(ids[pos++]);
        }
    }
    const std::array<std::size_t, 3> target = {n_train, n_val, n_test};
    for (int from = 0; from < 3; ++from) {
        for (int to = 0; to < 3; ++to) {
            while (buckets[from]->size() > target[from] && buckets[to]->size() < target[to]) {
                buckets[to]->push_back(buckets[from]->back());
                buckets[from]->pop_back();
            }
        }
    }
    return split;
}

void export_split(const SplitAssignment& split, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write split manifest: " + path);
    for (std::size_t id : split.train_ids) out << id << "\ttrain\n";
    for (std::size_t id : split.val_ids) out << id << "\tval\n";
    for (std::size_t id : split.test_ids) out << id << "\ttest\n";
    if (!out) throw DataError("short write: " + path);
}

SplitAssignment import_split(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open split manifest: " + path);
    SplitAssignment split;
    std::size_t id;
    std::string bucket;
    while (in >> id >> bucket) {
        if (bucket == "train") {
            split.train_ids.push_back(id);
        } else if (bucket == "val") {
            split.val_ids.push_back(id);
        } else if (bucket == "test") {
            split.test_ids.push_back(id);
        } else {
            throw DataError(path + ": unknown bucket `" + bucket + "`");
        }
    }
    return split;
}

} // namespace seqhygan
