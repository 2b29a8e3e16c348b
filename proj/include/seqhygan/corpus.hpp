#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace seqhygan {

struct SequenceRecord {
    std::size_t id = 0;
    std::string symbols; // uppercased at load
    std::string label;
};

struct LabeledCorpus {
    std::vector<SequenceRecord> records;
    std::vector<std::string> label_set; // ordered by first occurrence

    std::size_t size() const { return records.size(); }
    std::size_t num_classes() const { return label_set.size(); }
    std::size_t label_index(const std::string& label) const; // throws if unknown
};

enum class CorpusFormat { csv, fasta };

// csv: header `sequence,label`, one record per row. fasta-like: `>label`
// header lines, following non-`>` lines concatenated as the sequence.
LabeledCorpus load_corpus(const std::string& path, CorpusFormat format);

// Keeps the keep_top most frequent labels (ties broken lexicographically).
// Records with other labels are renamed to other_name when given, dropped
// (and re-indexed 0..N'-1) otherwise. keep_top >= C warns and is a no-op.
LabeledCorpus group_labels(const LabeledCorpus& corpus, std::size_t keep_top,
                           const std::optional<std::string>& other_name);

struct SplitAssignment {
    std::vector<std::size_t> train_ids;
    std::vector<std::size_t> val_ids;
    std::vector<std::size_t> test_ids;
    std::uint64_t seed = 0;
};

// Uniform shuffle then contiguous slicing; stratified draws the same bucket
// totals class by class. Pure function of (N, ratio, seed, stratified).
SplitAssignment make_split(const LabeledCorpus& corpus, const std::array<double, 3>& ratio,
                           std::uint64_t seed, bool stratified = false);

// `id<TAB>bucket` lines, ids ascending within each bucket's original order.
void export_split(const SplitAssignment& split, const std::string& path);
SplitAssignment import_split(const std::string& path);

} // namespace seqhygan
