#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace seqhygan {

struct LabeledCorpus;

struct VocabEntry {
    std::string token;
    std::uint64_t freq = 0;
};

enum class TokenizeMethod { kmer, espf };

// Ordered subsequence vocabulary. For espf the single-character alphabet
// comes first (first-occurrence order, corpus-wide character counts as
// frequency) followed by one entry per merge, most frequent first, with the
// pair frequency observed when the merge was learned. merges[i] holds the
// entry indices (a, b) that formed entries[alphabet_size + i].
struct SubseqVocabulary {
    TokenizeMethod method = TokenizeMethod::kmer;
    std::vector<VocabEntry> entries;
    std::size_t alphabet_size = 0;
    std::vector<std::pair<std::size_t, std::size_t>> merges;
    std::uint64_t beta_freq = 0;
    std::size_t max_merges = 0;
    std::size_t k = 0;
};

struct TokenizedSequence {
    std::size_t sequence_id = 0;
    std::vector<std::string> tokens;
    std::vector<std::string> unknown_symbols; // out-of-vocabulary monomers, deduplicated
};

// All t-k+1 overlapping windows, left to right, duplicates preserved.
std::vector<std::string> decompose_kmer(std::string_view sequence, std::size_t k);

struct EspfResult {
    SubseqVocabulary vocab;
    std::vector<std::vector<std::string>> tokenized; // per input sequence
};

// Iterative most-frequent adjacent-pair merging (at most max_merges rounds,
// stop when the best pair count drops below beta_freq). Pair counts are
// corpus-wide adjacency occurrence counts; ties break lexicographically on
// (a, b); replacement within a sequence is left-to-right and non-overlapping.
EspfResult train_espf_full(const std::vector<std::string>& corpus, std::uint64_t beta_freq,
                           std::size_t max_merges);
SubseqVocabulary train_espf(const std::vector<std::string>& corpus, std::uint64_t beta_freq,
                            std::size_t max_merges);

// Character-level tokenization, then the learned merges replayed in learned
// order. Unknown characters stay as their own tokens and are reported in
// unknown_symbols.
TokenizedSequence encode_espf(std::string_view sequence, const SubseqVocabulary& vocab);

// One `token<TAB>frequency` line per entry in merge order, preceded by
// `#`-prefixed metadata lines that make reloading reproduce identical
// encodings (method, params, merge structure).
void save_vocabulary(const SubseqVocabulary& vocab, const std::string& path);
SubseqVocabulary load_vocabulary(const std::string& path);

struct DeBruijnGraph {
    std::vector<std::string> nodes; // distinct k-mers, first occurrence order
    std::vector<std::pair<std::size_t, std::size_t>> edges; // deduplicated consecutive pairs
};

DeBruijnGraph build_debruijn(std::string_view sequence, std::size_t k);

// Corpus-level tokenization used by the pipeline. kmer decomposes each
// record (collecting every too-short record id into one error); espf trains
// on the whole corpus and returns its tokenized output directly.
struct TokenizerSpec {
    TokenizeMethod method = TokenizeMethod::kmer;
    std::size_t k = 3;
    std::uint64_t beta_freq = 5;
    std::size_t max_merges = 0; // 0 = unlimited
};

struct CorpusTokenization {
    std::vector<std::vector<std::string>> tokens; // per record
    SubseqVocabulary vocab;
};

CorpusTokenization tokenize_corpus(const LabeledCorpus& corpus, const TokenizerSpec& spec);

} // namespace seqhygan
