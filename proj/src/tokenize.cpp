#include "seqhygan/tokenize.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "seqhygan/corpus.hpp"
#include "seqhygan/errors.hpp"

namespace seqhygan {

namespace {

constexpr std::int32_t kDead = -1;

std::uint64_t pair_key(std::int32_t a, std::int32_t b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(b));
}

// Token stream over all sequences, flattened. next/prev never cross
// sequence boundaries (-1 terminated), so flat position order is
// (sequence, offset) order and sorting positions gives left-to-right
// replacement within each sequence.
struct TokenStream {
    std::vector<std::int32_t> tok;
    std::vector<std::int64_t> prev;
    std::vector<std::int64_t> next;
    std::vector<std::pair<std::size_t, std::size_t>> bounds; // [begin, end) per sequence

    void append_sequence(const std::vector<std::int32_t>& ids) {
        std::size_t begin = tok.size();
        for (std::size_t i = 0; i < ids.size(); ++i) {
            tok.push_back(ids[i]);
            prev.push_back(i == 0 ? -1 : static_cast<std::int64_t>(tok.size()) - 2);
            next.push_back(i + 1 == ids.size() ? -1 : static_cast<std::int64_t>(tok.size()));
        }
        bounds.emplace_back(begin, tok.size());
    }

    std::vector<std::int32_t> sequence_tokens(std::size_t s) const {
        std::vector<std::int32_t> out;
        std::size_t p = bounds[s].first;
        if (p == bounds[s].second) return out;
        // the head may have been consumed only if the sequence is empty; heads
        // are never removed because merges keep the left position alive
        for (std::int64_t q = static_cast<std::int64_t>(p); q != -1; q = next[q]) {
            out.push_back(tok[q]);
        }
        return out;
    }
};

struct PairIndex {
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> positions;
    std::unordered_map<std::uint64_t, std::int64_t> counts;

    void add(std::int32_t a, std::int32_t b, std::size_t pos) {
        std::uint64_t key = pair_key(a, b);
        positions[key].push_back(pos);
        ++counts[key];
    }

    void remove(std::int32_t a, std::int32_t b) {
        std::uint64_t key = pair_key(a, b);
        auto it = counts.find(key);
        if (it == counts.end()) return; // pair being merged was already erased
        if (--it->second <= 0) {
            counts.erase(it);
            positions.erase(key);
        }
    }
};

struct HeapEntry {
    std::int64_t count;
    std::int32_t a;
    std::int32_t b;
};

// Applies one merge everywhere it is valid. Occurrence lists may contain
// stale positions; each is re-validated against the live stream.
// on_pair_changed fires for every pair whose count moved, so a selection
// heap can re-enqueue the current count (stale heap entries are discarded
// on pop).
template <typename OnPairChanged>
std::int64_t apply_merge(TokenStream& ts, PairIndex& index, std::int32_t a, std::int32_t b,
                         std::int32_t merged, const OnPairChanged& on_pair_changed) {
    std::uint64_t key = pair_key(a, b);
    auto pit = index.positions.find(key);
    if (pit == index.positions.end()) return 0;
    std::vector<std::size_t> occ = std::move(pit->second);
    index.positions.erase(pit);
    index.counts.erase(key);
    std::sort(occ.begin(), occ.end());

    std::int64_t applied = 0;
    for (std::size_t pos : occ) {
        if (ts.tok[pos] != a) continue;
        std::int64_t nxt = ts.next[pos];
        if (nxt == -1 || ts.tok[nxt] != b) continue;
        std::int64_t left = ts.prev[pos];
        std::int64_t right = ts.next[nxt];
        if (left != -1) {
            index.remove(ts.tok[left], a);
            on_pair_changed(ts.tok[left], a);
        }
        if (right != -1) {
            index.remove(b, ts.tok[right]);
            on_pair_changed(b, ts.tok[right]);
        }
        ts.tok[pos] = merged;
        ts.tok[nxt] = kDead;
        ts.next[pos] = right;
        if (right != -1) ts.prev[right] = static_cast<std::int64_t>(pos);
        if (left != -1) {
            index.add(ts.tok[left], merged, static_cast<std::size_t>(left));
            on_pair_changed(ts.tok[left], merged);
        }
        if (right != -1) {
            index.add(merged, ts.tok[right], pos);
            on_pair_changed(merged, ts.tok[right]);
        }
        ++applied;
    }
    return applied;
}

} // namespace

std::vector<std::string> decompose_kmer(std::string_view sequence, std::size_t k) {
    if (k == 0) throw std::invalid_argument("decompose_kmer: k must be >= 1");
    if (k > sequence.size()) {
        throw DataError("decompose_kmer: k=" + std::to_string(k) + " exceeds sequence length t=" +
                        std::to_string(sequence.size()));
    }
    std::vector<std::string> out;
    out.reserve(sequence.size() - k + 1);
    for (std::size_t i = 0; i + k <= sequence.size(); ++i) {
        out.emplace_back(sequence.substr(i, k));
    }
    return out;
}

EspfResult train_espf_full(const std::vector<std::string>& corpus, std::uint64_t beta_freq,
                           std::size_t max_merges) {
    if (corpus.empty()) throw DataError("train_espf: empty corpus");
    if (beta_freq < 1) throw std::invalid_argument("train_espf: beta_freq must be >= 1");
    if (max_merges < 1) throw std::invalid_argument("train_espf: max_merges must be >= 1");

    EspfResult result;
    SubseqVocabulary& vocab = result.vocab;
    vocab.method = TokenizeMethod::espf;
    vocab.beta_freq = beta_freq;
    vocab.max_merges = max_merges;

    // Initial token set: single characters in first-occurrence order.
    std::unordered_map<char, std::int32_t> char_id;
    std::vector<std::uint64_t> char_freq;
    TokenStream ts;
    for (const std::string& seq : corpus) {
        std::vector<std::int32_t> ids;
        ids.reserve(seq.size());
        for (char c : seq) {
            auto it = char_id.find(c);
            if (it == char_id.end()) {
                it = char_id.emplace(c, static_cast<std::int32_t>(vocab.entries.size())).first;
                vocab.entries.push_back({std::string(1, c), 0});
                char_freq.push_back(0);
            }
            ++char_freq[static_cast<std::size_t>(it->second)];
            ids.push_back(it->second);
        }
        ts.append_sequence(ids);
    }
    vocab.alphabet_size = vocab.entries.size();
    for (std::size_t i = 0; i < vocab.alphabet_size; ++i) vocab.entries[i].freq = char_freq[i];

    PairIndex index;
    for (std::size_t s = 0; s < ts.bounds.size(); ++s) {
        for (std::size_t p = ts.bounds[s].first; p + 1 < ts.bounds[s].second; ++p) {
            index.add(ts.tok[p], ts.tok[p + 1], p);
        }
    }

    // Max-heap on (count, lexicographic (a, b) ascending). Stale entries are
    // discarded on pop; every count change pushes a fresh entry, so the top
    // valid entry is the true maximum.
    auto cmp = [&vocab](const HeapEntry& x, const HeapEntry& y) {
        if (x.count != y.count) return x.count < y.count;
        const std::string& xa = vocab.entries[static_cast<std::size_t>(x.a)].token;
        const std::string& ya = vocab.entries[static_cast<std::size_t>(y.a)].token;
        if (xa != ya) return xa > ya;
        return vocab.entries[static_cast<std::size_t>(x.b)].token >
               vocab.entries[static_cast<std::size_t>(y.b)].token;
    };
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, decltype(cmp)> heap(cmp);
    for (const auto& [key, count] : index.counts) {
        heap.push({count, static_cast<std::int32_t>(key >> 32),
                   static_cast<std::int32_t>(key & 0xffffffffu)});
    }
    auto on_pair_changed = [&](std::int32_t a, std::int32_t b) {
        auto it = index.counts.find(pair_key(a, b));
        if (it != index.counts.end()) heap.push({it->second, a, b});
    };

    for (std::size_t round = 0; round < max_merges; ++round) {
        HeapEntry best{0, 0, 0};
        bool found = false;
        while (!heap.empty()) {
            HeapEntry top = heap.top();
            auto it = index.counts.find(pair_key(top.a, top.b));
            if (it != index.counts.end() && it->second == top.count) {
                best = top;
                found = true;
                break;
            }
            heap.pop(); // stale
        }
        if (!found || static_cast<std::uint64_t>(best.count) < beta_freq) break;

        const std::int32_t merged = static_cast<std::int32_t>(vocab.entries.size());
        vocab.entries.push_back({vocab.entries[static_cast<std::size_t>(best.a)].token +
                                     vocab.entries[static_cast<std::size_t>(best.b)].token,
                                 static_cast<std::uint64_t>(best.count)});
        vocab.merges.emplace_back(static_cast<std::size_t>(best.a), static_cast<std::size_t>(best.b));
        apply_merge(ts, index, best.a, best.b, merged, on_pair_changed);
    }

    result.tokenized.reserve(corpus.size());
    for (std::size_t s = 0; s < ts.bounds.size(); ++s) {
        std::vector<std::string> toks;
        for (std::int32_t id : ts.sequence_tokens(s)) {
            toks.push_back(vocab.entries[static_cast<std::size_t>(id)].token);
        }
        result.tokenized.push_back(std::move(toks));
    }
    return result;
}

SubseqVocabulary train_espf(const std::vector<std::string>& corpus, std::uint64_t beta_freq,
                            std::size_t max_merges) {
    return train_espf_full(corpus, beta_freq, max_merges).vocab;
}

TokenizedSequence encode_espf(std::string_view sequence, const SubseqVocabulary& vocab) {
    if (vocab.method != TokenizeMethod::espf) {
        throw std::invalid_argument("encode_espf: vocabulary was not built by espf");
    }
    TokenizedSequence out;
    std::unordered_map<char, std::int32_t> char_id;
    for (std::size_t i = 0; i < vocab.alphabet_size; ++i) char_id[vocab.entries[i].token[0]] = static_cast<std::int32_t>(i);

    // Unknown characters get ids past the vocabulary; no merge references
    // them, so they survive as their own tokens.
    std::vector<std::string> extra;
    std::vector<std::int32_t> ids;
    ids.reserve(sequence.size());
    for (char c : sequence) {
        auto it = char_id.find(c);
        if (it == char_id.end()) {
            std::int32_t id = static_cast<std::int32_t>(vocab.entries.size() + extra.size());
            char_id.emplace(c, id);
            extra.push_back(std::string(1, c));
            out.unknown_symbols.push_back(std::string(1, c));
            ids.push_back(id);
        } else {
            ids.push_back(it->second);
        }
    }

    TokenStream ts;
    ts.append_sequence(ids);
    PairIndex index;
    if (!ids.empty()) {
        for (std::size_t p = 0; p + 1 < ids.size(); ++p) index.add(ts.tok[p], ts.tok[p + 1], p);
    }
    auto ignore_pair_changed = [](std::int32_t, std::int32_t) {};
    for (std::size_t t = 0; t < vocab.merges.size(); ++t) {
        apply_merge(ts, index, static_cast<std::int32_t>(vocab.merges[t].first),
                    static_cast<std::int32_t>(vocab.merges[t].second),
                    static_cast<std::int32_t>(vocab.alphabet_size + t), ignore_pair_changed);
    }
    if (!ids.empty()) {
        for (std::int32_t id : ts.sequence_tokens(0)) {
            if (static_cast<std::size_t>(id) < vocab.entries.size()) {
                out.tokens.push_back(vocab.entries[static_cast<std::size_t>(id)].token);
            } else {
                out.tokens.push_back(extra[static_cast<std::size_t>(id) - vocab.entries.size()]);
            }
        }
    }
    return out;
}

void save_vocabulary(const SubseqVocabulary& vocab, const std::string& path) {
    std::ofstream outf(path);
    if (!outf) throw DataError("cannot write vocabulary: " + path);
    outf << "# seqhygan-vocab v1\n";
    if (vocab.method == TokenizeMethod::espf) {
        outf << "# method=espf beta_freq=" << vocab.beta_freq << " max_merges=" << vocab.max_merges
             << " alphabet=" << vocab.alphabet_size << "\n";
        outf << "# merges:";
        for (const auto& [a, b] : vocab.merges) outf << " " << a << "," << b;
        outf << "\n";
    } else {
        outf << "# method=kmer k=" << vocab.k << "\n";
    }
    for (const VocabEntry& e : vocab.entries) outf << e.token << "\t" << e.freq << "\n";
    if (!outf) throw DataError("short write: " + path);
}

SubseqVocabulary load_vocabulary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open vocabulary: " + path);
    SubseqVocabulary vocab;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line.substr(1));
            std::string word;
            if (first) {
                first = false;
                continue; // magic line
            }
            while (ss >> word) {
                if (word.rfind("method=", 0) == 0) {
                    vocab.method = word.substr(7) == "espf" ? TokenizeMethod::espf : TokenizeMethod::kmer;
                } else if (word.rfind("beta_freq=", 0) == 0) {
                    vocab.beta_freq = std::stoull(word.substr(10));
                } else if (word.rfind("max_merges=", 0) == 0) {
                    vocab.max_merges = std::stoull(word.substr(11));
                } else if (word.rfind("alphabet=", 0) == 0) {
                    vocab.alphabet_size = std::stoull(word.substr(9));
                } else if (word.rfind("k=", 0) == 0) {
                    vocab.k = std::stoull(word.substr(2));
                } else if (word == "merges:") {
                    std::string pair;
                    while (ss >> pair) {
                        std::size_t comma = pair.find(',');
                        if (comma == std::string::npos) throw DataError(path + ": malformed merge entry");
                        vocab.merges.emplace_back(std::stoull(pair.substr(0, comma)),
                                                  std::stoull(pair.substr(comma + 1)));
                    }
                }
            }
            continue;
        }
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos) throw DataError(path + ": expected `token<TAB>frequency`");
        vocab.entries.push_back({line.substr(0, tab), std::stoull(line.substr(tab + 1))});
    }
    if (vocab.entries.empty()) throw DataError("empty vocabulary: " + path);
    if (vocab.method == TokenizeMethod::espf &&
        vocab.entries.size() != vocab.alphabet_size + vocab.merges.size()) {
        throw DataError(path + ": entry count does not match alphabet + merges");
    }
    return vocab;
}

DeBruijnGraph build_debruijn(std::string_view sequence, std::size_t k) {
    std::vector<std::string> windows = decompose_kmer(sequence, k);
    DeBruijnGraph g;
    std::unordered_map<std::string, std::size_t> node_id;
    std::vector<std::pair<std::size_t, std::size_t>> seen;
    auto intern = [&](const std::string& s) {
        auto it = node_id.find(s);
        if (it != node_id.end()) return it->second;
        node_id.emplace(s, g.nodes.size());
        g.nodes.push_back(s);
        return g.nodes.size() - 1;
    };
    std::vector<std::size_t> ids;
    ids.reserve(windows.size());
    for (const std::string& w : windows) ids.push_back(intern(w));
    std::unordered_map<std::uint64_t, bool> edge_seen;
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
        std::uint64_t key = (static_cast<std::uint64_t>(ids[i]) << 32) | ids[i + 1];
        if (!edge_seen.count(key)) {
            edge_seen[key] = true;
            g.edges.emplace_back(ids[i], ids[i + 1]);
        }
    }
    return g;
}

CorpusTokenization tokenize_corpus(const LabeledCorpus& corpus, const TokenizerSpec& spec) {
    CorpusTokenization out;
    if (spec.method == TokenizeMethod::kmer) {
        std::vector<std::size_t> too_short;
        for (const auto& rec : corpus.records) {
            if (spec.k > rec.symbols.size()) too_short.push_back(rec.id);
        }
        if (!too_short.empty()) {
            std::string ids;
            for (std::size_t i = 0; i < too_short.size(); ++i) {
                if (i) ids += ",";
                ids += std::to_string(too_short[i]);
            }
            throw DataError("k=" + std::to_string(spec.k) +
                            " exceeds the length of sequence ids [" + ids + "]");
        }
        out.vocab.method = TokenizeMethod::kmer;
        out.vocab.k = spec.k;
        std::unordered_map<std::string, std::size_t> freq_index;
        for (const auto& rec : corpus.records) {
            auto toks = decompose_kmer(rec.symbols, spec.k);
            for (const std::string& t : toks) {
                auto it = freq_index.find(t);
                if (it == freq_index.end()) {
                    freq_index.emplace(t, out.vocab.entries.size());
                    out.vocab.entries.push_back({t, 1});
                } else {
                    ++out.vocab.entries[it->second].freq;
                }
            }
            out.tokens.push_back(std::move(toks));
        }
        return out;
    }
    std::vector<std::string> seqs;
    seqs.reserve(corpus.size());
    for (const auto& rec : corpus.records) seqs.push_back(rec.symbols);
    EspfResult res = train_espf_full(seqs, spec.beta_freq,
                                     spec.max_merges == 0 ? std::numeric_limits<std::size_t>::max()
                                                          : spec.max_merges);
    out.vocab = std::move(res.vocab);
    out.tokens = std::move(res.tokenized);
    return out;
}

} // namespace seqhygan
