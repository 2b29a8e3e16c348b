#pragma once

// Reference ESPF used only by tests: recounts every adjacent token pair
// from scratch each round, picks the most frequent pair (lexicographic
// (a, b) tie-break), and rewrites each sequence left-to-right with
// non-overlapping replacement. Deliberately simple and independent of the
// production implementation.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace espf_oracle {

struct Result {
    std::vector<std::string> vocab; // alphabet first, then merges in order
    std::vector<std::uint64_t> freqs;
    std::size_t alphabet_size = 0;
    std::vector<std::pair<std::string, std::string>> merges;
    std::vector<std::vector<std::string>> tokenized;
};

inline Result run(const std::vector<std::string>& corpus, std::uint64_t beta,
                  std::size_t max_merges) {
    Result r;
    std::map<char, std::uint64_t> char_count;
    for (const std::string& s : corpus) {
        std::vector<std::string> toks;
        for (char c : s) {
            toks.emplace_back(1, c);
            bool known = char_count.count(c) != 0;
            ++char_count[c];
            if (!known) {
                // first-occurrence order
                r.vocab.emplace_back(1, c);
            }
        }
        r.tokenized.push_back(std::move(toks));
    }
    r.alphabet_size = r.vocab.size();
    for (const std::string& v : r.vocab) r.freqs.push_back(char_count[v[0]]);

    for (std::size_t round = 0; round < max_merges; ++round) {
        std::map<std::pair<std::string, std::string>, std::uint64_t> counts;
        for (const auto& toks : r.tokenized) {
            for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
                ++counts[{toks[i], toks[i + 1]}];
            }
        }
        if (counts.empty()) break;
        auto best = counts.begin();
        for (auto it = counts.begin(); it != counts.end(); ++it) {
            if (it->second > best->second) best = it; // map order = lexicographic tie-break
        }
        if (best->second < beta) break;
        const auto [a, b] = best->first;
        const std::string merged = a + b;
        for (auto& toks : r.tokenized) {
            std::vector<std::string> next;
            std::size_t i = 0;
            while (i < toks.size()) {
                if (i + 1 < toks.size() && toks[i] == a && toks[i + 1] == b) {
                    next.push_back(merged);
                    i += 2;
                } else {
                    next.push_back(toks[i]);
                    i += 1;
                }
            }
            toks = std::move(next);
        }
        r.vocab.push_back(merged);
        r.freqs.push_back(best->second);
        r.merges.emplace_back(a, b);
    }
    return r;
}

} // namespace espf_oracle
