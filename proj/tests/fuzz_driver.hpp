#pragma once

#include <cstdint>
#include <exception>
#include <random>
#include <string>
#include <vector>

#include "powergame/gamespec.hpp"
#include "powergame/scenarios.hpp"

namespace fuzz {

struct Result {
    long iterations = 0;
    long accepted = 0;
    long rejected = 0;
    long crashes = 0;  // exceptions escaping the parser, or accepted text that fails to round-trip
    std::string first_failure;
};

inline std::vector<std::string> corpus() {
    std::vector<std::string> out;
    // the small scenarios; the large ones (menu, resource, boxes, gridworld) are exercised by the
    // round-trip tests instead and would dominate the fuzz budget
    for (const char* name : {"commitment", "confirmation", "self_harm", "pause_destroy", "norm", "belief_manipulation",
                             "bifurcation"}) {
        auto sc = pg::build_named_scenario(name, {});
        out.push_back(pg::serialize_game(sc.game, sc.params));
    }
    return out;
}

inline std::vector<std::string> split_lines(const std::string& s) {
    std::vector<std::string> lines;
    std::size_t i = 0;
    while (i <= s.size()) {
        std::size_t j = s.find('\n', i);
        if (j == std::string::npos) j = s.size();
        lines.push_back(s.substr(i, j - i));
        i = j + 1;
    }
    return lines;
}

inline std::string join_lines(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[i] + (i + 1 < v.size() ? "\n" : "");
    return s;
}

inline void mutate(std::string& s, std::mt19937_64& rng) {
    static const char* tokens[] = {"nan", "inf", "-inf", "-1", "0", "1", "2", "1e308", "1e-320", "0.5", "99999999999999999999",
                                   "->", "=", "#", "[states]", "[transitions]", "[goals]", "[behavior]", "initial", "terminal",
                                   "robot", "human", "nu=", "beta=", "pi0=", "mu.h=", "1,0", ",", "version = 1", "\t", " ",
                                   "\r", "\xff", "s0", "h", "default", "x_override", "[geometry]", "first_entry"};
    auto pick = [&](std::size_t n) { return n == 0 ? std::size_t{0} : static_cast<std::size_t>(rng() % n); };
    switch (rng() % 9) {
        case 0:
            if (!s.empty()) s[pick(s.size())] = static_cast<char>(rng() & 0xff);
            break;
        case 1: s.insert(pick(s.size() + 1), 1, static_cast<char>(32 + rng() % 95)); break;
        case 2:
            if (!s.empty()) {
                std::size_t a = pick(s.size());
                s.erase(a, 1 + pick(16));
            }
            break;
        case 3: s.insert(pick(s.size() + 1), tokens[pick(std::size(tokens))]); break;
        case 4: s.resize(pick(s.size() + 1)); break;
        default: {
            auto lines = split_lines(s);
            if (lines.empty()) break;
            std::size_t a = pick(lines.size()), b = pick(lines.size());
            int op = static_cast<int>(rng() % 4);
            if (op == 0) std::swap(lines[a], lines[b]);
            else if (op == 1) lines.insert(lines.begin() + a, lines[b]);
            else if (op == 2) lines.erase(lines.begin() + a);
            else {
                // replace one whitespace-separated token of a line
                auto& l = lines[a];
                std::size_t p = l.find(' ', pick(l.size() + 1));
                if (p != std::string::npos) {
                    std::size_t e = l.find(' ', p + 1);
                    l.replace(p + 1, (e == std::string::npos ? l.size() : e) - p - 1, tokens[pick(std::size(tokens))]);
                }
            }
            s = join_lines(lines);
        }
    }
}

inline Result run(long iterations, std::uint64_t seed) {
    Result res;
    auto seeds = corpus();
    std::mt19937_64 rng(seed);
    for (long i = 0; i < iterations; ++i) {
        std::string text = seeds[rng() % seeds.size()];
        int n = 1 + static_cast<int>(rng() % 4);
        for (int k = 0; k < n; ++k) mutate(text, rng);
        ++res.iterations;
        try {
            auto r = pg::parse_gamespec(text);
            if (r.ok()) {
                ++res.accepted;
                // anything accepted has to survive its own round trip
                std::string canon = pg::serialize_document(*r.doc);
                auto back = pg::parse_gamespec(canon);
                if (!back.ok() || pg::serialize_document(*back.doc) != canon) {
                    if (!res.crashes++) res.first_failure = "round trip broke on:\n" + text;
                }
            } else {
                ++res.rejected;
                if (r.diagnostics.empty() && !res.crashes++) res.first_failure = "rejected without diagnostics:\n" + text;
            }
        } catch (const std::exception& e) {
            if (!res.crashes++) res.first_failure = std::string(e.what()) + " on:\n" + text;
        }
    }
    return res;
}

}  // namespace fuzz
