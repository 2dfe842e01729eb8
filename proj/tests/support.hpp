#pragma once

// Shared test helpers: fixture paths, a self-contained SHA-256 for pinning
// fixture bytes, deterministic random data, and the independent brute-force
// oracles the unit/property suites check the library against.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "colat/lattice.hpp"
#include "colat/rng.hpp"

#ifndef COLAT_DATA_DIR
#define COLAT_DATA_DIR "data"
#endif

namespace testsup {

inline std::string data_path(const std::string& name) {
    return std::string(COLAT_DATA_DIR) + "/" + name;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---- SHA-256 (FIPS 180-4), enough to pin fixture bytes ----------------------

inline std::string sha256_hex(const std::string& data) {
    static const std::uint32_t k[64] = {
        0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
        0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
        0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
        0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
        0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
        0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
        0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
        0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
        0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
        0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
        0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};
    std::array<std::uint32_t, 8> h = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                                      0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};

    std::vector<std::uint8_t> msg(data.begin(), data.end());
    std::uint64_t bit_len = static_cast<std::uint64_t>(msg.size()) * 8;
    msg.push_back(0x80);
    while (msg.size() % 64 != 56) msg.push_back(0x00);
    for (int i = 7; i >= 0; --i) msg.push_back(static_cast<std::uint8_t>(bit_len >> (8 * i)));

    auto rotr = [](std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); };
    for (std::size_t chunk = 0; chunk < msg.size(); chunk += 64) {
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i) {
            w[i] = (std::uint32_t(msg[chunk + 4 * i]) << 24) |
                   (std::uint32_t(msg[chunk + 4 * i + 1]) << 16) |
                   (std::uint32_t(msg[chunk + 4 * i + 2]) << 8) |
                   std::uint32_t(msg[chunk + 4 * i + 3]);
        }
        for (int i = 16; i < 64; ++i) {
            std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        auto [a, b, c, d, e, f, g, hh] = h;
        for (int i = 0; i < 64; ++i) {
            std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            std::uint32_t ch = (e & f) ^ (~e & g);
            std::uint32_t temp1 = hh + s1 + ch + k[i] + w[i];
            std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            std::uint32_t temp2 = s0 + maj;
            hh = g; g = f; f = e; e = d + temp1;
            d = c; c = b; b = a; a = temp1 + temp2;
        }
        h[0] += a; h[1] += b; h[2] += c; h[3] += d;
        h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
    }

    static const char* hex = "0123456789abcdef";
    std::string out;
    for (std::uint32_t word : h) {
        for (int i = 7; i >= 0; --i) out += hex[(word >> (4 * i)) & 0xf];
    }
    return out;
}

// ---- deterministic random data -----------------------------------------------

inline double gauss(colat::SplitMix64& rng) {
    // Box-Muller; one value per call keeps the stream simple and deterministic.
    double u1 = rng.next_double();
    double u2 = rng.next_double();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline std::vector<std::string> letters(std::size_t k) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < k; ++i) names.push_back(std::string(1, char('a' + i)));
    return names;
}

inline colat::CoalitionTable random_table(std::size_t k, colat::SplitMix64& rng) {
    colat::CoalitionTable table(colat::Universe(letters(k)));
    for (colat::Mask m = 0; m < table.num_coalitions(); ++m) {
        table.set(m, rng.next_double() * 2.0 - 1.0);
    }
    return table;
}

// Additive (modular) table: f(S) = base + sum of weights over S.
inline colat::CoalitionTable additive_table(const std::vector<double>& weights, double base) {
    colat::CoalitionTable table(colat::Universe(letters(weights.size())));
    for (colat::Mask m = 0; m < table.num_coalitions(); ++m) {
        double v = base;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if ((m >> i) & 1u) v += weights[i];
        }
        table.set(m, v);
    }
    return table;
}

// Coverage function: component i owns a subset of a small ground set,
// f(S) = |union of owned sets| / |ground|. Monotone submodular.
inline colat::CoalitionTable coverage_table(std::size_t k, std::size_t ground_bits,
                                            colat::SplitMix64& rng) {
    std::vector<std::uint32_t> owned(k);
    for (auto& o : owned) {
        o = static_cast<std::uint32_t>(rng.next() & ((1u << ground_bits) - 1u));
    }
    colat::CoalitionTable table(colat::Universe(letters(k)));
    for (colat::Mask m = 0; m < table.num_coalitions(); ++m) {
        std::uint32_t cover = 0;
        for (std::size_t i = 0; i < k; ++i) {
            if ((m >> i) & 1u) cover |= owned[i];
        }
        table.set(m, static_cast<double>(std::popcount(cover)) /
                         static_cast<double>(ground_bits));
    }
    return table;
}

// Concave-of-cardinality table: f(S) = g(|S|) with g concave increasing.
inline colat::CoalitionTable concave_cardinality_table(std::size_t k, double rate) {
    colat::CoalitionTable table(colat::Universe(letters(k)));
    for (colat::Mask m = 0; m < table.num_coalitions(); ++m) {
        table.set(m, 1.0 - std::exp(-rate * std::popcount(m)));
    }
    return table;
}

// Budget-capped cardinality: f(S) = min(|S|, cap).
inline colat::CoalitionTable budget_table(std::size_t k, std::size_t cap) {
    colat::CoalitionTable table(colat::Universe(letters(k)));
    for (colat::Mask m = 0; m < table.num_coalitions(); ++m) {
        table.set(m, static_cast<double>(
                         std::min<std::size_t>(std::popcount(m), cap)));
    }
    return table;
}

// ---- independent oracles ------------------------------------------------------

// Shapley by literally averaging marginal contributions over all k!
// component orders (k <= 8 or so).
inline std::vector<double> shapley_permutation_oracle(const colat::CoalitionTable& table) {
    std::size_t k = table.num_components();
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::vector<double> phi(k, 0.0);
    std::size_t n_perms = 0;
    do {
        colat::Mask built = 0;
        for (std::size_t i : perm) {
            colat::Mask with = built | (colat::Mask{1} << i);
            phi[i] += table.value(with) - table.value(built);
            built = with;
        }
        ++n_perms;
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (double& p : phi) p /= static_cast<double>(n_perms);
    return phi;
}

// Dividend by direct inclusion-exclusion over explicit subsets.
inline double dividend_oracle(const colat::CoalitionTable& table, colat::Mask mask) {
    double sum = 0.0;
    for (colat::Mask w = 0; w < table.num_coalitions(); ++w) {
        if ((w & mask) != w) continue;
        int diff = std::popcount(mask) - std::popcount(w);
        sum += (diff % 2 == 0 ? 1.0 : -1.0) * table.value(w);
    }
    return sum;
}

// All (S, T, i) triples by three nested mask loops with explicit filters.
inline std::vector<std::tuple<colat::Mask, colat::Mask, std::size_t>> triples_oracle(
    std::size_t k) {
    std::vector<std::tuple<colat::Mask, colat::Mask, std::size_t>> out;
    colat::Mask full = static_cast<colat::Mask>((1u << k) - 1u);
    for (std::size_t i = 0; i < k; ++i) {
        colat::Mask bit = colat::Mask{1} << i;
        for (colat::Mask t = 0; t <= full; ++t) {
            if (t & bit) continue;
            for (colat::Mask s = 0; s <= full; ++s) {
                if ((s & t) != s || s == t) continue;
                out.emplace_back(s, t, i);
            }
        }
    }
    return out;
}

}  // namespace testsup
