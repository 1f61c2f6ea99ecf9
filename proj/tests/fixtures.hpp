#pragma once

#include <cstdint>

#include "beliefnet/network.hpp"

namespace fixtures {

inline beliefnet::Network complete_net(int n) {
    beliefnet::GraphSpec spec;
    spec.kind = beliefnet::GraphKind::complete;
    spec.n = n;
    return beliefnet::generate(spec);
}

inline beliefnet::Network ring_net(int n, int k) {
    beliefnet::GraphSpec spec;
    spec.kind = beliefnet::GraphKind::ring;
    spec.n = n;
    spec.k = k;
    return beliefnet::generate(spec);
}

inline beliefnet::Network ba_net(int n, int m, std::uint64_t seed) {
    beliefnet::GraphSpec spec;
    spec.kind = beliefnet::GraphKind::barabasi_albert;
    spec.n = n;
    spec.m = m;
    spec.seed = seed;
    return beliefnet::generate(spec);
}

}  // namespace fixtures
