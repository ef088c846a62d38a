// Mutation fuzzer for the gamespec parser. Seeds are the serialized scenario specs; each
// iteration applies a few byte/token mutations and parses. Any exception other than a
// clean rejection, or a crash, is a failure.

#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "fuzz_driver.hpp"

int main(int argc, char** argv) {
    long iters = argc > 1 ? std::atol(argv[1]) : 1000000;
    std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;
    auto res = fuzz::run(iters, seed);
    std::printf("iterations %ld accepted %ld rejected %ld crashes %ld\n", res.iterations, res.accepted, res.rejected, res.crashes);
    if (res.crashes) std::printf("first failure: %s\n", res.first_failure.c_str());
    return res.crashes == 0 ? 0 : 1;
}
