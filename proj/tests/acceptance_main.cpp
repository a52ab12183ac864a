// Standalone acceptance gate: runs every release criterion with its pinned
// tolerance and prints one pass/fail line per criterion. Exit code 0 only if
// all pass.

#include <cstdio>
#include <cstdlib>
#include <string>

#include "maplab/acceptance.hpp"

int main(int argc, char** argv) {
    std::uint64_t seed = 20260826;
    std::string out_dir = "acceptance_out";
    for (int a = 1; a < argc; ++a) {
        std::string arg = argv[a];
        if (arg == "--seed" && a + 1 < argc)
            seed = std::strtoull(argv[++a], nullptr, 10);
        else if (arg == "--out" && a + 1 < argc)
            out_dir = argv[++a];
    }

    auto results = maplab::acceptance::run_all(seed, out_dir);
    bool all = true;
    for (const auto& cr : results) {
        std::printf("criterion %2d [%s] %s — %s\n", cr.id, cr.pass ? "PASS" : "FAIL",
                    cr.name.c_str(), cr.detail.c_str());
        all = all && cr.pass;
    }
    std::printf("%s\n", all ? "ACCEPTANCE: ALL PASS" : "ACCEPTANCE: FAILURES PRESENT");
    return all ? 0 : 1;
}
