// Runs the end-to-end acceptance checks and prints one verdict line each.
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "expsum/acceptance.hpp"

int main(int argc, char** argv) {
    expsum::acceptance::Options opts;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--quick") == 0) {
            opts.quick = true;
        } else if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc) {
            opts.seed = static_cast<unsigned>(std::strtoul(argv[++i], nullptr, 10));
        } else {
            std::fprintf(stderr, "usage: %s [--quick] [--seed N]\n", argv[0]);
            return 2;
        }
    }

    auto results = expsum::acceptance::run_all(opts);
    int passed = 0;
    for (const auto& r : results) {
        std::printf("[%s] %d. %s — %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                    r.detail.c_str());
        if (r.pass) ++passed;
    }
    std::printf("%d/%zu criteria passed\n", passed, results.size());
    return passed == static_cast<int>(results.size()) ? 0 : 1;
}
