// Acceptance suite runner: one pass/fail line per criterion; nonzero exit
// when any criterion fails.
#include <cstring>
#include <iostream>
#include <sstream>
#include <string>

#include "icsim/acceptance.hpp"

int main(int argc, char** argv) {
    icsim::AcceptanceOptions options;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            std::istringstream in(argv[++i]);
            std::string token;
            while (std::getline(in, token, ','))
                options.only.push_back(std::stoi(token));
        } else if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) {
            options.threads = std::stoi(argv[++i]);
        } else {
            std::cerr << "usage: acceptance [--only 1,2,...] [--threads N]\n";
            return 2;
        }
    }

    const auto results = icsim::run_acceptance(options, std::cout);
    int failed = 0;
    for (const auto& r : results)
        if (!r.passed) ++failed;
    std::cout << results.size() - failed << "/" << results.size()
              << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
