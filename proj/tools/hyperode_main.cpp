#include "hyperode/cli.hpp"

int main(int argc, char** argv) {
    return hyperode::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
