#include <string>
#include <vector>

#include "poissonloc/harness.hpp"

int main(int argc, char** argv) {
    return poissonloc::cli(std::vector<std::string>(argv, argv + argc));
}
