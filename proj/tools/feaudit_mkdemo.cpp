// Writes the mini-gantry demo mesh.

#include "mini_gantry.hpp"

#include <cstdio>
#include <fstream>

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: feaudit_mkdemo <output.msh>\n");
        return 2;
    }
    std::ofstream out(argv[1], std::ios::binary);
    out << feaudit::serialize_mesh(feaudit::tools::mini_gantry_mesh());
    return out ? 0 : 1;
}
