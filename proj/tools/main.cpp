#include "affectrag/cli.hpp"

int main(int argc, char** argv) {
    return affectrag::cli_main(argc, argv);
}
