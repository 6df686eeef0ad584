// Command-line front end; subcommands are filled in alongside the library.
#include <cstdio>

int main(int argc, char** argv) {
    (void)argc;
    (void)argv;
    std::puts("packlab: subcommands pending");
    return 0;
}
