#include "leansearch/service.hpp"

int main(int argc, char** argv) { return leansearch::cli_dispatch(argc, argv); }
