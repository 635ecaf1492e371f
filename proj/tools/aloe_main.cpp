#include <iostream>
#include <string>
#include <vector>

#include "aloe/cli/app.hpp"

int main(int argc, char** argv) {
  return aloe::cli::run_app(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
