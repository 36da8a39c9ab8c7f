#include "mcid/cli/app.hpp"
#include "mcid/numerics/allocator.hpp"

int main(int argc, char** argv) {
  mcid::tune_allocator();
  return mcid::cli::run(argc, argv);
}
