#include <cstdio>

int main() {
  std::puts("snnpid cli placeholder");
  return 0;
}
