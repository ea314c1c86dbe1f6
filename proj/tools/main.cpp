#include <cstdio>

int main() {
  std::puts("iccbf cli placeholder");
  return 0;
}
