#include <cstdint>
#include <cstddef>
struct S {};
