#include "arefs/kernels.hpp"

namespace arefs::kernels {

const Dispatch& active() {
  static const Dispatch& chosen =
      __builtin_cpu_supports("avx2") ? avx2 : scalar;
  return chosen;
}

}  // namespace arefs::kernels
