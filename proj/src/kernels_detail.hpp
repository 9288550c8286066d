#pragma once

#include "oppspec/kernels.hpp"

namespace oppspec::kernels::detail {

const KernelOps& scalar_impl();

#if defined(OPPSPEC_KERNELS_AVX2)
const KernelOps& avx2_impl();
#endif
#if defined(OPPSPEC_KERNELS_NEON)
const KernelOps& neon_impl();
#endif

}  // namespace oppspec::kernels::detail
