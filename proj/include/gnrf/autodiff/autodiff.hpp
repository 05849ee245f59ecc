#pragma once

#include "gnrf/autodiff/adam.hpp"
#include "gnrf/autodiff/checkpoint.hpp"
#include "gnrf/autodiff/gradcheck.hpp"
#include "gnrf/autodiff/nn.hpp"

namespace gnrf::ad {

// Production scalar type: float32 storage (checkpoints are float32 by
// format); reductions accumulate in double internally.
using Tensor = TensorT<float>;
using ParameterStore = ParameterStoreT<float>;
using Adam = AdamT<float>;

}  // namespace gnrf::ad
