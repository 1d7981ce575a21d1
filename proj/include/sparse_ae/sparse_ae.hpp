#ifndef SPARSE_AE_SPARSE_AE_HPP
#define SPARSE_AE_SPARSE_AE_HPP

#include "activations.hpp"
#include "data.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "numerics.hpp"
#include "optimizer.hpp"
#include "regularizers.hpp"
#include "suite.hpp"
#include "sweep.hpp"
#include "verify.hpp"

#endif  // SPARSE_AE_SPARSE_AE_HPP
