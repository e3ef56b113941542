#ifndef POREVOX_POREVOX_HPP
#define POREVOX_POREVOX_HPP

#include "porevox/dictionary.hpp"
#include "porevox/metrics.hpp"
#include "porevox/ops.hpp"
#include "porevox/pipeline.hpp"
#include "porevox/reconstruct.hpp"
#include "porevox/scale_plan.hpp"
#include "porevox/volume.hpp"

#endif  // POREVOX_POREVOX_HPP
