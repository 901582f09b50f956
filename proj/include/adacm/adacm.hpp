#pragma once

// Convenience umbrella for the whole library.

#include "adacm/augment.hpp"
#include "adacm/autodiff.hpp"
#include "adacm/checkpoint.hpp"
#include "adacm/config.hpp"
#include "adacm/data.hpp"
#include "adacm/errors.hpp"
#include "adacm/losses.hpp"
#include "adacm/margin.hpp"
#include "adacm/metrics.hpp"
#include "adacm/nn.hpp"
#include "adacm/rng.hpp"
#include "adacm/tensor.hpp"
#include "adacm/trainer.hpp"
