#pragma once
// Umbrella header.

#include "errors.hpp"
#include "generate.hpp"
#include "io.hpp"
#include "kernels.hpp"
#include "leverage.hpp"
#include "matrix.hpp"
#include "parallel.hpp"
#include "precond.hpp"
#include "rankrevealing.hpp"
#include "rng.hpp"
#include "serialize.hpp"
#include "sketch.hpp"
