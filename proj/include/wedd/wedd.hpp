#pragma once

#include "wedd/core.hpp"
#include "wedd/error.hpp"
#include "wedd/experiments.hpp"
#include "wedd/io.hpp"
#include "wedd/lowrank.hpp"
#include "wedd/matrix.hpp"
#include "wedd/projector.hpp"
#include "wedd/random.hpp"
#include "wedd/svd.hpp"
#include "wedd/wedderburn.hpp"
