#pragma once

#include "blockwalk/common.hpp"
#include "blockwalk/metrics.hpp"
#include "blockwalk/rng.hpp"
#include "blockwalk/sbm.hpp"
#include "blockwalk/spectral.hpp"
#include "blockwalk/svg.hpp"
#include "blockwalk/theory.hpp"
#include "blockwalk/trainer.hpp"
#include "blockwalk/walks.hpp"
