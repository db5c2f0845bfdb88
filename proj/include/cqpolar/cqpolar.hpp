#pragma once

// Umbrella header for the whole library.

#include "cqpolar/common.hpp"
#include "cqpolar/density_matrix.hpp"
#include "cqpolar/quantum_info.hpp"
#include "cqpolar/polar_transform.hpp"
#include "cqpolar/hybrid_channel.hpp"
#include "cqpolar/pure_state_polar.hpp"
#include "cqpolar/broadcast_channel.hpp"
#include "cqpolar/sc_engine.hpp"
#include "cqpolar/polarized_sets.hpp"
#include "cqpolar/alignment.hpp"
#include "cqpolar/broadcast_code.hpp"
#include "cqpolar/rate_region.hpp"
#include "cqpolar/serialize.hpp"
#include "cqpolar/experiment.hpp"
