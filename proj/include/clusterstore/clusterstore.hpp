#pragma once

// Umbrella header for the clusterstore simulation library.

#include "clusterstore/bench.hpp"
#include "clusterstore/config.hpp"
#include "clusterstore/dro.hpp"
#include "clusterstore/dstc.hpp"
#include "clusterstore/rng.hpp"
#include "clusterstore/snapshot.hpp"
#include "clusterstore/stats.hpp"
#include "clusterstore/store.hpp"
#include "clusterstore/types.hpp"
#include "clusterstore/workload.hpp"
