#pragma once

// Umbrella header.

#include "actinet/core/grammar.hpp"
#include "actinet/core/series_ops.hpp"
#include "actinet/core/types.hpp"

#include "actinet/synth/generator.hpp"

#include "actinet/nn/gradcheck.hpp"
#include "actinet/nn/graph.hpp"
#include "actinet/nn/layers.hpp"
#include "actinet/nn/loss.hpp"
#include "actinet/nn/optimizer.hpp"
#include "actinet/nn/tensor.hpp"

#include "actinet/models/build.hpp"
#include "actinet/models/dataset.hpp"
#include "actinet/models/features.hpp"
#include "actinet/models/specs.hpp"
#include "actinet/models/train.hpp"

#include "actinet/eval/metrics.hpp"

#include "actinet/cluster/dtw.hpp"
#include "actinet/cluster/newick.hpp"
#include "actinet/cluster/upgma.hpp"
