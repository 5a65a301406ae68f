#pragma once

#include "protosel/benchmark.hpp"
#include "protosel/core.hpp"
#include "protosel/data.hpp"
#include "protosel/error.hpp"
#include "protosel/folds.hpp"
#include "protosel/harness.hpp"
#include "protosel/methods.hpp"
#include "protosel/nn.hpp"
#include "protosel/psych.hpp"
#include "protosel/random.hpp"
#include "protosel/refset_io.hpp"
#include "protosel/replacement.hpp"
#include "protosel/selection.hpp"
