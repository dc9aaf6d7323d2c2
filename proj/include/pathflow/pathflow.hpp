#pragma once

#include "pathflow/metrics.hpp"
#include "pathflow/oracle.hpp"
#include "pathflow/path.hpp"
#include "pathflow/rng.hpp"
#include "pathflow/samplers.hpp"
#include "pathflow/targets.hpp"
#include "pathflow/types.hpp"
#include "pathflow/vector_field.hpp"
