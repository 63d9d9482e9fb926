#pragma once

#include "ionboost/adaboost.hpp"
#include "ionboost/backtest.hpp"
#include "ionboost/config.hpp"
#include "ionboost/counterexample.hpp"
#include "ionboost/experiments.hpp"
#include "ionboost/ion.hpp"
#include "ionboost/labels.hpp"
#include "ionboost/nearest_neighbor.hpp"
#include "ionboost/parallel.hpp"
#include "ionboost/population.hpp"
#include "ionboost/rng.hpp"
#include "ionboost/tree.hpp"
