#pragma once

// Everything in one include.

#include "msmr/assign.hpp"
#include "msmr/assignment.hpp"
#include "msmr/config.hpp"
#include "msmr/dca.hpp"
#include "msmr/experiment.hpp"
#include "msmr/io.hpp"
#include "msmr/model.hpp"
#include "msmr/opt.hpp"
#include "msmr/pairwise_bound.hpp"
#include "msmr/rational.hpp"
#include "msmr/sim.hpp"
#include "msmr/workload.hpp"
