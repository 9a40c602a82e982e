#pragma once

#include "spikelab/amp.hpp"
#include "spikelab/channel.hpp"
#include "spikelab/error.hpp"
#include "spikelab/exact_oracle.hpp"
#include "spikelab/mmse_table.hpp"
#include "spikelab/model.hpp"
#include "spikelab/parallel.hpp"
#include "spikelab/potential.hpp"
#include "spikelab/prior.hpp"
#include "spikelab/quadrature.hpp"
#include "spikelab/spatial_coupling.hpp"
#include "spikelab/state_evolution.hpp"
#include "spikelab/thresholds.hpp"
