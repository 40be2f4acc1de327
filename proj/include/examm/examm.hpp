#pragma once

#include "examm/cell.hpp"
#include "examm/genome.hpp"
#include "examm/genome_io.hpp"
#include "examm/network.hpp"
#include "examm/trainer.hpp"
#include "examm/operators.hpp"
#include "examm/timeseries.hpp"
#include "examm/island.hpp"
#include "examm/experiment.hpp"
