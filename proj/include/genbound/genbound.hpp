#pragma once

#include "genbound/bounds/divergence.hpp"
#include "genbound/bounds/flatness.hpp"
#include "genbound/bounds/grad_stats.hpp"
#include "genbound/bounds/hutchinson.hpp"
#include "genbound/bounds/quadrature.hpp"
#include "genbound/bounds/rate.hpp"
#include "genbound/bounds/step_integrals.hpp"
#include "genbound/bounds/trajectory.hpp"
#include "genbound/data.hpp"
#include "genbound/error.hpp"
#include "genbound/mlp.hpp"
#include "genbound/objective.hpp"
#include "genbound/optim.hpp"
#include "genbound/parallel.hpp"
#include "genbound/rng.hpp"
#include "genbound/tensor.hpp"
#include "genbound/train.hpp"
#include "genbound/trace.hpp"
#include "genbound/experiment.hpp"
#include "genbound/check.hpp"
#include "genbound/svg.hpp"
