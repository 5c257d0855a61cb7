#pragma once

// Bernoulli/Birnbaum-Saunders mixture regression for left-censored data,
// with tobit baselines, residual diagnostics and a Monte Carlo harness.

#include "bbsmix/csv.hpp"
#include "bbsmix/dataset.hpp"
#include "bbsmix/diagnostics.hpp"
#include "bbsmix/distributions.hpp"
#include "bbsmix/errors.hpp"
#include "bbsmix/estimation.hpp"
#include "bbsmix/likelihood.hpp"
#include "bbsmix/math.hpp"
#include "bbsmix/model.hpp"
#include "bbsmix/rng.hpp"
#include "bbsmix/simulation.hpp"
#include "bbsmix/tobit.hpp"
