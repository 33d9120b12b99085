#pragma once

#include "anneal/barriers.hpp"
#include "anneal/builtins.hpp"
#include "anneal/config.hpp"
#include "anneal/ensemble.hpp"
#include "anneal/fokker_planck.hpp"
#include "anneal/gibbs.hpp"
#include "anneal/io.hpp"
#include "anneal/potential.hpp"
#include "anneal/rng.hpp"
#include "anneal/schedule.hpp"
#include "anneal/sde.hpp"
#include "anneal/spectral.hpp"
#include "anneal/torus.hpp"
