#pragma once

// Type I-Type II mixture censoring for Weibull lifetimes.

#include "t1t2/bayes.hpp"
#include "t1t2/censoring.hpp"
#include "t1t2/distributions.hpp"
#include "t1t2/error.hpp"
#include "t1t2/expectation.hpp"
#include "t1t2/gof.hpp"
#include "t1t2/io.hpp"
#include "t1t2/mle.hpp"
#include "t1t2/parallel.hpp"
#include "t1t2/quadrature.hpp"
#include "t1t2/rng.hpp"
#include "t1t2/sim_study.hpp"
#include "t1t2/study_config.hpp"
#include "t1t2/version.hpp"
