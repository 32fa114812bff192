#pragma once

#include "glkern/errors.hpp"
#include "glkern/numeric.hpp"
#include "glkern/normal.hpp"
#include "glkern/kernels.hpp"
#include "glkern/rng.hpp"
#include "glkern/dgp.hpp"
#include "glkern/estimator.hpp"
#include "glkern/gl.hpp"
#include "glkern/parallel.hpp"
#include "glkern/calibration.hpp"
#include "glkern/io.hpp"
#include "glkern/mc_study.hpp"
#include "glkern/theory_checks.hpp"
#include "glkern/run_config.hpp"
#include "glkern/check_suite.hpp"
