// Umbrella header.
#pragma once

#include "hann/version.hpp"
#include "hann/expr.hpp"
#include "hann/sampling.hpp"
#include "hann/net.hpp"
#include "hann/autodiff.hpp"
#include "hann/homotopy.hpp"
#include "hann/train.hpp"
#include "hann/solver.hpp"
#include "hann/timevarying.hpp"
#include "hann/bench.hpp"
#include "hann/report.hpp"
