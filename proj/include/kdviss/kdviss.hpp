#pragma once

#include "kdviss/banded.hpp"
#include "kdviss/closed_loop.hpp"
#include "kdviss/errors.hpp"
#include "kdviss/experiment.hpp"
#include "kdviss/iss.hpp"
#include "kdviss/kdv.hpp"
#include "kdviss/linear_operator.hpp"
#include "kdviss/lyapunov.hpp"
#include "kdviss/random.hpp"
#include "kdviss/saturation.hpp"
#include "kdviss/spaces.hpp"
