#pragma once

#include "molcomm/analytic.hpp"
#include "molcomm/channel.hpp"
#include "molcomm/errors.hpp"
#include "molcomm/geometry.hpp"
#include "molcomm/linkbudget.hpp"
#include "molcomm/montecarlo.hpp"
#include "molcomm/quadrature.hpp"
