#pragma once

#include "sqopen/error.hpp"
#include "sqopen/random.hpp"
#include "sqopen/space.hpp"
#include "sqopen/complex_io.hpp"
#include "sqopen/sphere_extension.hpp"
#include "sqopen/decompose.hpp"
#include "sqopen/obstruction.hpp"
#include "sqopen/zerodim.hpp"
#include "sqopen/matops.hpp"
#include "sqopen/expression.hpp"
