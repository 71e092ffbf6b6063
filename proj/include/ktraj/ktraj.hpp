#pragma once

#include "ktraj/analysis.hpp"
#include "ktraj/assembly.hpp"
#include "ktraj/cdf.hpp"
#include "ktraj/dcf.hpp"
#include "ktraj/design.hpp"
#include "ktraj/geometry.hpp"
#include "ktraj/io.hpp"
#include "ktraj/paths.hpp"
#include "ktraj/sampled_function.hpp"
#include "ktraj/templates.hpp"
#include "ktraj/vec3.hpp"
