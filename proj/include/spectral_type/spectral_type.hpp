#pragma once

#include "spectral_type/error.hpp"
#include "spectral_type/numerics.hpp"
#include "spectral_type/special.hpp"
#include "spectral_type/sturm.hpp"
#include "spectral_type/surface.hpp"
#include "spectral_type/hardy.hpp"
#include "spectral_type/config.hpp"
