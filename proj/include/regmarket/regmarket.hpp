#pragma once

#include "core_model.hpp"
#include "lp.hpp"
#include "energy.hpp"
#include "isone.hpp"
#include "pjm.hpp"
#include "miso.hpp"
#include "scenario.hpp"
#include "case_io.hpp"
