#pragma once

#include "cbsep/errors.hpp"
#include "cbsep/matcore.hpp"
#include "cbsep/random.hpp"
#include "cbsep/algebra.hpp"
#include "cbsep/sdp.hpp"
#include "cbsep/maps.hpp"
#include "cbsep/parallel.hpp"
#include "cbsep/cbnorm.hpp"
#include "cbsep/separability.hpp"
#include "cbsep/theorems.hpp"
#include "cbsep/io.hpp"
#include "cbsep/report.hpp"
#include "cbsep/verify.hpp"
