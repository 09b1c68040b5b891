#pragma once

#include "factor_risk/coherent_factor.hpp"
#include "factor_risk/conditioning.hpp"
#include "factor_risk/core.hpp"
#include "factor_risk/distortion_factor.hpp"
#include "factor_risk/errors.hpp"
#include "factor_risk/factor_model.hpp"
#include "factor_risk/io.hpp"
#include "factor_risk/linear_factor.hpp"
#include "factor_risk/normal.hpp"
#include "factor_risk/quantile_factor.hpp"
#include "factor_risk/risk_sharing.hpp"
#include "factor_risk/scalar_risk.hpp"
