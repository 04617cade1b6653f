#ifndef NHYP_NHYP_HPP
#define NHYP_NHYP_HPP

#include "nhyp/error.hpp"
#include "nhyp/polynomial.hpp"
#include "nhyp/problem.hpp"
#include "nhyp/profile.hpp"
#include "nhyp/integrate.hpp"
#include "nhyp/spectrum.hpp"
#include "nhyp/levelsets.hpp"
#include "nhyp/equilibria.hpp"
#include "nhyp/exceptional.hpp"
#include "nhyp/perturb.hpp"
#include "nhyp/report.hpp"
#include "nhyp/verify.hpp"
#include "nhyp/cli.hpp"

#endif  // NHYP_NHYP_HPP
