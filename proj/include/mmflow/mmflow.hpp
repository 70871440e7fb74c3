#ifndef MMFLOW_MMFLOW_HPP
#define MMFLOW_MMFLOW_HPP

#include "mmflow/checks.hpp"
#include "mmflow/config.hpp"
#include "mmflow/density.hpp"
#include "mmflow/energy.hpp"
#include "mmflow/error.hpp"
#include "mmflow/euclidean_demo.hpp"
#include "mmflow/fv_oracle.hpp"
#include "mmflow/highfreq.hpp"
#include "mmflow/io.hpp"
#include "mmflow/jko.hpp"
#include "mmflow/mms_engine.hpp"
#include "mmflow/potentials.hpp"
#include "mmflow/quadrature.hpp"
#include "mmflow/trajectory.hpp"
#include "mmflow/transport.hpp"
#include "mmflow/validation.hpp"

#endif  // MMFLOW_MMFLOW_HPP
