#ifndef PULSEFORGE_PULSEFORGE_HPP
#define PULSEFORGE_PULSEFORGE_HPP

#include "chain.hpp"
#include "dqd_model.hpp"
#include "error.hpp"
#include "plan.hpp"
#include "propagator.hpp"
#include "pulse_synth.hpp"
#include "quat4d.hpp"
#include "schedule_io.hpp"

#endif
