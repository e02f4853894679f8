#pragma once

#include "pbauth/attack_curious.hpp"
#include "pbauth/attack_mitm.hpp"
#include "pbauth/attack_report.hpp"
