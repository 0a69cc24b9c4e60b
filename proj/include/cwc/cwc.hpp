#pragma once

#include "cwc/atom.hpp"
#include "cwc/dsl.hpp"
#include "cwc/matcher.hpp"
#include "cwc/multiset.hpp"
#include "cwc/oracle.hpp"
#include "cwc/pattern.hpp"
#include "cwc/rates.hpp"
#include "cwc/report.hpp"
#include "cwc/ssa.hpp"
#include "cwc/term.hpp"
