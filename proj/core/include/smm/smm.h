#ifndef SMM_SMM_H_
#define SMM_SMM_H_

#include "smm/baselines.h"
#include "smm/density.h"
#include "smm/error.h"
#include "smm/fictitious_play.h"
#include "smm/goals.h"
#include "smm/gridworld.h"
#include "smm/io.h"
#include "smm/marginal.h"
#include "smm/mdp.h"
#include "smm/random.h"
#include "smm/sm4.h"
#include "smm/solvers.h"

#endif  // SMM_SMM_H_
