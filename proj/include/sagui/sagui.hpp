#pragma once

#include "sagui/abstraction.hpp"
#include "sagui/auxiliary_reward.hpp"
#include "sagui/checkpoint.hpp"
#include "sagui/cmdp.hpp"
#include "sagui/composite_sampling.hpp"
#include "sagui/config.hpp"
#include "sagui/constrained_optimum.hpp"
#include "sagui/dense_net.hpp"
#include "sagui/envs.hpp"
#include "sagui/errors.hpp"
#include "sagui/grid.hpp"
#include "sagui/guide_trainer.hpp"
#include "sagui/keyvalue.hpp"
#include "sagui/metrics.hpp"
#include "sagui/optimizer.hpp"
#include "sagui/point_nav.hpp"
#include "sagui/policies.hpp"
#include "sagui/random.hpp"
#include "sagui/replay_buffer.hpp"
#include "sagui/runner.hpp"
#include "sagui/sac_lagrangian.hpp"
#include "sagui/student_trainer.hpp"
