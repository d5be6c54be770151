#pragma once

#include "voxelsmith/abstructions.hpp"
#include "voxelsmith/catalog.hpp"
#include "voxelsmith/config.hpp"
#include "voxelsmith/fixtures.hpp"
#include "voxelsmith/grammar.hpp"
#include "voxelsmith/metrics.hpp"
#include "voxelsmith/naturalize.hpp"
#include "voxelsmith/offset_model.hpp"
#include "voxelsmith/replay.hpp"
#include "voxelsmith/service.hpp"
#include "voxelsmith/session.hpp"
#include "voxelsmith/session_log.hpp"
#include "voxelsmith/voxel_world.hpp"
