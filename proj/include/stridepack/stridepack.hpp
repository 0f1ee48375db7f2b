#pragma once

#include "block_list.hpp"
#include "canon.hpp"
#include "commit.hpp"
#include "errors.hpp"
#include "halo.hpp"
#include "ir.hpp"
#include "pack.hpp"
#include "perf_model.hpp"
#include "plan.hpp"
#include "profile_io.hpp"
#include "strided_block.hpp"
#include "type_def.hpp"
#include "typefile.hpp"
