// Copyright (c) 2026 the curaug authors
// Licensed under the Apache License, Version 2.0.

#pragma once

#include "curaug/augment.hpp"
#include "curaug/core.hpp"
#include "curaug/curriculum.hpp"
#include "curaug/grid.hpp"
#include "curaug/imageio.hpp"
#include "curaug/log.hpp"
#include "curaug/pipeline.hpp"
#include "curaug/rng.hpp"
