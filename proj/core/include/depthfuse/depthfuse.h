// Copyright 2026 The DepthFuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DEPTHFUSE_DEPTHFUSE_H_
#define DEPTHFUSE_DEPTHFUSE_H_

#include "depthfuse/config.h"
#include "depthfuse/error.h"
#include "depthfuse/grid.h"
#include "depthfuse/io.h"
#include "depthfuse/metrics.h"
#include "depthfuse/poisson.h"
#include "depthfuse/refine.h"

#endif  // DEPTHFUSE_DEPTHFUSE_H_
