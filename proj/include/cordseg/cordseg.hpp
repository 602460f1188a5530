// Copyright 2026 The cordseg Authors
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

#pragma once

// Umbrella header. The HTTP layer (review_http.hpp) is left out so users of
// the numeric core do not pull in the HTTP dependency.

#include "cordseg/errors.hpp"
#include "cordseg/tensor.hpp"
#include "cordseg/unet.hpp"
#include "cordseg/image.hpp"
#include "cordseg/tiling.hpp"
#include "cordseg/postprocess.hpp"
#include "cordseg/metrics.hpp"
#include "cordseg/kmeans.hpp"
#include "cordseg/synthdata.hpp"
#include "cordseg/dataset_io.hpp"
#include "cordseg/pipeline.hpp"
#include "cordseg/review.hpp"
