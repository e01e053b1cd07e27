// anonvec/anonvec.hpp

// Copyright 2026  The anonvec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "anonvec/embedding.hpp"
#include "anonvec/embedding_io.hpp"
#include "anonvec/error.hpp"
#include "anonvec/experiment.hpp"
#include "anonvec/pool_baseline.hpp"
#include "anonvec/privacy_eval.hpp"
#include "anonvec/proxy_model.hpp"
#include "anonvec/random.hpp"
#include "anonvec/reprogram.hpp"
#include "anonvec/synthetic.hpp"
