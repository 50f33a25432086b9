// Copyright 2026 The cgt Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#ifndef CGT_COMMON_H_
#define CGT_COMMON_H_

#include <Eigen/Dense>

namespace cgt {

// Stacked agent variables: row i belongs to agent i.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

// kSerial is the reference mode. kParallel splits per-agent work across
// OpenMP threads; results are identical because every agent writes only its
// own row and reads last round's values.
enum class ExecutionPolicy { kSerial, kParallel };

}  // namespace cgt

#endif  // CGT_COMMON_H_
