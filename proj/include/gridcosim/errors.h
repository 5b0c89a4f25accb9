// Copyright 2026 The gridcosim Authors.
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

#ifndef GRIDCOSIM_ERRORS_H_
#define GRIDCOSIM_ERRORS_H_

#include <stdexcept>
#include <string>

namespace gridcosim {

// Root of every exception thrown by the library. The CLI maps the concrete
// subclasses onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The power-network model is unusable: disconnected, zero reactance,
// singular susceptance matrix, dangling references.
class ModelError : public Error {
 public:
  using Error::Error;
};

// A caller violated an operation precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

class EstimationError : public Error {
 public:
  EstimationError(const std::string& what, int rank, int required)
      : Error(what), rank_(rank), required_(required) {}

  int rank() const { return rank_; }
  int required() const { return required_; }

 private:
  int rank_;
  int required_;
};

// Bad-data detection needs redundancy (more available rows than states).
class DetectionError : public Error {
 public:
  using Error::Error;
};

class DispatchError : public Error {
 public:
  using Error::Error;
};

class GraphError : public Error {
 public:
  using Error::Error;
};

class AttackError : public Error {
 public:
  using Error::Error;
};

// Malformed scenario / case / network documents or inconsistent settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gridcosim

#endif  // GRIDCOSIM_ERRORS_H_
