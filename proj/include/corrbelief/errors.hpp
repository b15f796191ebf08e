//------------------------------------------------------------------------------
//
//   Copyright 2026 The corrbelief Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------
#pragma once

#include <stdexcept>
#include <string>

namespace corrbelief {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// An argument violated a documented precondition (range, ordering, shape).
class InvalidArgument : public Error
{
public:
  using Error::Error;
};

/// An operation was attempted in a state that does not allow it
/// (stale trial, sealed session, out-of-order submission).
class StateError : public Error
{
public:
  using Error::Error;
};

/// A referenced entity (session, trial, study, chain) does not exist.
class NotFound : public Error
{
public:
  using Error::Error;
};

/// Malformed configuration or wire payload.
class ParseError : public Error
{
public:
  using Error::Error;
};

/// The posterior sampler stalled (acceptance rate below the divergence guard).
class SamplerFailure : public Error
{
public:
  using Error::Error;
};

/// Filesystem failures while persisting or exporting.
class IoError : public Error
{
public:
  using Error::Error;
};

}  // namespace corrbelief
