// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tilert {

/// Base class for all tilert runtime errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// ---- rcb_format ----

class FormatError : public Error {
 public:
  enum class Kind { Magic, Version, BlockType, Opcode, AddrKind, Truncated, Trailing };

  FormatError(Kind kind, size_t offset, const std::string& what)
      : Error(what), kind(kind), offset(offset) {}

  Kind kind;
  size_t offset;  // byte offset into the buffer where the problem was found
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

// ---- hal ----

class AddressFault : public Error {
 public:
  AddressFault(uint64_t addr, const std::string& what) : Error(what), addr(addr) {}
  uint64_t addr;
};

class DmaFault : public Error {
 public:
  explicit DmaFault(const std::string& what) : Error(what) {}
};

class HandleFault : public Error {
 public:
  explicit HandleFault(uint64_t handle, const std::string& what) : Error(what), handle(handle) {}
  uint64_t handle;
};

// ---- rimfs ----

class BuildError : public Error {
 public:
  explicit BuildError(const std::string& what) : Error(what) {}
};

class MountError : public Error {
 public:
  explicit MountError(const std::string& what) : Error(what) {}
};

class NotFound : public Error {
 public:
  explicit NotFound(uint32_t file_id)
      : Error("rimfs: no file with id " + std::to_string(file_id)), file_id(file_id) {}
  uint32_t file_id;
};

class OutOfMemory : public Error {
 public:
  explicit OutOfMemory(const std::string& what) : Error(what) {}
};

class StageError : public Error {
 public:
  explicit StageError(const std::string& what) : Error(what) {}
};

// ---- binding ----

class UnresolvedSymbol : public Error {
 public:
  explicit UnresolvedSymbol(std::vector<uint32_t> ids);
  std::vector<uint32_t> missing;  // all unresolved buffer IDs, ascending
};

class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what) : Error(what) {}
};

class PlanError : public Error {
 public:
  explicit PlanError(const std::string& what) : Error(what) {}
};

// ---- executor ----

class PipelineError : public Error {
 public:
  explicit PipelineError(const std::string& what) : Error(what) {}
};

// ---- platform_net ----

class FrameError : public Error {
 public:
  enum class Kind { Magic, Type, TooLarge, Truncated };
  FrameError(Kind kind, const std::string& what) : Error(what), kind(kind) {}
  Kind kind;
};

class IntegrityError : public Error {
 public:
  IntegrityError(uint32_t expected, uint32_t actual, const std::string& what)
      : Error(what), expected(expected), actual(actual) {}
  uint32_t expected;
  uint32_t actual;
};

class TransportError : public Error {
 public:
  explicit TransportError(const std::string& what) : Error(what) {}
};

class ServiceError : public Error {
 public:
  // Wire error code carried in NACK payloads.
  explicit ServiceError(uint32_t code, const std::string& what) : Error(what), code(code) {}
  uint32_t code;
};

// ---- graph_compiler ----

class GraphError : public Error {
 public:
  enum class Kind { Parse, Cycle, Shape, Kernel, Port, Duplicate, Id };
  GraphError(Kind kind, const std::string& what) : Error(what), kind(kind) {}
  Kind kind;
};

class PlaceError : public Error {
 public:
  explicit PlaceError(const std::string& what) : Error(what) {}
};

class LowerError : public Error {
 public:
  explicit LowerError(const std::string& what) : Error(what) {}
};

class PackError : public Error {
 public:
  explicit PackError(const std::string& what) : Error(what) {}
};

// ---- benchmark ----

class StatsError : public Error {
 public:
  explicit StatsError(const std::string& what) : Error(what) {}
};

class BenchError : public Error {
 public:
  explicit BenchError(const std::string& what) : Error(what) {}
};

// ---- cli / config ----

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace tilert
