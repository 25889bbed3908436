#pragma once

#include <stdexcept>
#include <string>

namespace brickgen {

enum class ErrorCode {
  dimension_not_in_library,
  out_of_bounds,
  malformed_line,
  collision,
  empty_caption,
  unknown_part,
  schema_violation,
  empty_mesh,
  degenerate_extent,
  empty_grid,
  solver_failure,
  unfillable_voxel,
  no_weak_region,
  precondition,
  transport,
  auth,
  rate_limited,
  malformed_caption_response,
  dimension_mismatch,
  atlas_overflow,
  empty_input,
  empty_train_set,
  io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Which axis a brick left the grid on.
enum class Axis { x, y, z };

class OutOfBoundsError : public Error {
 public:
  OutOfBoundsError(Axis axis, const std::string& message)
      : Error(ErrorCode::out_of_bounds, message), axis_(axis) {}
  Axis axis() const noexcept { return axis_; }

 private:
  Axis axis_;
};

class CollisionError : public Error {
 public:
  CollisionError(int first, int second, const std::string& message)
      : Error(ErrorCode::collision, message), first_(first), second_(second) {}
  int first() const noexcept { return first_; }
  int second() const noexcept { return second_; }

 private:
  int first_;
  int second_;
};

// Parse/schema failure tied to a 1-based line number of the input text.
class LineError : public Error {
 public:
  LineError(ErrorCode code, int line, const std::string& message)
      : Error(code, "line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace brickgen
