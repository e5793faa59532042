#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trifv {

/// Broad failure classes; the CLI maps them onto process exit codes.
enum class ErrorClass { config, numeric, io };

class Error : public std::runtime_error {
public:
  Error(ErrorClass cls, const std::string &what)
      : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const noexcept { return cls_; }

private:
  ErrorClass cls_;
};

class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string &what)
      : Error(ErrorClass::io, "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class TopologyError : public Error {
public:
  explicit TopologyError(const std::string &what)
      : Error(ErrorClass::numeric, what) {}
};

class DegenerateDiamond : public Error {
public:
  explicit DegenerateDiamond(std::size_t face)
      : Error(ErrorClass::numeric,
              "degenerate diamond cell at face " + std::to_string(face)),
        face_(face) {}
  std::size_t face() const noexcept { return face_; }

private:
  std::size_t face_;
};

class InvalidK : public Error {
public:
  explicit InvalidK(const std::string &what) : Error(ErrorClass::config, what) {}
};

class SingularSystem : public Error {
public:
  explicit SingularSystem(const std::string &what)
      : Error(ErrorClass::numeric, what) {}
};

class SingularMatrix : public Error {
public:
  explicit SingularMatrix(std::size_t column)
      : Error(ErrorClass::numeric,
              "singular matrix: no acceptable pivot in column " +
                  std::to_string(column)),
        column_(column) {}
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t column_;
};

class DimensionMismatch : public Error {
public:
  explicit DimensionMismatch(const std::string &what)
      : Error(ErrorClass::numeric, what) {}
};

class ZeroDt : public Error {
public:
  explicit ZeroDt(std::size_t cell)
      : Error(ErrorClass::numeric,
              "time step collapsed to zero at cell " + std::to_string(cell)) {}
};

class TimeoutError : public Error {
public:
  explicit TimeoutError(int rank)
      : Error(ErrorClass::numeric,
              "rank " + std::to_string(rank) + " timed out waiting for a peer"),
        rank_(rank) {}
  int rank() const noexcept { return rank_; }

private:
  int rank_;
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string &what)
      : Error(ErrorClass::config, what) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string &what) : Error(ErrorClass::io, what) {}
};

/// Failure inside a multi-rank run, tagged with where it happened. Keeps
/// the error class of the original failure.
class SimulationError : public Error {
public:
  SimulationError(ErrorClass cls, int rank, std::size_t step, const std::string &phase,
                  const std::string &what)
      : Error(cls, "rank " + std::to_string(rank) + ", step " + std::to_string(step) +
                       ", " + phase + ": " + what),
        rank_(rank), step_(step), phase_(phase) {}
  int rank() const noexcept { return rank_; }
  std::size_t step() const noexcept { return step_; }
  const std::string &phase() const noexcept { return phase_; }

private:
  int rank_;
  std::size_t step_;
  std::string phase_;
};

} // namespace trifv
