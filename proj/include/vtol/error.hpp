#ifndef VTOL_ERROR_HPP_
#define VTOL_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace vtol {

// Malformed scenario text or a scenario that violates a model invariant.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The target cannot be reached from a vehicle start (the start is walled off
// or sits inside an obstacle at the queried time).
class UnreachableError : public std::runtime_error {
 public:
  UnreachableError(int vtol_id, double time, const std::string& what)
      : std::runtime_error(what), vtol_id_(vtol_id), time_(time) {}

  int vtol_id() const { return vtol_id_; }
  double time() const { return time_; }

 private:
  int vtol_id_;
  double time_;
};

// Value iteration did not reach the requested tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(double final_delta, long sweeps, const std::string& what)
      : std::runtime_error(what), final_delta_(final_delta), sweeps_(sweeps) {}

  double final_delta() const { return final_delta_; }
  long sweeps() const { return sweeps_; }

 private:
  double final_delta_;
  long sweeps_;
};

// Simplex exceeded its iteration guard or lost numerical feasibility.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Trajectory extraction failed (runaway descent or no admissible heading).
class TrajectoryError : public std::runtime_error {
 public:
  TrajectoryError(int vtol_id, const std::string& what)
      : std::runtime_error(what), vtol_id_(vtol_id) {}

  int vtol_id() const { return vtol_id_; }

 private:
  int vtol_id_;
};

// Two flights in an assembled schedule overlap in time.
class ScheduleOverlapError : public std::runtime_error {
 public:
  ScheduleOverlapError(int first_id, int second_id, const std::string& what)
      : std::runtime_error(what), first_id_(first_id), second_id_(second_id) {}

  int first_id() const { return first_id_; }
  int second_id() const { return second_id_; }

 private:
  int first_id_;
  int second_id_;
};

}  // namespace vtol

#endif  // VTOL_ERROR_HPP_
