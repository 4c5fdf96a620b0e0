#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pchaz {

/// One subject in a single-transition survival sample.
struct SurvivalRecord {
  double time = 0.0;             // observed time, min(event, censoring)
  int status = 0;                // 1 = event observed
  std::optional<double> entry;   // left-truncation time; absent means 0
  std::vector<double> covariates;

  double entry_time() const { return entry.value_or(0.0); }
  /// 1(L < t <= T)
  bool at_risk(double t) const { return entry_time() < t && t <= time; }

  friend bool operator==(const SurvivalRecord&, const SurvivalRecord&) = default;
};

/// Validated collection of survival records sharing one covariate dimension.
class SurvivalFrame {
 public:
  SurvivalFrame() = default;
  /// Throws ValidationError when a record breaks the frame invariants.
  explicit SurvivalFrame(std::vector<SurvivalRecord> records,
                         std::vector<std::string> covariate_names = {});

  const std::vector<SurvivalRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::size_t dim() const { return dim_; }
  const std::vector<std::string>& covariate_names() const { return names_; }
  bool has_entry() const;
  std::size_t event_count() const;

  /// Copy with every time (and entry) multiplied by `factor` > 0.
  SurvivalFrame time_scaled(double factor) const;

 private:
  std::vector<SurvivalRecord> records_;
  std::vector<std::string> names_;
  std::size_t dim_ = 0;
};

/// Column names for survival CSV input. Every other column is a covariate.
struct SurvivalSchema {
  std::string time = "time";
  std::string status = "status";
  std::string entry = "entry";
};

SurvivalFrame parse_survival_csv(const std::string& path, const SurvivalSchema& schema = {});
SurvivalFrame read_survival_csv(std::istream& in, const SurvivalSchema& schema = {});
/// Numbers are written in shortest round-trip form.
void write_survival_csv(std::ostream& out, const SurvivalFrame& frame);

/// One row of a long-format multi-state history. `to` is empty when the
/// subject is censored while in state `from`.
struct TransitionRecord {
  std::string id;
  int from = 0;
  std::optional<int> to;
  double t_start = 0.0;
  double t_stop = 0.0;

  bool censored() const { return !to.has_value(); }
  friend bool operator==(const TransitionRecord&, const TransitionRecord&) = default;
};

inline constexpr const char* kDefaultCensorToken = "cens";

std::vector<TransitionRecord> parse_multistate_csv(const std::string& path,
                                                   const std::string& censor_token = kDefaultCensorToken);
std::vector<TransitionRecord> read_multistate_csv(std::istream& in,
                                                  const std::string& censor_token = kDefaultCensorToken);
void write_multistate_csv(std::ostream& out, std::span<const TransitionRecord> records,
                          const std::string& censor_token = kDefaultCensorToken);

/// Checks that rows of each subject chain into one trajectory.
void validate_trajectories(std::span<const TransitionRecord> records);

/// Survival frame for the direct transition from -> to.
///
/// Each subject that occupies `from` contributes one record: the sojourn in
/// `from` starts at the entry time (recorded as left truncation when > 0),
/// ends at the exit or censoring time, and counts as an event iff the exit
/// went to `to`. Only the first sojourn per subject is used.
SurvivalFrame split_transitions(std::span<const TransitionRecord> records, int from, int to);

/// Time to first exit from state 0 (PFS) and time to absorption in
/// `absorbing` (OS), as right-censored survival frames.
SurvivalFrame first_exit_frame(std::span<const TransitionRecord> records, int state = 0);
SurvivalFrame absorption_frame(std::span<const TransitionRecord> records, int absorbing = 2);

struct RiskProfile {
  double eval_time = 0.0;
  std::size_t at_risk_count = 0;
  double weighted_risk = 0.0;
};

/// Risk set size and sum of exp(beta'W) over records with L < t <= T.
RiskProfile risk_profile(const SurvivalFrame& frame, double t, std::span<const double> beta);

/// exp(beta'W) for every record; all ones when beta is empty.
std::vector<double> relative_risks(const SurvivalFrame& frame, std::span<const double> beta);

}  // namespace pchaz
