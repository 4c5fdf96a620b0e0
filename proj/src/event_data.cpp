#include "pchaz/event_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>

#include "pchaz/csv.hpp"
#include "pchaz/errors.hpp"

namespace pchaz {
namespace {

void validate_record(const SurvivalRecord& r, std::size_t dim, std::size_t index) {
  const std::string where = "record " + std::to_string(index + 1);
  if (!std::isfinite(r.time) || r.time < 0.0) {
    throw ValidationError(where + ": time must be finite and >= 0");
  }
  if (r.status != 0 && r.status != 1) throw ValidationError(where + ": status must be 0 or 1");
  if (r.entry) {
    if (!std::isfinite(*r.entry) || *r.entry < 0.0) {
      throw ValidationError(where + ": entry must be finite and >= 0");
    }
    if (!(*r.entry < r.time)) throw ValidationError(where + ": entry must be < time");
  }
  if (r.covariates.size() != dim) {
    throw ValidationError(where + ": covariate count differs from the rest of the frame");
  }
  for (double w : r.covariates) {
    if (!std::isfinite(w)) throw ValidationError(where + ": covariates must be finite");
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open input file '" + path + "'");
  return in;
}

/// Rows of each subject in file order, subjects in order of first appearance.
std::vector<std::vector<const TransitionRecord*>> group_by_subject(
    std::span<const TransitionRecord> records) {
  std::map<std::string, std::size_t> slot;
  std::vector<std::vector<const TransitionRecord*>> groups;
  for (const auto& r : records) {
    auto [it, inserted] = slot.try_emplace(r.id, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(&r);
  }
  return groups;
}

}  // namespace

SurvivalFrame::SurvivalFrame(std::vector<SurvivalRecord> records, std::vector<std::string> covariate_names)
    : records_(std::move(records)), names_(std::move(covariate_names)) {
  dim_ = records_.empty() ? names_.size() : records_.front().covariates.size();
  for (std::size_t i = 0; i < records_.size(); ++i) validate_record(records_[i], dim_, i);
  if (names_.empty()) {
    for (std::size_t k = 0; k < dim_; ++k) names_.push_back("w" + std::to_string(k + 1));
  } else if (names_.size() != dim_) {
    throw ValidationError("covariate name count does not match covariate dimension");
  }
}

bool SurvivalFrame::has_entry() const {
  return std::any_of(records_.begin(), records_.end(), [](const auto& r) { return r.entry.has_value(); });
}

std::size_t SurvivalFrame::event_count() const {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(), [](const auto& r) { return r.status == 1; }));
}

SurvivalFrame SurvivalFrame::time_scaled(double factor) const {
  if (!(factor > 0.0)) throw ValidationError("time scale factor must be positive");
  std::vector<SurvivalRecord> out = records_;
  for (auto& r : out) {
    r.time *= factor;
    if (r.entry) *r.entry *= factor;
  }
  return SurvivalFrame(std::move(out), names_);
}

SurvivalFrame parse_survival_csv(const std::string& path, const SurvivalSchema& schema) {
  auto in = open_input(path);
  return read_survival_csv(in, schema);
}

SurvivalFrame read_survival_csv(std::istream& in, const SurvivalSchema& schema) {
  const csv::Table table = csv::read(in);
  const int time_col = table.column(schema.time);
  const int status_col = table.column(schema.status);
  const int entry_col = table.column(schema.entry);
  if (time_col < 0) throw SchemaError("missing mandatory column '" + schema.time + "'");
  if (status_col < 0) throw SchemaError("missing mandatory column '" + schema.status + "'");

  std::vector<int> cov_cols;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const int ci = static_cast<int>(c);
    if (ci == time_col || ci == status_col || ci == entry_col) continue;
    if (table.column(table.header[c]) != ci) {
      throw SchemaError("duplicate column '" + table.header[c] + "'");
    }
    cov_cols.push_back(ci);
    names.push_back(table.header[c]);
  }

  std::vector<SurvivalRecord> records;
  records.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const long rowno = static_cast<long>(i) + 1;
    SurvivalRecord r;
    r.time = csv::parse_double(row[time_col], rowno);
    r.status = csv::parse_int(row[status_col], rowno);
    if (entry_col >= 0 && !row[entry_col].empty()) r.entry = csv::parse_double(row[entry_col], rowno);
    for (int c : cov_cols) r.covariates.push_back(csv::parse_double(row[c], rowno));
    try {
      validate_record(r, cov_cols.size(), i);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(e.what()) + " (row " + std::to_string(rowno) + ")");
    }
    records.push_back(std::move(r));
  }
  return SurvivalFrame(std::move(records), std::move(names));
}

void write_survival_csv(std::ostream& out, const SurvivalFrame& frame) {
  const bool entry = frame.has_entry();
  if (entry) out << "entry,";
  out << "time,status";
  for (const auto& name : frame.covariate_names()) out << ',' << name;
  out << '\n';
  for (const auto& r : frame.records()) {
    if (entry) out << (r.entry ? csv::format(*r.entry) : std::string()) << ',';
    out << csv::format(r.time) << ',' << r.status;
    for (double w : r.covariates) out << ',' << csv::format(w);
    out << '\n';
  }
}

std::vector<TransitionRecord> parse_multistate_csv(const std::string& path, const std::string& censor_token) {
  auto in = open_input(path);
  return read_multistate_csv(in, censor_token);
}

std::vector<TransitionRecord> read_multistate_csv(std::istream& in, const std::string& censor_token) {
  const csv::Table table = csv::read(in);
  const char* required[] = {"id", "from", "to", "t_start", "t_stop"};
  int cols[5];
  for (int k = 0; k < 5; ++k) {
    cols[k] = table.column(required[k]);
    if (cols[k] < 0) throw SchemaError(std::string("missing mandatory column '") + required[k] + "'");
  }
  std::vector<TransitionRecord> records;
  records.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const long rowno = static_cast<long>(i) + 1;
    TransitionRecord r;
    r.id = row[cols[0]];
    if (r.id.empty()) throw ParseError("empty subject id", rowno);
    r.from = csv::parse_int(row[cols[1]], rowno);
    if (row[cols[2]] != censor_token) r.to = csv::parse_int(row[cols[2]], rowno);
    r.t_start = csv::parse_double(row[cols[3]], rowno);
    r.t_stop = csv::parse_double(row[cols[4]], rowno);
    records.push_back(std::move(r));
  }
  validate_trajectories(records);
  return records;
}

void write_multistate_csv(std::ostream& out, std::span<const TransitionRecord> records,
                          const std::string& censor_token) {
  out << "id,from,to,t_start,t_stop\n";
  for (const auto& r : records) {
    out << r.id << ',' << r.from << ',' << (r.to ? std::to_string(*r.to) : censor_token) << ','
        << csv::format(r.t_start) << ',' << csv::format(r.t_stop) << '\n';
  }
}

void validate_trajectories(std::span<const TransitionRecord> records) {
  for (const auto& rows : group_by_subject(records)) {
    const TransitionRecord* prev = nullptr;
    for (const TransitionRecord* r : rows) {
      const std::string who = "subject " + r->id;
      if (!std::isfinite(r->t_start) || !std::isfinite(r->t_stop) || r->t_start < 0.0 ||
          !(r->t_start < r->t_stop)) {
        throw ValidationError(who + ": need 0 <= t_start < t_stop at t=" + csv::format(r->t_start));
      }
      if (r->from < 0 || (r->to && *r->to < 0)) throw ValidationError(who + ": negative state");
      if (r->to && *r->to == r->from) {
        throw ValidationError(who + ": self transition at t=" + csv::format(r->t_stop));
      }
      if (prev) {
        if (prev->censored()) {
          throw ValidationError(who + ": row after censoring at t=" + csv::format(prev->t_stop));
        }
        if (*prev->to != r->from) {
          throw ValidationError(who + ": state mismatch at t=" + csv::format(r->t_start));
        }
        if (r->t_start < prev->t_stop) {
          throw ValidationError(who + ": times not increasing at t=" + csv::format(r->t_start));
        }
      }
      prev = r;
    }
  }
}

SurvivalFrame split_transitions(std::span<const TransitionRecord> records, int from, int to) {
  if (from < 0 || to < 0 || from == to) {
    throw ValidationError("transition (" + std::to_string(from) + "," + std::to_string(to) +
                          ") is not a transition between distinct states");
  }
  std::vector<SurvivalRecord> out;
  bool state_seen = false;
  for (const auto& rows : group_by_subject(records)) {
    const auto it = std::find_if(rows.begin(), rows.end(), [&](const auto* r) { return r->from == from; });
    if (it == rows.end()) continue;
    state_seen = true;
    const TransitionRecord& r = **it;
    SurvivalRecord s;
    s.time = r.t_stop;
    s.status = (r.to && *r.to == to) ? 1 : 0;
    if (r.t_start > 0.0) s.entry = r.t_start;
    out.push_back(std::move(s));
  }
  if (!state_seen) {
    throw ValidationError("transition (" + std::to_string(from) + "," + std::to_string(to) +
                          ") is not in the state diagram: no subject occupies state " +
                          std::to_string(from));
  }
  return SurvivalFrame(std::move(out));
}

SurvivalFrame first_exit_frame(std::span<const TransitionRecord> records, int state) {
  std::vector<SurvivalRecord> out;
  for (const auto& rows : group_by_subject(records)) {
    const auto it = std::find_if(rows.begin(), rows.end(), [&](const auto* r) { return r->from == state; });
    if (it == rows.end()) continue;
    SurvivalRecord s;
    s.time = (*it)->t_stop;
    s.status = (*it)->censored() ? 0 : 1;
    if ((*it)->t_start > 0.0) s.entry = (*it)->t_start;
    out.push_back(std::move(s));
  }
  return SurvivalFrame(std::move(out));
}

SurvivalFrame absorption_frame(std::span<const TransitionRecord> records, int absorbing) {
  std::vector<SurvivalRecord> out;
  for (const auto& rows : group_by_subject(records)) {
    SurvivalRecord s;
    const double start = rows.front()->t_start;
    if (start > 0.0) s.entry = start;
    s.time = rows.back()->t_stop;
    for (const auto* r : rows) {
      if (r->to && *r->to == absorbing) {
        s.time = r->t_stop;
        s.status = 1;
        break;
      }
    }
    out.push_back(std::move(s));
  }
  return SurvivalFrame(std::move(out));
}

std::vector<double> relative_risks(const SurvivalFrame& frame, std::span<const double> beta) {
  if (!beta.empty() && beta.size() != frame.dim()) {
    throw ValidationError("beta has length " + std::to_string(beta.size()) + " but frame has " +
                          std::to_string(frame.dim()) + " covariates");
  }
  if (beta.empty() && frame.dim() != 0) {
    throw ValidationError("beta is empty but frame has " + std::to_string(frame.dim()) + " covariates");
  }
  std::vector<double> w(frame.size(), 1.0);
  if (beta.empty()) return w;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const auto& x = frame.records()[i].covariates;
    double eta = 0.0;
    for (std::size_t k = 0; k < beta.size(); ++k) eta += beta[k] * x[k];
    w[i] = std::exp(eta);
  }
  return w;
}

RiskProfile risk_profile(const SurvivalFrame& frame, double t, std::span<const double> beta) {
  const std::vector<double> w = relative_risks(frame, beta);
  RiskProfile p;
  p.eval_time = t;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (frame.records()[i].at_risk(t)) {
      ++p.at_risk_count;
      p.weighted_risk += w[i];
    }
  }
  return p;
}

}  // namespace pchaz
