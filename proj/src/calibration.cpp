#include "uqalign/calibration.hpp"

#include <algorithm>
#include <map>

#include "uqalign/errors.hpp"

namespace uqalign {

namespace {

void check_rows(std::span<const QuestionRecord> records, const MeasureTable& table) {
  if (table.question_ids.size() != records.size()) {
    throw LengthError("measure table and records differ in size");
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (table.question_ids[i] != records[i].question_id) {
      throw ValidationError("row " + std::to_string(i) + " is " + table.question_ids[i] +
                            " in the measure table but " + records[i].question_id +
                            " in the records");
    }
  }
}

}  // namespace

CorrectnessMatrix correctness_correlation(std::span<const QuestionRecord> records,
                                          const MeasureTable& table, bool group_by_subject) {
  check_rows(records, table);
  std::map<std::string, std::vector<std::size_t>> rows_by_subject;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!r.correct) {
      throw ValidationError("record " + r.question_id + " has no correct label");
    }
    if (group_by_subject) {
      if (!r.subject || r.subject->empty()) {
        throw ValidationError("record " + r.question_id + " has no subject");
      }
      rows_by_subject[*r.subject].push_back(i);
    } else {
      rows_by_subject["all"].push_back(i);
    }
  }

  CorrectnessMatrix m;
  for (const auto& c : table.columns) m.measures.push_back(c.name);
  for (const auto& [subject, rows] : rows_by_subject) {
    m.subjects.push_back(subject);
    m.subject_sizes.push_back(rows.size());
    std::vector<std::optional<double>> row_cells;
    for (const auto& column : table.columns) {
      std::vector<double> correctness;
      std::vector<double> values;
      for (std::size_t i : rows) {
        if (!column.values[i]) continue;
        correctness.push_back(records[i].is_correct() ? 1.0 : 0.0);
        values.push_back(*column.values[i]);
      }
      std::optional<double> rho;
      try {
        rho = spearman(correctness, values);
      } catch (const DegenerateError&) {
      } catch (const LengthError&) {
      }
      row_cells.push_back(rho);
    }
    m.cells.push_back(std::move(row_cells));
  }
  return m;
}

std::vector<CertaintyGroup> partition(std::span<const double> zscores, const Rng& rng) {
  std::vector<CertaintyGroup> groups(zscores.size());
  for (std::size_t i = 0; i < zscores.size(); ++i) {
    if (zscores[i] < 0.0) {
      groups[i] = CertaintyGroup::high;
    } else if (zscores[i] > 0.0) {
      groups[i] = CertaintyGroup::low;
    } else {
      groups[i] = rng.derive("partition", i).coin() ? CertaintyGroup::high : CertaintyGroup::low;
    }
  }
  return groups;
}

LabeledAnswers labeled_answers(std::span<const QuestionRecord> records) {
  LabeledAnswers out;
  if (records.empty()) return out;
  out.label_count = records.front().choice_count();
  out.model.reserve(records.size());
  out.answer.reserve(records.size());
  for (const auto& r : records) {
    if (r.choice_count() != out.label_count) {
      throw ValidationError("record " + r.question_id + " has " +
                            std::to_string(r.choice_count()) + " choices; JSD shift needs a " +
                            "shared label space of " + std::to_string(out.label_count));
    }
    if (!r.correct) throw ValidationError("record " + r.question_id + " has no correct label");
    out.model.push_back(static_cast<std::uint8_t>(r.chosen));
    out.answer.push_back(static_cast<std::uint8_t>(*r.correct));
  }
  return out;
}

ShiftResult shift_for_groups(const LabeledAnswers& answers,
                             std::span<const CertaintyGroup> groups) {
  if (groups.size() != answers.model.size()) {
    throw LengthError("shift_for_groups: one group per question expected");
  }
  ShiftResult r;
  auto& p = r.parts;
  const std::size_t L = answers.label_count;
  p.h_model.assign(L, 0.0);
  p.h_answer.assign(L, 0.0);
  p.l_model.assign(L, 0.0);
  p.l_answer.assign(L, 0.0);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i] == CertaintyGroup::high) {
      p.h_model[answers.model[i]] += 1.0;
      p.h_answer[answers.answer[i]] += 1.0;
      ++p.n_high;
    } else {
      p.l_model[answers.model[i]] += 1.0;
      p.l_answer[answers.answer[i]] += 1.0;
      ++p.n_low;
    }
  }
  if (p.n_high == 0 || p.n_low == 0) {
    throw EmptyPartitionError("certainty partition has an empty side (" +
                              std::to_string(p.n_high) + " high, " + std::to_string(p.n_low) +
                              " low)");
  }
  r.jsd_high = jsd(renormalize(p.h_model), renormalize(p.h_answer));
  r.jsd_low = jsd(renormalize(p.l_model), renormalize(p.l_answer));
  r.shift = r.jsd_high - r.jsd_low;
  return r;
}

ShiftResult jsd_shift(std::span<const QuestionRecord> records, std::span<const double> uncertainty,
                      const Rng& rng) {
  if (records.size() != uncertainty.size()) {
    throw LengthError("jsd_shift: one measure value per record expected");
  }
  const auto answers = labeled_answers(records);
  const auto groups = partition(standardize(uncertainty), rng);
  return shift_for_groups(answers, groups);
}

ShiftTest jsd_shift_test(const LabeledAnswers& answers, std::span<const double> uncertainty,
                         std::size_t iters, const Rng& rng, Sided sided, int threads) {
  if (answers.model.size() != uncertainty.size()) {
    throw LengthError("jsd_shift_test: one measure value per question expected");
  }
  const auto groups = partition(standardize(uncertainty), rng);
  ShiftTest out;
  out.observed = shift_for_groups(answers, groups);

  auto resample = [&](std::size_t, Rng& stream) {
    std::vector<CertaintyGroup> shuffled = groups;
    stream.shuffle(std::span<CertaintyGroup>(shuffled));
    return shift_for_groups(answers, shuffled).shift;
  };
  out.test = permutation_test(out.observed.shift, resample, iters, rng, sided, threads);
  return out;
}

ShiftTest jsd_shift_test(std::span<const QuestionRecord> records,
                         std::span<const double> uncertainty, std::size_t iters, const Rng& rng,
                         Sided sided, int threads) {
  if (records.size() != uncertainty.size()) {
    throw LengthError("jsd_shift_test: one measure value per record expected");
  }
  return jsd_shift_test(labeled_answers(records), uncertainty, iters, rng, sided, threads);
}

CalibrationReport calibration_report(std::span<const QuestionRecord> records,
                                     const MeasureTable& table, const Rng& rng,
                                     const CalibrationConfig& cfg) {
  check_rows(records, table);
  CalibrationReport report;
  report.seed = rng.seed();
  report.config = cfg;
  if (!records.empty()) {
    report.model_id = records.front().model_id;
    report.dataset_id = records.front().dataset_id;
  }
  report.correctness = correctness_correlation(records, table, cfg.group_by_subject);
  const LabeledAnswers all_answers = labeled_answers(records);

  for (const auto& column : table.columns) {
    MeasureShift ms;
    ms.measure = column.name;
    LabeledAnswers subset;
    subset.label_count = all_answers.label_count;
    std::vector<double> values;
    const bool flip = (column.orientation == Orientation::certainty) != cfg.invert;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (!column.values[i]) continue;
      subset.model.push_back(all_answers.model[i]);
      subset.answer.push_back(all_answers.answer[i]);
      values.push_back(flip ? -*column.values[i] : *column.values[i]);
    }
    try {
      const Rng measure_rng = rng.derive("jsd-shift/" + column.name, 0);
      auto result = jsd_shift_test(subset, values, cfg.iters, measure_rng, cfg.sided, cfg.threads);
      ms.shift = result.observed.shift;
      ms.jsd_high = result.observed.jsd_high;
      ms.jsd_low = result.observed.jsd_low;
      ms.n_high = result.observed.parts.n_high;
      ms.n_low = result.observed.parts.n_low;
      ms.p_value = result.test.p_value;
      ms.null_samples = std::move(result.test.null_samples);
    } catch (const DegenerateError& e) {
      ms.note = e.what();
    } catch (const EmptyPartitionError& e) {
      ms.note = e.what();
    } catch (const LengthError& e) {
      ms.note = e.what();
    }
    report.shifts.push_back(std::move(ms));
  }
  return report;
}

}  // namespace uqalign
