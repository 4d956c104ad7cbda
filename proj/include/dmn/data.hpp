#ifndef DMN_DATA_HPP
#define DMN_DATA_HPP

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace dmn {

// One multiple-choice instance: pick candidates[gold] given passage + question.
// The question may be an empty string (story-completion style inputs); the
// encoder substitutes an unknown-token placeholder so |Q| >= 1 downstream.
struct MultiChoiceExample {
  std::string id;
  std::string passage;
  std::string question;
  std::vector<std::string> candidates;
  int gold = -1;
};

// Throws std::invalid_argument naming the example when an invariant is broken:
// at least two candidates, gold in range, non-empty passage.
void validate_example(const MultiChoiceExample& ex);

struct IngestStats {
  int files_read = 0;
  int examples = 0;
  int skipped_files = 0;
  int skipped_lines = 0;
  int rejected_examples = 0;
  std::map<std::string, int> per_subset; // subset directory name -> example count
};

// Directory of files, each a JSON object with fields "article", "questions",
// "options" (list of candidate lists), "answers" (letters "A".."Z" mapped to
// indices).  One example per question; ordering is stable: files sorted by
// path, questions in file order.  Malformed files are skipped with a warning
// line on `warn`; out-of-range answer letters reject just that example.
std::vector<MultiChoiceExample> read_race_dir(const std::string& path, IngestStats* stats = nullptr,
                                              std::ostream* warn = nullptr);

// One JSON object per line with fields id, passage, question, candidates,
// gold.  Unparseable or invalid lines are reported with their line number on
// `warn` and skipped; blank lines are ignored.
std::vector<MultiChoiceExample> read_jsonl(const std::string& path, IngestStats* stats = nullptr,
                                           std::ostream* warn = nullptr);

void write_jsonl(const std::string& path, std::span<const MultiChoiceExample> examples);

} // namespace dmn

#endif
