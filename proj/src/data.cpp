#include "dmn/data.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace dmn {

namespace fs = std::filesystem;
using nlohmann::json;

void validate_example(const MultiChoiceExample& ex) {
  if (ex.candidates.size() < 2)
    throw std::invalid_argument("example '" + ex.id + "': needs at least 2 candidates, has " +
                                std::to_string(ex.candidates.size()));
  if (ex.gold < 0 || static_cast<std::size_t>(ex.gold) >= ex.candidates.size())
    throw std::invalid_argument("example '" + ex.id + "': gold index " + std::to_string(ex.gold) +
                                " out of range for " + std::to_string(ex.candidates.size()) +
                                " candidates");
  if (ex.passage.empty())
    throw std::invalid_argument("example '" + ex.id + "': empty passage");
}

namespace {

void note(std::ostream* warn, const std::string& msg) {
  if (warn) *warn << msg << '\n';
}

// Subset label for per-subset counts: the file's parent directory relative to
// the ingestion root ("." for files directly under the root).
std::string subset_of(const fs::path& root, const fs::path& file) {
  const fs::path rel = fs::relative(file.parent_path(), root);
  const std::string s = rel.generic_string();
  return s.empty() ? "." : s;
}

} // namespace

std::vector<MultiChoiceExample> read_race_dir(const std::string& path, IngestStats* stats,
                                              std::ostream* warn) {
  const fs::path root(path);
  if (!fs::is_directory(root))
    throw std::invalid_argument("read_race_dir: '" + path + "' is not a directory");

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  IngestStats local;
  std::vector<MultiChoiceExample> out;
  for (const fs::path& file : files) {
    json doc;
    try {
      std::ifstream in(file);
      doc = json::parse(in);
      if (!doc.is_object()) throw std::runtime_error("top-level value is not an object");
      const auto& article = doc.at("article");
      const auto& questions = doc.at("questions");
      const auto& options = doc.at("options");
      const auto& answers = doc.at("answers");
      if (!article.is_string() || !questions.is_array() || !options.is_array() ||
          !answers.is_array())
        throw std::runtime_error("field types do not match the schema");
      if (questions.size() != options.size() || questions.size() != answers.size())
        throw std::runtime_error("questions/options/answers lengths differ");

      ++local.files_read;
      const std::string subset = subset_of(root, file);
      for (std::size_t qi = 0; qi < questions.size(); ++qi) {
        const std::string id = fs::relative(file, root).generic_string() + ":" + std::to_string(qi);
        try {
          MultiChoiceExample ex;
          ex.id = id;
          ex.passage = article.get<std::string>();
          ex.question = questions[qi].get<std::string>();
          ex.candidates = options[qi].get<std::vector<std::string>>();
          const std::string letter = answers[qi].get<std::string>();
          const int gold = letter.size() == 1 ? letter[0] - 'A' : -1;
          if (gold < 0 || static_cast<std::size_t>(gold) >= ex.candidates.size())
            throw std::invalid_argument("answer letter '" + letter + "' out of range");
          ex.gold = gold;
          validate_example(ex);
          ++local.examples;
          ++local.per_subset[subset];
          out.push_back(std::move(ex));
        } catch (const std::exception& e) {
          note(warn, "read_race_dir: " + id + ": " + e.what() + ", example rejected");
          ++local.rejected_examples;
        }
      }
    } catch (const std::exception& e) {
      note(warn, "read_race_dir: skipping " + file.generic_string() + ": " + e.what());
      ++local.skipped_files;
    }
  }
  if (stats) *stats = std::move(local);
  return out;
}

namespace {

MultiChoiceExample example_from_json(const json& doc) {
  MultiChoiceExample ex;
  ex.id = doc.at("id").get<std::string>();
  ex.passage = doc.at("passage").get<std::string>();
  ex.question = doc.at("question").get<std::string>();
  ex.candidates = doc.at("candidates").get<std::vector<std::string>>();
  ex.gold = doc.at("gold").get<int>();
  validate_example(ex);
  return ex;
}

} // namespace

std::vector<MultiChoiceExample> read_jsonl(const std::string& path, IngestStats* stats,
                                           std::ostream* warn) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("read_jsonl: cannot open '" + path + "'");

  IngestStats local;
  local.files_read = 1;
  std::vector<MultiChoiceExample> out;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(example_from_json(json::parse(line)));
      ++local.examples;
    } catch (const std::exception& e) {
      note(warn, "read_jsonl: " + path + ":" + std::to_string(lineno) + ": skipped: " + e.what());
      ++local.skipped_lines;
    }
  }
  if (stats) *stats = std::move(local);
  return out;
}

void write_jsonl(const std::string& path, std::span<const MultiChoiceExample> examples) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("write_jsonl: cannot open '" + path + "' for writing");
  for (const MultiChoiceExample& ex : examples) {
    json doc{{"id", ex.id},
             {"passage", ex.passage},
             {"question", ex.question},
             {"candidates", ex.candidates},
             {"gold", ex.gold}};
    out << doc.dump() << '\n';
  }
  if (!out) throw std::runtime_error("write_jsonl: write to '" + path + "' failed");
}

} // namespace dmn
