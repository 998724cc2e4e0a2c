#pragma once

#include "nfrl/binarize.h"
#include "nfrl/network.h"
#include "nfrl/rules.h"

#include <filesystem>
#include <string>

namespace nfrl {

// Structured-text (JSON) persistence. Doubles are written in shortest
// round-trip form, so save/load reproduces every weight bit for bit.
// Loaders throw LoadError naming the offending field.

std::string binarizer_to_text(const BinarizerModel& binarizer);
BinarizerModel binarizer_from_text(const std::string& text);

std::string model_to_text(const NfrlModel& model);
NfrlModel model_from_text(const std::string& text);
void save_model(const std::filesystem::path& path, const NfrlModel& model);
NfrlModel load_model(const std::filesystem::path& path);

/// One record per rule: form, clauses as literal (bit, negated) lists, scores.
std::string ruleset_to_text(const RuleSet& rules);
RuleSet ruleset_from_text(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace nfrl
