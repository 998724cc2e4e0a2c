#include "nfrl/io.h"

#include "nfrl/error.h"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace nfrl {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

// Looks up `key` in `j` and converts it, reporting `path.key` on failure.
template <typename T>
T field(const json& j, const std::string& path, const char* key) {
    const std::string name = path.empty() ? key : path + "." + key;
    if (!j.is_object() || !j.contains(key)) throw LoadError("missing field '" + name + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw LoadError("invalid value for field '" + name + "'");
    }
}

const json& child(const json& j, const std::string& path, const char* key) {
    const std::string name = path.empty() ? key : path + "." + key;
    if (!j.is_object() || !j.contains(key)) throw LoadError("missing field '" + name + "'");
    return j.at(key);
}

json matrix_to_json(const Matrix& m) {
    return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const json& j, const std::string& path) {
    Matrix m;
    m.rows = field<std::size_t>(j, path, "rows");
    m.cols = field<std::size_t>(j, path, "cols");
    m.data = field<std::vector<double>>(j, path, "data");
    if (m.data.size() != m.rows * m.cols) throw LoadError("field '" + path + ".data' has the wrong length");
    return m;
}

const char* kind_name(LiteralKind kind) {
    switch (kind) {
    case LiteralKind::OneHot: return "one_hot";
    case LiteralKind::GreaterThan: return "greater_than";
    case LiteralKind::LessThan: return "less_than";
    case LiteralKind::Passthrough: return "passthrough";
    }
    return "?";
}

LiteralKind kind_from_name(const std::string& name, const std::string& path) {
    if (name == "one_hot") return LiteralKind::OneHot;
    if (name == "greater_than") return LiteralKind::GreaterThan;
    if (name == "less_than") return LiteralKind::LessThan;
    if (name == "passthrough") return LiteralKind::Passthrough;
    throw LoadError("invalid value for field '" + path + "'");
}

json binarizer_json(const BinarizerModel& b) {
    json features = json::array();
    for (const auto& f : b.features) features.push_back({{"name", f.name}, {"categorical", f.categorical}});
    json specs = json::array();
    for (const auto& s : b.specs) {
        json spec = {{"feature", s.feature_name}, {"kind", kind_name(s.kind)}};
        if (s.kind == LiteralKind::OneHot) spec["category"] = s.category;
        if (s.kind == LiteralKind::GreaterThan || s.kind == LiteralKind::LessThan) spec["threshold"] = s.threshold;
        specs.push_back(std::move(spec));
    }
    return {{"method", to_string(b.method)}, {"bins", b.bins},         {"seed", b.seed},
            {"features", features},          {"specs", specs},         {"warnings", b.warnings}};
}

BinarizerModel binarizer_from_json(const json& j, const std::string& path) {
    BinarizerModel b;
    try {
        b.method = parse_binning_method(field<std::string>(j, path, "method"));
    } catch (const ArgumentError&) {
        throw LoadError("invalid value for field '" + path + ".method'");
    }
    b.bins = field<int>(j, path, "bins");
    b.seed = field<std::uint64_t>(j, path, "seed");
    b.warnings = field<std::vector<std::string>>(j, path, "warnings");
    const auto& features = child(j, path, "features");
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto p = path + ".features[" + std::to_string(i) + "]";
        b.features.push_back({field<std::string>(features[i], p, "name"), field<bool>(features[i], p, "categorical"), {}});
    }
    const auto& specs = child(j, path, "specs");
    if (!specs.is_array()) throw LoadError("invalid value for field '" + path + ".specs'");
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto p = path + ".specs[" + std::to_string(i) + "]";
        LiteralSpec s;
        s.feature_name = field<std::string>(specs[i], p, "feature");
        s.kind = kind_from_name(field<std::string>(specs[i], p, "kind"), p + ".kind");
        if (s.kind == LiteralKind::OneHot) s.category = field<std::string>(specs[i], p, "category");
        if (s.kind == LiteralKind::GreaterThan || s.kind == LiteralKind::LessThan) {
            s.threshold = field<double>(specs[i], p, "threshold");
        }
        b.specs.push_back(std::move(s));
    }
    return b;
}

json parse_json(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw LoadError(std::string(what) + ": not valid JSON (" + e.what() + ")");
    }
}

void expect_format(const json& j, const char* format) {
    if (field<std::string>(j, "", "format") != format) throw LoadError("invalid value for field 'format'");
    if (field<int>(j, "", "version") != kFormatVersion) throw LoadError("unsupported value for field 'version'");
}

} // namespace

std::string binarizer_to_text(const BinarizerModel& binarizer) {
    json j = binarizer_json(binarizer);
    j["format"] = "nfrl-binarizer";
    j["version"] = kFormatVersion;
    return j.dump(1) + "\n";
}

BinarizerModel binarizer_from_text(const std::string& text) {
    const auto j = parse_json(text, "binarizer file");
    expect_format(j, "nfrl-binarizer");
    return binarizer_from_json(j, "");
}

std::string model_to_text(const NfrlModel& m) {
    json j;
    j["format"] = "nfrl-model";
    j["version"] = kFormatVersion;
    j["dims"] = {{"inputs", m.input_width()}, {"k1", m.nfl1.width()}, {"k2", m.nfl2.width()},
                 {"classes", m.class_count()}};
    j["seed"] = m.seed;
    j["class_names"] = m.class_names;
    j["binarizer"] = binarizer_json(m.binarizer);
    j["w_neg"] = matrix_to_json(m.neg.w_neg);
    j["nfl1"] = {{"w_op", m.nfl1.w_op}, {"w_conn", matrix_to_json(m.nfl1.w_conn)}};
    j["nfl2"] = {{"w_op", m.nfl2.w_op}, {"w_conn", matrix_to_json(m.nfl2.w_conn)}};
    j["head"] = {{"scores", matrix_to_json(m.head.scores)}, {"bias", m.head.bias}};
    return j.dump(1) + "\n";
}

NfrlModel model_from_text(const std::string& text) {
    const auto j = parse_json(text, "model file");
    expect_format(j, "nfrl-model");
    NfrlModel m;
    m.seed = field<std::uint64_t>(j, "", "seed");
    m.class_names = field<std::vector<std::string>>(j, "", "class_names");
    m.binarizer = binarizer_from_json(child(j, "", "binarizer"), "binarizer");
    m.neg.w_neg = matrix_from_json(child(j, "", "w_neg"), "w_neg");
    const auto& nfl1 = child(j, "", "nfl1");
    m.nfl1.w_op = field<std::vector<double>>(nfl1, "nfl1", "w_op");
    m.nfl1.w_conn = matrix_from_json(child(nfl1, "nfl1", "w_conn"), "nfl1.w_conn");
    const auto& nfl2 = child(j, "", "nfl2");
    m.nfl2.w_op = field<std::vector<double>>(nfl2, "nfl2", "w_op");
    m.nfl2.w_conn = matrix_from_json(child(nfl2, "nfl2", "w_conn"), "nfl2.w_conn");
    const auto& head = child(j, "", "head");
    m.head.scores = matrix_from_json(child(head, "head", "scores"), "head.scores");
    m.head.bias = field<std::vector<double>>(head, "head", "bias");

    const auto& dims = child(j, "", "dims");
    if (field<std::size_t>(dims, "dims", "inputs") != m.input_width() ||
        field<std::size_t>(dims, "dims", "k1") != m.nfl1.width() ||
        field<std::size_t>(dims, "dims", "k2") != m.nfl2.width() ||
        field<std::size_t>(dims, "dims", "classes") != m.class_count()) {
        throw LoadError("field 'dims' disagrees with the stored weight shapes");
    }
    try {
        m.validate();
    } catch (const ArgumentError& e) {
        throw LoadError(e.what());
    }
    return m;
}

void save_model(const std::filesystem::path& path, const NfrlModel& model) {
    write_text_file(path, model_to_text(model));
}

NfrlModel load_model(const std::filesystem::path& path) { return model_from_text(read_text_file(path)); }

std::string ruleset_to_text(const RuleSet& rs) {
    json rules = json::array();
    for (const auto& r : rs.rules) {
        json clauses = json::array();
        for (const auto& c : r.clauses) {
            json literals = json::array();
            for (const auto& l : c.literals) literals.push_back({l.bit, l.negated});
            clauses.push_back({{"op", c.op == Op::And ? "AND" : "OR"}, {"literals", literals}});
        }
        rules.push_back({{"id", r.id},
                         {"form", r.form == NormalForm::Cnf ? "CNF" : "DNF"},
                         {"clauses", clauses},
                         {"scores", r.scores}});
    }
    json j = {{"format", "nfrl-rules"}, {"version", kFormatVersion}, {"bias", rs.bias},
              {"binarizer", binarizer_json(rs.binarizer)}, {"rules", rules}};
    return j.dump(1) + "\n";
}

RuleSet ruleset_from_text(const std::string& text) {
    const auto j = parse_json(text, "rule file");
    expect_format(j, "nfrl-rules");
    RuleSet rs;
    rs.bias = field<std::vector<double>>(j, "", "bias");
    rs.binarizer = binarizer_from_json(child(j, "", "binarizer"), "binarizer");
    const auto& rules = child(j, "", "rules");
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const auto p = "rules[" + std::to_string(i) + "]";
        Rule r;
        r.id = field<std::size_t>(rules[i], p, "id");
        const auto form = field<std::string>(rules[i], p, "form");
        if (form != "CNF" && form != "DNF") throw LoadError("invalid value for field '" + p + ".form'");
        r.form = form == "CNF" ? NormalForm::Cnf : NormalForm::Dnf;
        r.scores = field<std::vector<double>>(rules[i], p, "scores");
        const auto& clauses = child(rules[i], p, "clauses");
        for (std::size_t c = 0; c < clauses.size(); ++c) {
            const auto cp = p + ".clauses[" + std::to_string(c) + "]";
            Clause clause;
            const auto op = field<std::string>(clauses[c], cp, "op");
            if (op != "AND" && op != "OR") throw LoadError("invalid value for field '" + cp + ".op'");
            clause.op = op == "AND" ? Op::And : Op::Or;
            for (const auto& [bit, negated] :
                 field<std::vector<std::pair<std::uint32_t, bool>>>(clauses[c], cp, "literals")) {
                if (bit >= rs.binarizer.width()) throw LoadError("literal out of range in '" + cp + "'");
                clause.literals.push_back({bit, negated});
            }
            r.clauses.push_back(std::move(clause));
        }
        if (r.scores.size() != rs.bias.size()) throw LoadError("field '" + p + ".scores' has the wrong length");
        rs.rules.push_back(std::move(r));
    }
    return rs;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed for " + path.string());
}

} // namespace nfrl
