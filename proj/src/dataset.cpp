#include "kmc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "kmc/error.hpp"
#include "kmc/random.hpp"

namespace kmc {
namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

bool is_missing_token(std::string_view s) { return s.empty() || s == "null"; }

bool parse_real(std::string_view s, double& out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

// Splits one CSV record; handles double-quoted fields with "" escapes.
// Returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no) {
    fields.clear();
    std::string line;
    if (!std::getline(in, line)) return false;
    ++line_no;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0;; ++i) {
        if (i == line.size()) {
            if (quoted) {
                std::string next;
                if (!std::getline(in, next)) throw Error("unterminated quoted field at line " + std::to_string(line_no));
                ++line_no;
                field.push_back('\n');
                line = std::move(next);
                i = static_cast<std::size_t>(-1);
                continue;
            }
            break;
        }
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
            was_quoted = true;
        } else if (ch == ',') {
            fields.push_back(was_quoted ? field : trim(field));
            field.clear();
            was_quoted = false;
        } else {
            field.push_back(ch);
        }
    }
    fields.push_back(was_quoted ? field : trim(field));
    return true;
}

std::string quote_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos && s == trim(s)) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

std::size_t intern_category(AttributeSpec& attr, const std::string& value) {
    if (auto idx = attr.find_category(value)) return *idx;
    attr.categories.push_back(value);
    return attr.categories.size() - 1;
}

bool equals_ignore_case(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

Schema infer_schema(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    Schema schema;
    for (std::size_t c = 0; c < header.size(); ++c) {
        AttributeSpec attr{header[c], AttributeKind::Numeric, {}};
        for (const auto& row : rows) {
            double v = 0.0;
            if (!is_missing_token(row[c]) && !parse_real(row[c], v)) {
                attr.kind = AttributeKind::Categorical;
                break;
            }
        }
        schema.attributes.push_back(std::move(attr));
    }
    schema.class_index = header.size() - 1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (equals_ignore_case(header[c], "class")) {
            schema.class_index = c;
            break;
        }
    }
    schema.attributes[schema.class_index].kind = AttributeKind::Categorical;
    return schema;
}

}  // namespace

std::optional<std::size_t> AttributeSpec::find_category(std::string_view value) const {
    const auto it = std::find(categories.begin(), categories.end(), value);
    if (it == categories.end()) return std::nullopt;
    return static_cast<std::size_t>(it - categories.begin());
}

std::optional<std::size_t> Schema::find_attribute(std::string_view name) const {
    for (std::size_t i = 0; i < attributes.size(); ++i) {
        if (attributes[i].name == name) return i;
    }
    return std::nullopt;
}

void Schema::validate() const {
    if (attributes.size() < 2) throw Error("schema needs at least one feature and a class attribute");
    if (class_index >= attributes.size()) throw Error("schema class index out of range");
    std::set<std::string> seen;
    for (const auto& a : attributes) {
        if (a.name.empty()) throw Error("schema attribute with empty name");
        if (!seen.insert(a.name).second) throw Error("duplicate attribute name '" + a.name + "'");
    }
    if (class_attribute().kind != AttributeKind::Categorical) {
        throw Error("class attribute '" + class_attribute().name + "' must be categorical");
    }
}

Schema tb_table1_schema() {
    using K = AttributeKind;
    const std::vector<std::string> yes_no{"yes", "no"};
    Schema s;
    s.attributes = {
        {"Age", K::Numeric, {}},
        {"chroniccough(weeks)", K::Numeric, {}},
        {"weightloss", K::Categorical, yes_no},
        {"intermittentfever(days)", K::Numeric, {}},
        {"nightsweats", K::Categorical, yes_no},
        {"Bloodcough", K::Categorical, yes_no},
        {"chestpain", K::Categorical, yes_no},
        {"HIV", K::Categorical, {"positive", "negative"}},
        {"Radiographicfindings", K::Categorical, {"normal", "abnormal"}},
        {"Sputum", K::Categorical, {"positive", "negative"}},
        {"wheezing", K::Categorical, yes_no},
        {"class", K::Categorical, {"PTB", "RPTB"}},
    };
    s.class_index = 11;
    return s;
}

Schema builtin_schema(std::string_view name) {
    if (name == "tb-table1") return tb_table1_schema();
    throw Error("unknown built-in schema '" + std::string(name) + "'");
}

Dataset::Dataset(Schema schema, std::vector<Instance> instances)
    : schema_(std::move(schema)), instances_(std::move(instances)) {
    schema_.validate();
    const std::size_t d = schema_.feature_count();
    for (std::size_t i = 0; i < instances_.size(); ++i) {
        const Instance& inst = instances_[i];
        if (inst.values.size() != d) {
            throw Error("instance " + std::to_string(i) + " has " + std::to_string(inst.values.size()) +
                        " values, schema expects " + std::to_string(d));
        }
        for (std::size_t f = 0; f < d; ++f) {
            const AttributeSpec& attr = schema_.feature(f);
            const Cell& cell = inst.values[f];
            if (const double* v = std::get_if<double>(&cell)) {
                if (attr.kind != AttributeKind::Numeric) throw Error("numeric cell in categorical attribute '" + attr.name + "'");
                if (!std::isfinite(*v)) throw Error("non-finite value in attribute '" + attr.name + "'");
            } else if (const Category* c = std::get_if<Category>(&cell)) {
                if (attr.kind != AttributeKind::Categorical) throw Error("category cell in numeric attribute '" + attr.name + "'");
                if (c->index >= attr.categories.size()) throw Error("category index out of range in '" + attr.name + "'");
            }
        }
        if (inst.label && *inst.label >= class_count()) throw Error("label index out of range");
    }
}

std::vector<std::size_t> Dataset::labels() const {
    std::vector<std::size_t> out;
    out.reserve(instances_.size());
    for (std::size_t i = 0; i < instances_.size(); ++i) {
        if (!instances_[i].label) throw Error("instance " + std::to_string(i) + " has no class label");
        out.push_back(*instances_[i].label);
    }
    return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(class_count(), 0);
    for (const auto& inst : instances_) {
        if (inst.label) ++counts[*inst.label];
    }
    return counts;
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
    std::vector<Instance> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(instances_.at(i));
    Dataset ds;
    ds.schema_ = schema_;
    ds.instances_ = std::move(out);
    return ds;
}

Dataset read_csv(std::istream& in, const std::optional<Schema>& given, LoadOptions options, std::string_view source) {
    const std::string where(source);
    std::size_t line_no = 0;
    std::vector<std::string> header;
    if (!read_record(in, header, line_no)) throw Error(where + ": empty file, header row expected");

    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> row_lines;
    std::vector<std::string> fields;
    while (true) {
        const std::size_t start = line_no + 1;
        if (!read_record(in, fields, line_no)) break;
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
        if (fields.size() != header.size()) {
            throw Error(where + ": row " + std::to_string(start) + " has " + std::to_string(fields.size()) +
                        " fields, header has " + std::to_string(header.size()));
        }
        rows.push_back(fields);
        row_lines.push_back(start);
    }

    Schema schema = given ? *given : infer_schema(header, rows);
    schema.validate();

    // column_of[a] = CSV column holding schema attribute a (npos if absent)
    constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::vector<std::size_t> column_of(schema.attributes.size(), npos);
    if (given) {
        for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
            const auto it = std::find(header.begin(), header.end(), schema.attributes[a].name);
            if (it != header.end()) {
                column_of[a] = static_cast<std::size_t>(it - header.begin());
            } else if (a != schema.class_index || options.require_labels) {
                throw Error(where + ": column '" + schema.attributes[a].name + "' missing from header");
            }
        }
    } else {
        std::iota(column_of.begin(), column_of.end(), std::size_t{0});
    }

    std::vector<Instance> instances;
    instances.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        Instance inst;
        inst.values.reserve(schema.feature_count());
        for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
            AttributeSpec& attr = schema.attributes[a];
            const std::string* raw = column_of[a] == npos ? nullptr : &rows[r][column_of[a]];
            const bool missing = raw == nullptr || is_missing_token(*raw);
            if (a == schema.class_index) {
                if (missing) {
                    if (options.require_labels) throw Error(where + ": row " + std::to_string(row_lines[r]) + " has no class label");
                } else {
                    inst.label = intern_category(attr, *raw);
                }
                continue;
            }
            if (missing) {
                inst.values.emplace_back(Missing{});
            } else if (attr.kind == AttributeKind::Numeric) {
                double v = 0.0;
                if (!parse_real(*raw, v)) {
                    throw Error(where + ": row " + std::to_string(row_lines[r]) + ", column '" + attr.name +
                                "': cannot parse '" + *raw + "' as a number");
                }
                inst.values.emplace_back(v);
            } else {
                inst.values.emplace_back(Category{intern_category(attr, *raw)});
            }
        }
        instances.push_back(std::move(inst));
    }

    if (options.require_labels) {
        std::set<std::size_t> distinct;
        for (const auto& inst : instances) distinct.insert(*inst.label);
        if (distinct.size() < 2) throw Error(where + ": single-class dataset (need 2 distinct class labels)");
        if (schema.class_attribute().categories.size() != 2) {
            throw Error(where + ": class attribute must have exactly 2 categories, found " +
                        std::to_string(schema.class_attribute().categories.size()));
        }
    }
    return Dataset(std::move(schema), std::move(instances));
}

Dataset load_csv(const std::filesystem::path& path, const std::optional<Schema>& schema, LoadOptions options) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    return read_csv(in, schema, options, path.string());
}

std::string format_real(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const Dataset& ds) {
    const Schema& s = ds.schema();
    for (std::size_t a = 0; a < s.attributes.size(); ++a) {
        out << (a ? "," : "") << quote_field(s.attributes[a].name);
    }
    out << '\n';
    for (const auto& inst : ds.instances()) {
        for (std::size_t a = 0; a < s.attributes.size(); ++a) {
            if (a) out << ',';
            if (a == s.class_index) {
                if (inst.label) out << quote_field(s.attributes[a].categories[*inst.label]);
                continue;
            }
            const std::size_t f = a < s.class_index ? a : a - 1;
            const Cell& cell = inst.values[f];
            if (const double* v = std::get_if<double>(&cell)) {
                out << format_real(*v);
            } else if (const Category* c = std::get_if<Category>(&cell)) {
                out << quote_field(s.attributes[a].categories[c->index]);
            }
        }
        out << '\n';
    }
}

void save_csv(const std::filesystem::path& path, const Dataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    write_csv(out, ds);
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw Error("stratified_split: fraction must lie in (0,1)");
    const std::size_t classes = ds.class_count();
    std::vector<std::vector<std::size_t>> by_class(classes);
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const auto& label = ds[i].label;
        if (!label) throw Error("stratified_split: unlabeled instance " + std::to_string(i));
        by_class[*label].push_back(i);
    }
    for (std::size_t c = 0; c < classes; ++c) {
        if (by_class[c].size() < 2) throw Error("stratified_split: every class needs at least 2 instances");
    }

    // Largest remainder: floor of each class quota, then hand the leftover
    // slots to the largest fractional parts (ties -> lower class index).
    const auto total = static_cast<std::size_t>(std::floor(static_cast<double>(ds.n()) * fraction + 0.5));
    std::vector<std::size_t> take(classes);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        const double quota = static_cast<double>(by_class[c].size()) * fraction;
        take[c] = static_cast<std::size_t>(std::floor(quota));
        assigned += take[c];
        remainders.emplace_back(quota - std::floor(quota), c);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < total && r < remainders.size(); ++r, ++assigned) {
        ++take[remainders[r].second];
    }

    Rng rng(derive_seed(seed, streams::kSplit));
    std::vector<std::size_t> first, second;
    for (std::size_t c = 0; c < classes; ++c) {
        rng.shuffle(by_class[c]);
        first.insert(first.end(), by_class[c].begin(), by_class[c].begin() + static_cast<std::ptrdiff_t>(take[c]));
        second.insert(second.end(), by_class[c].begin() + static_cast<std::ptrdiff_t>(take[c]), by_class[c].end());
    }
    std::sort(first.begin(), first.end());
    std::sort(second.begin(), second.end());
    return {ds.subset(first), ds.subset(second)};
}

}  // namespace kmc
