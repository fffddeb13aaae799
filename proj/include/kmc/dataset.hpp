#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace kmc {

enum class AttributeKind { Numeric, Categorical };

struct AttributeSpec {
    std::string name;
    AttributeKind kind = AttributeKind::Numeric;
    /// Ordered category vocabulary; index into it is the stored category value.
    std::vector<std::string> categories;

    std::optional<std::size_t> find_category(std::string_view value) const;

    bool operator==(const AttributeSpec&) const = default;
};

/// Ordered attribute list, one of which is the (two-class, categorical) label.
struct Schema {
    std::vector<AttributeSpec> attributes;
    std::size_t class_index = 0;

    const AttributeSpec& class_attribute() const { return attributes.at(class_index); }
    std::size_t feature_count() const { return attributes.size() - 1; }
    /// Attribute for feature position `f`, skipping the class attribute.
    const AttributeSpec& feature(std::size_t f) const { return attributes.at(attribute_index(f)); }
    std::size_t attribute_index(std::size_t f) const { return f < class_index ? f : f + 1; }
    std::optional<std::size_t> find_attribute(std::string_view name) const;

    /// Structural checks: unique non-empty names, categorical class attribute.
    void validate() const;

    bool operator==(const Schema&) const = default;
};

/// Built-in 12-attribute tuberculosis schema ("tb-table1").
Schema tb_table1_schema();

/// Resolve a schema by built-in name; throws for unknown names.
Schema builtin_schema(std::string_view name);

struct Missing {
    bool operator==(const Missing&) const = default;
};

struct Category {
    std::size_t index = 0;
    bool operator==(const Category&) const = default;
};

using Cell = std::variant<Missing, double, Category>;

inline bool is_missing(const Cell& c) { return std::holds_alternative<Missing>(c); }

struct Instance {
    /// One cell per feature attribute (class excluded).
    std::vector<Cell> values;
    std::optional<std::size_t> label;

    bool operator==(const Instance&) const = default;
};

/// Immutable schema + instances. Every instance is checked against the schema
/// on construction.
class Dataset {
public:
    Dataset() = default;
    Dataset(Schema schema, std::vector<Instance> instances);

    const Schema& schema() const { return schema_; }
    const std::vector<Instance>& instances() const { return instances_; }
    const Instance& operator[](std::size_t i) const { return instances_[i]; }
    std::size_t n() const { return instances_.size(); }
    std::size_t d() const { return schema_.feature_count(); }
    std::size_t class_count() const { return schema_.class_attribute().categories.size(); }

    /// Labels of all instances; throws if any instance is unlabeled.
    std::vector<std::size_t> labels() const;
    std::vector<std::size_t> class_counts() const;

    /// Instances at `indices`, same schema.
    Dataset subset(const std::vector<std::size_t>& indices) const;

    bool operator==(const Dataset&) const = default;

private:
    Schema schema_;
    std::vector<Instance> instances_;
};

struct LoadOptions {
    /// When false the class column may be absent or empty (prediction input).
    bool require_labels = true;
};

/// Read a CSV dataset. With a schema, columns are matched by header name and
/// undeclared category values are appended in first-appearance order; without
/// one, kinds are inferred.
Dataset load_csv(const std::filesystem::path& path, const std::optional<Schema>& schema = std::nullopt,
                 LoadOptions options = {});
Dataset read_csv(std::istream& in, const std::optional<Schema>& schema = std::nullopt, LoadOptions options = {},
                 std::string_view source = "<stream>");

/// Writes header + rows in schema order; missing cells are written as empty fields.
void write_csv(std::ostream& out, const Dataset& ds);
void save_csv(const std::filesystem::path& path, const Dataset& ds);

/// Per-class proportional split into (first, second) where the first part takes
/// `fraction` of each class, rounded by largest remainder across classes.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double fraction, std::uint64_t seed);

/// Serialize a real so that parsing it back yields the same double.
std::string format_real(double v);

}  // namespace kmc
