#pragma once

#include "leansearch/providers.hpp"
#include "leansearch/util.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace leansearch {

enum class KindTag { theorem, def, instance, class_, structure, abbrev, other };

// Declaration kind. Unknown extraction tags are preserved verbatim as `other`.
struct DeclKind {
    KindTag tag = KindTag::theorem;
    std::string other_tag;

    static DeclKind parse(std::string_view label);
    std::string label() const;
    // def, class, instance, structure, abbrev: kinds whose value field carries
    // meaning and is rendered into passages.
    bool carries_value() const;

    friend bool operator==(const DeclKind&, const DeclKind&) = default;
};

struct SourceLocation {
    std::string file;
    std::uint32_t line = 1;
};

struct DeclarationRecord {
    std::string name;
    DeclKind kind;
    std::string signature;
    std::optional<std::string> value;
    SourceLocation source;
    std::vector<std::string> deps;
    std::optional<std::string> informal;
};

json to_json(const DeclarationRecord& record);
DeclarationRecord record_from_json(const json& j);

class DuplicateNameError : public Error {
public:
    explicit DuplicateNameError(std::string name)
        : Error("duplicate declaration name '" + name + "'"), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class CycleError : public Error {
public:
    explicit CycleError(std::vector<std::string> members);
    const std::vector<std::string>& members() const noexcept { return members_; }

private:
    std::vector<std::string> members_;
};

class CorpusSnapshot {
public:
    CorpusSnapshot() = default;
    explicit CorpusSnapshot(std::string version_tag) : version_tag_(std::move(version_tag)) {}

    // Throws DuplicateNameError. The name is trimmed before insertion.
    void add(DeclarationRecord record);

    const DeclarationRecord* find(std::string_view name) const;
    DeclarationRecord* find_mutable(std::string_view name);
    bool contains(std::string_view name) const { return find(name) != nullptr; }
    // A dependency is external when it names no record of this snapshot.
    bool is_external(std::string_view dep) const { return !contains(dep); }

    const std::map<std::string, DeclarationRecord, std::less<>>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    const std::string& version_tag() const { return version_tag_; }
    void set_version_tag(std::string tag) { version_tag_ = std::move(tag); }

private:
    std::map<std::string, DeclarationRecord, std::less<>> records_;
    std::string version_tag_;
};

// One JSON record per line; blank lines are skipped. Errors carry the line.
CorpusSnapshot load_corpus(const std::string& path, std::string version_tag = "");
CorpusSnapshot parse_corpus(const std::vector<std::string>& lines, std::string version_tag = "");
void save_corpus(const CorpusSnapshot& snapshot, const std::string& path);

// Dependencies before dependents; among ready records, lexicographic by name.
// External deps are ignored. Throws CycleError.
std::vector<std::string> topological_order(const CorpusSnapshot& snapshot);

// ---------------------------------------------------------------------------
// Informalization

struct InformalizeOptions {
    int primary_retries = 2;
    std::size_t max_dep_context = 20;
    std::size_t dep_context_chars = 600;
    // >1 dispatches records whose dependencies are complete in parallel.
    std::size_t concurrency = 1;
    GenerationParams params{};
};

struct InformalizeFailure {
    std::string name;
    std::string reason;
};

struct InformalizeResult {
    CorpusSnapshot snapshot;
    std::vector<InformalizeFailure> failures;
};

struct DependencyContext {
    std::string name;
    std::string description;
};

// Internal dependencies that already have a description, nearest first
// (breadth-first over the DAG, lexicographic within a level), capped and
// truncated per `options`.
std::vector<DependencyContext> dependency_context(const CorpusSnapshot& snapshot,
                                                  const DeclarationRecord& record,
                                                  const InformalizeOptions& options);

std::string informalize_prompt(const DeclarationRecord& record,
                               const std::vector<DependencyContext>& context);

InformalizeResult informalize(const CorpusSnapshot& snapshot, TextProvider& primary,
                              TextProvider& fallback, const InformalizeOptions& options = {});

// ---------------------------------------------------------------------------
// Passages

struct TemplateConfig {
    std::string version = "passage-v1";
    bool kind_aware = true;
    std::map<std::string, std::string> instructions;  // keyed by kind label
    std::string default_instruction;
    std::string query_instruction;

    static TemplateConfig defaults();
    TemplateConfig kind_blind() const;
    const std::string& instruction_for(const DeclKind& kind) const;
};

struct Passage {
    std::string decl_name;
    std::string text;
    DeclKind kind;
};

Passage compose_passage(const DeclarationRecord& record, const TemplateConfig& tmpl);
std::string compose_query(std::string_view query, const TemplateConfig& tmpl);

}  // namespace leansearch
