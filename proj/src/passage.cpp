#include "leansearch/corpus.hpp"

namespace leansearch {

TemplateConfig TemplateConfig::defaults() {
    TemplateConfig t;
    t.version = "passage-v1";
    t.kind_aware = true;
    t.instructions = {
        {"theorem",
         "Represent this Lean theorem for retrieving the statement that matches a mathematical "
         "search query."},
        {"def",
         "Represent this Lean definition for retrieving the concept or construction a "
         "mathematical search query refers to."},
        {"instance",
         "Represent this Lean instance for retrieving the structure that a type is shown to "
         "carry."},
        {"class",
         "Represent this Lean type class for retrieving the mathematical structure or property "
         "it bundles."},
        {"structure",
         "Represent this Lean structure for retrieving the mathematical object it packages."},
        {"abbrev",
         "Represent this Lean abbreviation for retrieving the concept or construction it names."},
    };
    t.default_instruction =
        "Represent this Lean declaration for retrieving the mathematical content a search query "
        "refers to.";
    t.query_instruction =
        "Given a mathematical search query, retrieve the Lean declaration whose statement or "
        "definition matches it.";
    return t;
}

TemplateConfig TemplateConfig::kind_blind() const {
    TemplateConfig t = *this;
    t.kind_aware = false;
    t.version = version + "+kind-blind";
    return t;
}

const std::string& TemplateConfig::instruction_for(const DeclKind& kind) const {
    auto it = instructions.find(kind.label());
    return it == instructions.end() ? default_instruction : it->second;
}

Passage compose_passage(const DeclarationRecord& record, const TemplateConfig& tmpl) {
    // Kind-blind rendering uses the theorem template for every record.
    const DeclKind render_kind = tmpl.kind_aware ? record.kind : DeclKind{KindTag::theorem, {}};

    std::string text;
    text += "Instruct: " + tmpl.instruction_for(render_kind) + "\n";
    text += "Kind: " + render_kind.label() + "\n";
    text += "Name: " + record.name + "\n";
    text += "Signature: " + record.signature + "\n";
    if (render_kind.carries_value() && record.value) text += "Value: " + *record.value + "\n";
    text += "Description: " + record.informal.value_or("");
    return Passage{record.name, std::move(text), record.kind};
}

std::string compose_query(std::string_view query, const TemplateConfig& tmpl) {
    return "Instruct: " + tmpl.query_instruction + "\nQuery: " + std::string(query);
}

}  // namespace leansearch
