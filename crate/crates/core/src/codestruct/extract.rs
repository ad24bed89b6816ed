//! Identifier and comment extraction from Java and Python sources.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use tree_sitter::{Node, Parser};

use super::CodeError;
use crate::textprep::{is_stop_word, preprocess, split_identifier, TokenList};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Java,
    Python,
}

impl Language {
    pub fn parse(raw: &str) -> Result<Self, CodeError> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "java" => Ok(Language::Java),
            "python" | "py" => Ok(Language::Python),
            other => Err(CodeError::UnknownLanguage(other.to_string())),
        }
    }

    pub fn from_path(path: &str) -> Option<Self> {
        let lower = path.to_ascii_lowercase();
        if lower.ends_with(".java") {
            Some(Language::Java)
        } else if lower.ends_with(".py") {
            Some(Language::Python)
        } else {
            None
        }
    }

    fn grammar(&self) -> tree_sitter::Language {
        match self {
            Language::Java => tree_sitter_java::LANGUAGE.into(),
            Language::Python => tree_sitter_python::LANGUAGE.into(),
        }
    }

    fn keywords(&self) -> &'static [&'static str] {
        match self {
            Language::Java => JAVA_KEYWORDS,
            Language::Python => PYTHON_KEYWORDS,
        }
    }
}

const JAVA_KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long", "native",
    "new", "package", "private", "protected", "public", "return", "short", "static", "strictfp",
    "super", "switch", "synchronized", "this", "throw", "throws", "transient", "try", "void",
    "volatile", "while", "true", "false", "null", "var", "record", "yield",
];

const PYTHON_KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import", "in",
    "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while", "with",
    "yield", "self", "cls",
];

/// The four structured fields of a source file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeFields {
    pub type_names: TokenList,
    pub method_names: TokenList,
    pub variable_names: TokenList,
    pub comments: TokenList,
}

impl CodeFields {
    pub fn field(&self, field: CodeField) -> &TokenList {
        match field {
            CodeField::Type => &self.type_names,
            CodeField::Method => &self.method_names,
            CodeField::Variable => &self.variable_names,
            CodeField::Comment => &self.comments,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CodeField {
    Type,
    Method,
    Variable,
    Comment,
}

impl CodeField {
    pub const ALL: [CodeField; 4] = [CodeField::Type, CodeField::Method, CodeField::Variable, CodeField::Comment];
}

/// Tokens of a code identifier: split, lowercased and stemmed. Stop words are kept
/// because identifier parts such as `do` or `get` carry meaning in code.
pub fn preprocess_identifier(ident: &str) -> TokenList {
    ident
        .split(|c: char| !c.is_alphanumeric())
        .flat_map(split_identifier)
        .filter(|p| p.chars().count() >= 2 && !p.chars().all(char::is_numeric))
        .map(|p| porter_stemmer::stem(&p.to_lowercase()))
        .filter(|s| !s.is_empty())
        .collect()
}

#[derive(Default)]
struct Collector {
    types: Vec<String>,
    methods: Vec<String>,
    variables: Vec<String>,
    comments: Vec<String>,
}

impl Collector {
    fn into_fields(self) -> CodeFields {
        let idents = |v: Vec<String>| {
            let mut out = TokenList::default();
            for ident in v {
                out.extend(preprocess_identifier(&ident));
            }
            out
        };
        CodeFields {
            type_names: idents(self.types),
            method_names: idents(self.methods),
            variable_names: idents(self.variables),
            comments: preprocess(&self.comments.join("\n")),
        }
    }
}

pub fn extract_fields(source: &str, language: Language) -> CodeFields {
    if source.trim().is_empty() {
        return CodeFields::default();
    }
    let mut parser = Parser::new();
    if parser.set_language(&language.grammar()).is_err() {
        return fallback_fields(source, language);
    }
    let Some(tree) = parser.parse(source, None) else {
        return fallback_fields(source, language);
    };
    let root = tree.root_node();
    if root.has_error() {
        return fallback_fields(source, language);
    }
    let mut out = Collector::default();
    let bytes = source.as_bytes();
    match language {
        Language::Java => walk_java(root, bytes, &mut out),
        Language::Python => walk_python(root, bytes, &mut out),
    }
    out.into_fields()
}

/// Parses the language name first; unknown names are an error.
pub fn extract_fields_named(source: &str, language: &str) -> Result<CodeFields, CodeError> {
    Ok(extract_fields(source, Language::parse(language)?))
}

fn text<'a>(node: Node<'_>, src: &'a [u8]) -> &'a str {
    node.utf8_text(src).unwrap_or_default()
}

fn name_of(node: Node<'_>, src: &[u8]) -> Option<String> {
    node.child_by_field_name("name").map(|n| text(n, src).to_string())
}

fn children(node: Node<'_>) -> Vec<Node<'_>> {
    let mut cursor = node.walk();
    node.children(&mut cursor).collect()
}

fn walk_java(node: Node<'_>, src: &[u8], out: &mut Collector) {
    match node.kind() {
        "class_declaration" | "interface_declaration" | "enum_declaration" | "record_declaration"
        | "annotation_type_declaration" => out.types.extend(name_of(node, src)),
        "method_declaration" | "constructor_declaration" | "annotation_type_element_declaration" => {
            out.methods.extend(name_of(node, src))
        }
        "variable_declarator" | "formal_parameter" | "catch_formal_parameter" | "spread_parameter"
        | "enhanced_for_statement" | "enum_constant" | "resource" => out.variables.extend(name_of(node, src)),
        "line_comment" | "block_comment" => out.comments.push(text(node, src).to_string()),
        "inferred_parameters" => {
            for child in children(node).into_iter().filter(|c| c.kind() == "identifier") {
                out.variables.push(text(child, src).to_string());
            }
        }
        "lambda_expression" => {
            if let Some(p) = node.child_by_field_name("parameters").filter(|p| p.kind() == "identifier") {
                out.variables.push(text(p, src).to_string());
            }
        }
        _ => {}
    }
    for child in children(node) {
        walk_java(child, src, out);
    }
}

fn python_targets(node: Node<'_>, src: &[u8], out: &mut Vec<String>) {
    match node.kind() {
        "identifier" => out.push(text(node, src).to_string()),
        "attribute" => {
            if let Some(attr) = node.child_by_field_name("attribute") {
                out.push(text(attr, src).to_string());
            }
        }
        "pattern_list" | "tuple_pattern" | "list_pattern" | "expression_list" | "list_splat_pattern" => {
            for child in children(node) {
                python_targets(child, src, out);
            }
        }
        _ => {}
    }
}

fn python_docstring(body: Option<Node<'_>>, src: &[u8], out: &mut Collector) {
    let Some(first) = body.and_then(|b| b.named_child(0)) else { return };
    if first.kind() == "expression_statement" {
        if let Some(s) = first.named_child(0).filter(|s| s.kind() == "string") {
            out.comments.push(text(s, src).to_string());
        }
    }
}

fn walk_python(node: Node<'_>, src: &[u8], out: &mut Collector) {
    match node.kind() {
        "module" => python_docstring(Some(node), src, out),
        "class_definition" => {
            out.types.extend(name_of(node, src));
            python_docstring(node.child_by_field_name("body"), src, out);
        }
        "function_definition" => {
            out.methods.extend(name_of(node, src));
            python_docstring(node.child_by_field_name("body"), src, out);
            if let Some(params) = node.child_by_field_name("parameters") {
                for p in children(params) {
                    let ident = match p.kind() {
                        "identifier" => Some(p),
                        "typed_parameter" | "list_splat_pattern" | "dictionary_splat_pattern" => {
                            children(p).into_iter().find(|c| c.kind() == "identifier")
                        }
                        "default_parameter" | "typed_default_parameter" => p.child_by_field_name("name"),
                        _ => None,
                    };
                    if let Some(ident) = ident {
                        let name = text(ident, src);
                        if name != "self" && name != "cls" {
                            out.variables.push(name.to_string());
                        }
                    }
                }
            }
        }
        "assignment" | "augmented_assignment" | "for_statement" | "for_in_clause" => {
            if let Some(left) = node.child_by_field_name("left") {
                python_targets(left, src, &mut out.variables);
            }
        }
        "with_item" | "as_pattern" => {
            if let Some(alias) = node.child_by_field_name("alias") {
                python_targets(alias, src, &mut out.variables);
            }
        }
        "comment" => out.comments.push(text(node, src).to_string()),
        _ => {}
    }
    for child in children(node) {
        walk_python(child, src, out);
    }
}

fn identifier_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[A-Za-z_][A-Za-z0-9_]*").expect("static regex"))
}

/// Total fallback for unparseable files: every non-keyword identifier becomes a variable name.
pub fn fallback_fields(source: &str, language: Language) -> CodeFields {
    let keywords = language.keywords();
    let mut variables = TokenList::default();
    for m in identifier_regex().find_iter(source) {
        let ident = m.as_str();
        if keywords.contains(&ident) {
            continue;
        }
        let tokens = preprocess_identifier(ident);
        // plain English words from comments and strings are filtered like text
        variables.extend(tokens.0.into_iter().filter(|t| !is_stop_word(t)).collect());
    }
    CodeFields { variable_names: variables, ..Default::default() }
}
