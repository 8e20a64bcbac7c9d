use std::fmt::Write;

use super::types::StyleRule;

/// Canonical text for `rules`: one rule per line, every declaration
/// terminated by `;`, colors upper-case.
pub fn print_stylesheet(rules: &[StyleRule]) -> String {
    let mut out = String::new();
    for rule in rules {
        write!(out, "{} {{", rule.selector).unwrap();
        for decl in &rule.declarations {
            write!(out, " {}: {};", decl.property.as_str(), decl.value).unwrap();
        }
        out.push_str(" }\n");
    }
    out
}
