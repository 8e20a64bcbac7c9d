//! A small CSS subset for graph styling.
//!
//! ```text
//! stylesheet  := rule*
//! rule        := selector '{' declaration (';' declaration)* ';'? '}'
//! selector    := ('graph' | 'node' | 'edge') ('.' class)* (':clicked')?
//! declaration := property ':' value
//! ```
//!
//! Rules apply in ascending (pseudo, class count, element) specificity, ties
//! broken by source order; later rules override earlier ones.

mod parser;
mod print;
mod types;

pub use parser::{parse_stylesheet, StyleError, StyleErrorKind};
pub use print::print_stylesheet;
pub use types::{Color, ComputedStyle, Declaration, Element, Property, Pseudo, Selector, Shape, StyleRule, Value};

/// The theme shipped with the crate.
pub const DEFAULT_STYLESHEET: &str = include_str!("../../data/plexus.css");

/// Parsed [`DEFAULT_STYLESHEET`].
pub fn default_theme() -> Vec<StyleRule> {
    parse_stylesheet(DEFAULT_STYLESHEET).expect("bundled stylesheet is valid")
}

/// (pseudo matched, number of classes, element matched).
type Specificity = (u8, usize, u8);

impl Selector {
    pub fn specificity(&self) -> Specificity {
        (u8::from(self.pseudo.is_some()), self.classes.len(), 1)
    }

    pub fn matches<S: AsRef<str>>(&self, element: Element, classes: &[S], clicked: bool) -> bool {
        self.element == element
            && self
                .classes
                .iter()
                .all(|c| classes.iter().any(|have| have.as_ref() == c))
            && match self.pseudo {
                None => true,
                Some(Pseudo::Clicked) => clicked,
            }
    }
}

/// Cascades `rules` over the built-in defaults for one element.
pub fn resolve_style<S: AsRef<str>>(
    rules: &[StyleRule],
    element: Element,
    classes: &[S],
    clicked: bool,
) -> ComputedStyle {
    let mut matching: Vec<&StyleRule> = rules
        .iter()
        .filter(|r| r.selector.matches(element, classes, clicked))
        .collect();
    matching.sort_by_key(|r| (r.selector.specificity(), r.source_order));

    let mut style = ComputedStyle::default();
    for rule in matching {
        for decl in &rule.declarations {
            style.apply(decl);
        }
    }
    style
}
