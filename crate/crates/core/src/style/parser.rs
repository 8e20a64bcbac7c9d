use std::fmt;

use super::types::{Color, Declaration, Element, Property, Pseudo, Selector, Shape, StyleRule, Value};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StyleErrorKind {
    #[error("expected {expected}, found {found}")]
    Syntax { expected: String, found: String },
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error("invalid value `{value}` for `{property}`: expected {expected}")]
    InvalidValue {
        property: String,
        value: String,
        expected: &'static str,
    },
    #[error("`{property}` is not allowed on `{element}`")]
    PropertyNotAllowed { property: String, element: String },
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("unknown pseudo-class `{0}`")]
    UnknownPseudo(String),
    #[error("invalid class name `{0}`")]
    InvalidClass(String),
    #[error("unterminated comment")]
    UnterminatedComment,
}

/// A stylesheet error at a 1-based line and column (columns count chars).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct StyleError {
    pub line: usize,
    pub column: usize,
    pub kind: StyleErrorKind,
}

impl fmt::Display for StyleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.kind)
    }
}

/// Parses a whole stylesheet; any error rejects all of it.
pub fn parse_stylesheet(text: &str) -> Result<Vec<StyleRule>, StyleError> {
    let mut parser = Parser::new(text)?;
    let mut rules = Vec::new();
    loop {
        parser.skip_ws();
        if parser.peek().is_none() {
            break;
        }
        let source_order = rules.len();
        rules.push(parser.rule(source_order)?);
    }
    Ok(rules)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '-' || c == '_'
}

fn valid_class(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-')
}

fn describe(c: Option<char>) -> String {
    match c {
        None => "end of input".to_string(),
        Some('\n') => "end of line".to_string(),
        Some(c) => format!("`{c}`"),
    }
}

impl Parser {
    /// Comments are blanked out up front (newlines kept) so positions still
    /// point into the original text.
    fn new(text: &str) -> Result<Self, StyleError> {
        let mut chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            if chars[i] == '/' && chars.get(i + 1) == Some(&'*') {
                let start = i;
                let mut end = None;
                let mut j = i + 2;
                while j + 1 < chars.len() {
                    if chars[j] == '*' && chars[j + 1] == '/' {
                        end = Some(j + 2);
                        break;
                    }
                    j += 1;
                }
                let Some(end) = end else {
                    let probe = Parser { chars, pos: start };
                    return Err(probe.error_at(start, StyleErrorKind::UnterminatedComment));
                };
                for c in &mut chars[start..end] {
                    if *c != '\n' {
                        *c = ' ';
                    }
                }
                i = end;
            } else {
                i += 1;
            }
        }
        Ok(Self { chars, pos: 0 })
    }

    fn location(&self, index: usize) -> (usize, usize) {
        let mut line = 1;
        let mut column = 1;
        for &c in &self.chars[..index.min(self.chars.len())] {
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        }
        (line, column)
    }

    fn error_at(&self, index: usize, kind: StyleErrorKind) -> StyleError {
        let (line, column) = self.location(index);
        StyleError { line, column, kind }
    }

    fn expected(&self, what: &str) -> StyleError {
        self.error_at(
            self.pos,
            StyleErrorKind::Syntax {
                expected: what.to_string(),
                found: describe(self.peek()),
            },
        )
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<(usize, String), StyleError> {
        let start = self.pos;
        while self.peek().is_some_and(is_ident_char) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.expected(what));
        }
        Ok((start, self.chars[start..self.pos].iter().collect()))
    }

    fn rule(&mut self, source_order: usize) -> Result<StyleRule, StyleError> {
        let selector = self.selector()?;
        self.skip_ws();
        if !self.eat('{') {
            return Err(self.expected("`{`"));
        }
        let mut declarations: Vec<Declaration> = Vec::new();
        loop {
            self.skip_ws();
            if self.eat('}') {
                break;
            }
            let decl = self.declaration(&selector)?;
            declarations.retain(|d| d.property != decl.property);
            declarations.push(decl);
            self.skip_ws();
            if self.eat(';') {
                continue;
            }
            if self.eat('}') {
                break;
            }
            return Err(self.expected("`;` or `}`"));
        }
        Ok(StyleRule {
            selector,
            declarations,
            source_order,
        })
    }

    fn selector(&mut self) -> Result<Selector, StyleError> {
        let (start, name) = self.ident("a selector (`graph`, `node` or `edge`)")?;
        let element: Element = name
            .parse()
            .map_err(|_| self.error_at(start, StyleErrorKind::UnknownElement(name.clone())))?;
        let mut classes: Vec<String> = Vec::new();
        while self.eat('.') {
            let (start, class) = self.ident("a class name")?;
            if !valid_class(&class) {
                return Err(self.error_at(start, StyleErrorKind::InvalidClass(class)));
            }
            if !classes.contains(&class) {
                classes.push(class);
            }
        }
        let mut pseudo = None;
        if self.eat(':') {
            let (start, name) = self.ident("a pseudo-class")?;
            if name != "clicked" {
                return Err(self.error_at(start, StyleErrorKind::UnknownPseudo(name)));
            }
            pseudo = Some(Pseudo::Clicked);
        }
        Ok(Selector {
            element,
            classes,
            pseudo,
        })
    }

    fn declaration(&mut self, selector: &Selector) -> Result<Declaration, StyleError> {
        let (start, name) = self.ident("a property name or `}`")?;
        let property: Property = name
            .parse()
            .map_err(|_| self.error_at(start, StyleErrorKind::UnknownProperty(name.clone())))?;
        if property == Property::Background && selector.element != Element::Graph {
            return Err(self.error_at(
                start,
                StyleErrorKind::PropertyNotAllowed {
                    property: name,
                    element: selector.element.as_str().to_string(),
                },
            ));
        }
        self.skip_ws();
        if !self.eat(':') {
            return Err(self.expected("`:`"));
        }
        self.skip_ws();
        let value_start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c != ';' && c != '}' && c != '{' && c != '\n')
        {
            self.pos += 1;
        }
        let raw: String = self.chars[value_start..self.pos].iter().collect();
        let raw = raw.trim_end().to_string();
        if raw.is_empty() {
            self.pos = value_start;
            return Err(self.expected("a value"));
        }
        let value = parse_value(property, &raw).map_err(|expected| {
            self.error_at(
                value_start,
                StyleErrorKind::InvalidValue {
                    property: property.as_str().to_string(),
                    value: raw.clone(),
                    expected,
                },
            )
        })?;
        Ok(Declaration { property, value })
    }
}

fn parse_px(raw: &str) -> Option<f64> {
    let number = raw.strip_suffix("px")?;
    let mut parts = number.splitn(2, '.');
    let whole = parts.next()?;
    let frac = parts.next();
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !digits(whole) || frac.is_some_and(|f| !digits(f)) {
        return None;
    }
    number.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_value(property: Property, raw: &str) -> Result<Value, &'static str> {
    match property {
        Property::FillColor | Property::StrokeColor | Property::Background => {
            Color::parse_hex(raw).map(Value::Color).ok_or("a `#RRGGBB` color")
        }
        Property::Size | Property::StrokeWidth => parse_px(raw).map(Value::Px).ok_or("a length like `12px`"),
        Property::Shape => match raw {
            "circle" => Ok(Value::Shape(Shape::Circle)),
            "box" => Ok(Value::Shape(Shape::Box)),
            "icon" => Ok(Value::Shape(Shape::Icon)),
            _ => Err("`circle`, `box` or `icon`"),
        },
        Property::Icon => {
            if !raw.is_empty() && raw.chars().all(is_ident_char) {
                Ok(Value::Name(raw.to_string()))
            } else {
                Err("an icon name")
            }
        }
        Property::LabelVisible => match raw {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => Err("`true` or `false`"),
        },
    }
}
