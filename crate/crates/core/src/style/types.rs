use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Element {
    Graph,
    Node,
    Edge,
}

impl Element {
    pub fn as_str(self) -> &'static str {
        match self {
            Element::Graph => "graph",
            Element::Node => "node",
            Element::Edge => "edge",
        }
    }
}

impl FromStr for Element {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "graph" => Ok(Element::Graph),
            "node" => Ok(Element::Node),
            "edge" => Ok(Element::Edge),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pseudo {
    Clicked,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selector {
    pub element: Element,
    /// Class names in source order, without repeats.
    pub classes: Vec<String>,
    pub pseudo: Option<Pseudo>,
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.element.as_str())?;
        for class in &self.classes {
            write!(f, ".{class}")?;
        }
        if let Some(Pseudo::Clicked) = self.pseudo {
            f.write_str(":clicked")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Property {
    FillColor,
    Size,
    Shape,
    Icon,
    StrokeColor,
    StrokeWidth,
    LabelVisible,
    Background,
}

impl Property {
    pub const ALL: [Property; 8] = [
        Property::FillColor,
        Property::Size,
        Property::Shape,
        Property::Icon,
        Property::StrokeColor,
        Property::StrokeWidth,
        Property::LabelVisible,
        Property::Background,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Property::FillColor => "fill-color",
            Property::Size => "size",
            Property::Shape => "shape",
            Property::Icon => "icon",
            Property::StrokeColor => "stroke-color",
            Property::StrokeWidth => "stroke-width",
            Property::LabelVisible => "label-visible",
            Property::Background => "background",
        }
    }
}

impl FromStr for Property {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Property::ALL.into_iter().find(|p| p.as_str() == s).ok_or(())
    }
}

/// A 24-bit RGB color, written `#RRGGBB`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Color(pub [u8; 3]);

impl Color {
    pub fn parse_hex(text: &str) -> Option<Color> {
        let hex = text.strip_prefix('#')?;
        if hex.len() != 6 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return None;
        }
        let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).ok();
        Some(Color([byte(0)?, byte(2)?, byte(4)?]))
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [r, g, b] = self.0;
        write!(f, "#{r:02X}{g:02X}{b:02X}")
    }
}

impl Serialize for Color {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Color {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Color::parse_hex(&text).ok_or_else(|| serde::de::Error::custom(format!("bad color `{text}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Circle,
    Box,
    Icon,
}

impl Shape {
    pub fn as_str(self) -> &'static str {
        match self {
            Shape::Circle => "circle",
            Shape::Box => "box",
            Shape::Icon => "icon",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Color(Color),
    Px(f64),
    Shape(Shape),
    Name(String),
    Bool(bool),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Color(c) => write!(f, "{c}"),
            Value::Px(px) => write!(f, "{px}px"),
            Value::Shape(s) => f.write_str(s.as_str()),
            Value::Name(n) => f.write_str(n),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Declaration {
    pub property: Property,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StyleRule {
    pub selector: Selector,
    pub declarations: Vec<Declaration>,
    pub source_order: usize,
}

/// Fully resolved appearance of one element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ComputedStyle {
    pub fill_color: Color,
    pub size: f64,
    pub shape: Shape,
    pub icon: Option<String>,
    pub stroke_color: Color,
    pub stroke_width: f64,
    pub label_visible: bool,
    pub background: Color,
}

impl Default for ComputedStyle {
    fn default() -> Self {
        Self {
            fill_color: Color([0x86, 0x8E, 0x96]),
            size: 10.0,
            shape: Shape::Circle,
            icon: None,
            stroke_color: Color([0x34, 0x3A, 0x40]),
            stroke_width: 1.0,
            label_visible: false,
            background: Color([0xFF, 0xFF, 0xFF]),
        }
    }
}

impl ComputedStyle {
    /// Overwrites the field named by `decl`. Values are type-checked at parse
    /// time, so a mismatched pair cannot reach here from parsed rules.
    pub fn apply(&mut self, decl: &Declaration) {
        match (decl.property, &decl.value) {
            (Property::FillColor, Value::Color(c)) => self.fill_color = *c,
            (Property::Size, Value::Px(px)) => self.size = *px,
            (Property::Shape, Value::Shape(s)) => self.shape = *s,
            (Property::Icon, Value::Name(n)) => self.icon = Some(n.clone()),
            (Property::StrokeColor, Value::Color(c)) => self.stroke_color = *c,
            (Property::StrokeWidth, Value::Px(px)) => self.stroke_width = *px,
            (Property::LabelVisible, Value::Bool(b)) => self.label_visible = *b,
            (Property::Background, Value::Color(c)) => self.background = *c,
            (property, value) => {
                log::warn!("ignoring ill-typed declaration {}: {value}", property.as_str());
            }
        }
    }
}
