//! Text format for dual graph models.
//!
//! ```text
//! model {
//!   m = 2
//!   vertex E1 { genus = 1 }
//!   vertex R { genus = 0; mult = 2 }
//!   edge E1 -- R
//!   mark P on R coeff 1 at x   # marks sharing a label sit at one point
//! }
//! ```
//!
//! Statements are separated by `;` or line breaks.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::model::{ComponentId, DualGraphModel, PointId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParseErrors(pub Vec<ParseError>);

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}: {}", e.span, e.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseErrors {}

/// A parsed model together with where each named item was declared.
#[derive(Clone, Debug)]
pub struct ModelDocument {
    pub source: String,
    pub model: DualGraphModel,
    pub locations: BTreeMap<String, Span>,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    LBrace,
    RBrace,
    Semi,
    Eq,
    Dash,
    Newline,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Dash => f.write_str("`--`"),
            Tok::Newline => f.write_str("end of line"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let span = Span { line, column };
        match c {
            '\n' => {
                chars.next();
                out.push((Tok::Newline, span));
                line += 1;
                column = 1;
                continue;
            }
            '#' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    chars.next();
                }
                continue;
            }
            c if c.is_whitespace() => {
                chars.next();
                column += 1;
                continue;
            }
            '{' | '}' | ';' | '=' => {
                chars.next();
                column += 1;
                out.push((
                    match c {
                        '{' => Tok::LBrace,
                        '}' => Tok::RBrace,
                        ';' => Tok::Semi,
                        _ => Tok::Eq,
                    },
                    span,
                ));
            }
            '-' => {
                chars.next();
                column += 1;
                if chars.peek() == Some(&'-') {
                    chars.next();
                    column += 1;
                    out.push((Tok::Dash, span));
                } else {
                    return Err(ParseError { span, message: "expected `--`".into() });
                }
            }
            c if c.is_ascii_digit() => {
                let mut digits = String::new();
                while let Some(&d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    digits.push(d);
                    chars.next();
                    column += 1;
                }
                let value = digits
                    .parse()
                    .map_err(|_| ParseError { span, message: format!("integer `{digits}` out of range") })?;
                out.push((Tok::Int(value), span));
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut ident = String::new();
                while let Some(&d) = chars.peek().filter(|d| d.is_alphanumeric() || **d == '_' || **d == '.' || **d == '\'') {
                    ident.push(d);
                    chars.next();
                    column += 1;
                }
                out.push((Tok::Ident(ident), span));
            }
            other => {
                return Err(ParseError { span, message: format!("unexpected character `{other}`") });
            }
        }
    }
    out.push((Tok::Eof, Span { line, column }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn skip_newlines(&mut self) {
        while *self.peek() == Tok::Newline {
            self.bump();
        }
    }

    fn skip_separators(&mut self) {
        while matches!(self.peek(), Tok::Newline | Tok::Semi) {
            self.bump();
        }
    }

    fn fail<T>(&self, expected: &str) -> PResult<T> {
        Err(ParseError { span: self.span(), message: format!("expected {expected}, found {}", self.peek()) })
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        self.skip_newlines();
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            self.fail(&tok.to_string())
        }
    }

    fn keyword(&mut self, word: &str) -> PResult<Span> {
        self.skip_newlines();
        match self.peek() {
            Tok::Ident(s) if s == word => Ok(self.bump().1),
            _ => self.fail(&format!("`{word}`")),
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Span)> {
        self.skip_newlines();
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.bump().1;
                Ok((s, span))
            }
            _ => self.fail(what),
        }
    }

    fn int(&mut self, what: &str) -> PResult<(u32, Span)> {
        self.skip_newlines();
        match self.peek().clone() {
            Tok::Int(n) => {
                let span = self.bump().1;
                let v = u32::try_from(n)
                    .map_err(|_| ParseError { span, message: format!("{what} {n} out of range") })?;
                Ok((v, span))
            }
            _ => self.fail(what),
        }
    }
}

struct Builder {
    model: DualGraphModel,
    locations: BTreeMap<String, Span>,
    points: HashMap<(ComponentId, String), PointId>,
    errors: Vec<ParseError>,
}

impl Builder {
    fn declare(&mut self, name: &str, span: Span) -> bool {
        if let Some(first) = self.locations.get(name) {
            self.errors.push(ParseError {
                span,
                message: format!("duplicate id `{name}` (first declared at {first})"),
            });
            return false;
        }
        self.locations.insert(name.to_string(), span);
        true
    }

    fn vertex(&mut self, name: &str, span: Span) -> Option<ComponentId> {
        let found = self.model.component_by_name(name);
        if found.is_none() {
            self.errors.push(ParseError { span, message: format!("unknown vertex `{name}`") });
        }
        found
    }
}

fn parse_vertex(p: &mut Parser, b: &mut Builder) -> PResult<()> {
    let (name, span) = p.ident("vertex id")?;
    p.expect(Tok::LBrace)?;
    let mut genus = None;
    let mut mult = None;
    loop {
        p.skip_separators();
        if *p.peek() == Tok::RBrace {
            p.bump();
            break;
        }
        let (field, fspan) = p.ident("`genus`, `mult` or `}`")?;
        p.expect(Tok::Eq)?;
        let slot = match field.as_str() {
            "genus" => &mut genus,
            "mult" => &mut mult,
            _ => return Err(ParseError { span: fspan, message: format!("unknown vertex field `{field}`") }),
        };
        let (v, vspan) = p.int(&field)?;
        if slot.replace(v).is_some() {
            return Err(ParseError { span: vspan, message: format!("`{field}` given twice") });
        }
    }
    let Some(genus) = genus else {
        return Err(ParseError { span, message: format!("vertex `{name}` has no genus") });
    };
    let mult = mult.unwrap_or(1);
    if mult == 0 {
        b.errors.push(ParseError { span, message: format!("vertex `{name}` has multiplicity 0") });
    }
    if b.declare(&name, span) {
        b.model.add_component(name, genus, mult);
    }
    Ok(())
}

fn parse_edge(p: &mut Parser, b: &mut Builder, span: Span) -> PResult<()> {
    let named = matches!(p.peek_at(1), Tok::Ident(_));
    let id = if named { Some(p.ident("edge id")?) } else { None };
    let (a, aspan) = p.ident("vertex id")?;
    p.expect(Tok::Dash)?;
    let (c, cspan) = p.ident("vertex id")?;
    if a == c {
        b.errors.push(ParseError { span: aspan, message: format!("loop forbidden: edge from `{a}` to itself") });
        return Ok(());
    }
    let ends = (b.vertex(&a, aspan), b.vertex(&c, cspan));
    if let Some((name, _)) = &id {
        if !b.declare(name, span) {
            return Ok(());
        }
    }
    if let (Some(x), Some(y)) = ends {
        let e = b.model.add_edge(id.map(|(n, _)| n), x, y).expect("ends exist");
        let name = b.model.edge_name(e);
        b.locations.entry(name).or_insert(span);
    }
    Ok(())
}

fn parse_mark(p: &mut Parser, b: &mut Builder) -> PResult<()> {
    let (name, span) = p.ident("mark id")?;
    p.keyword("on")?;
    let (host, hspan) = p.ident("vertex id")?;
    p.keyword("coeff")?;
    let (coeff, _) = p.int("coefficient")?;
    let label = if matches!(p.peek(), Tok::Ident(s) if s == "at") {
        p.bump();
        Some(p.ident("point label")?.0)
    } else {
        None
    };
    let host = b.vertex(&host, hspan);
    if !b.declare(&name, span) {
        return Ok(());
    }
    if let Some(host) = host {
        match label {
            Some(label) => {
                let point = match b.points.get(&(host, label.clone())) {
                    Some(&pt) => pt,
                    None => {
                        let pt = b.model.fresh_point();
                        b.points.insert((host, label), pt);
                        pt
                    }
                };
                b.model.add_mark_at(name, host, coeff, point).expect("host exists");
            }
            None => {
                b.model.add_mark(name, host, coeff).expect("host exists");
            }
        }
    }
    Ok(())
}

fn parse_document(p: &mut Parser, b: &mut Builder) -> PResult<()> {
    p.keyword("model")?;
    p.expect(Tok::LBrace)?;
    p.skip_separators();
    p.keyword("m")?;
    p.expect(Tok::Eq)?;
    let (m, _) = p.int("m")?;
    b.model = DualGraphModel::new(m);
    loop {
        p.skip_separators();
        let (tok, span) = (p.peek().clone(), p.span());
        match tok {
            Tok::RBrace => {
                p.bump();
                break;
            }
            Tok::Ident(word) if word == "vertex" => {
                p.bump();
                parse_vertex(p, b)?;
            }
            Tok::Ident(word) if word == "edge" => {
                p.bump();
                parse_edge(p, b, span)?;
            }
            Tok::Ident(word) if word == "mark" => {
                p.bump();
                parse_mark(p, b)?;
            }
            _ => return p.fail("`vertex`, `edge`, `mark` or `}`"),
        }
        if !matches!(p.peek(), Tok::Semi | Tok::Newline | Tok::RBrace) {
            return p.fail("`;` or end of line");
        }
    }
    p.skip_separators();
    if *p.peek() != Tok::Eof {
        return p.fail("end of input");
    }
    Ok(())
}

/// Parses a model. Structural validation is left to [`crate::model::validate`].
pub fn parse_model(text: &str) -> Result<ModelDocument, ParseErrors> {
    let toks = lex(text).map_err(|e| ParseErrors(vec![e]))?;
    let mut parser = Parser { toks, pos: 0 };
    let mut builder = Builder {
        model: DualGraphModel::new(0),
        locations: BTreeMap::new(),
        points: HashMap::new(),
        errors: Vec::new(),
    };
    if let Err(e) = parse_document(&mut parser, &mut builder) {
        builder.errors.push(e);
    }
    if !builder.errors.is_empty() {
        builder.errors.sort_by_key(|e| e.span);
        return Err(ParseErrors(builder.errors));
    }
    Ok(ModelDocument { source: text.to_string(), model: builder.model, locations: builder.locations })
}

/// Writes a model in the text format. Marks sharing a point get a common `at` label.
pub fn emit_model(model: &DualGraphModel) -> String {
    let mut out = format!("model {{\n  m = {}\n", model.m());
    for c in model.components() {
        if c.multiplicity == 1 {
            out.push_str(&format!("  vertex {} {{ genus = {} }}\n", c.name, c.genus));
        } else {
            out.push_str(&format!("  vertex {} {{ genus = {}; mult = {} }}\n", c.name, c.genus, c.multiplicity));
        }
    }
    for e in model.edges() {
        out.push_str(&format!(
            "  edge {} {} -- {}\n",
            e.name,
            model.component_name(e.ends.0),
            model.component_name(e.ends.1)
        ));
    }
    // labels are numbered in output order so that emitting is stable under reparsing
    let mut label = 0;
    for c in model.components() {
        for group in model.mark_groups(c.id).values() {
            for k in group.iter() {
                out.push_str(&format!("  mark {} on {} coeff {}", k.name, c.name, k.coefficient));
                if group.len() > 1 {
                    out.push_str(&format!(" at p{label}"));
                }
                out.push('\n');
            }
            if group.len() > 1 {
                label += 1;
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::is_isomorphic;

    #[test]
    fn dumbbell_one_line() {
        let doc = parse_model("model { m = 2; vertex E1 { genus = 1 }; vertex E2 { genus = 1 }; edge E1 -- E2 }").unwrap();
        assert_eq!(doc.model.component_count(), 2);
        assert_eq!(doc.model.edge_count(), 1);
        assert_eq!(doc.model.edges().next().unwrap().name, "e0");
    }

    #[test]
    fn mark_has_coefficient() {
        let doc = parse_model("model {\n m = 2\n vertex E1 { genus = 1 }\n mark P1 on E1 coeff 1\n}").unwrap();
        let k = doc.model.marks().next().unwrap();
        assert_eq!((k.name.as_str(), k.coefficient), ("P1", 1));
    }

    #[test]
    fn loop_is_located() {
        let err = parse_model("model {\n  m = 2\n  vertex E1 { genus = 1 }\n  edge E1 -- E1\n}").unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert!(err.0[0].message.contains("loop forbidden"));
        assert_eq!(err.0[0].span, Span { line: 4, column: 8 });
    }

    #[test]
    fn unknown_and_duplicate_ids() {
        let err = parse_model("model { m = 2; vertex A { genus = 1 }; vertex A { genus = 2 }; edge A -- B }").unwrap_err();
        let text = err.to_string();
        assert!(text.contains("duplicate id `A`"), "{text}");
        assert!(text.contains("unknown vertex `B`"), "{text}");
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_model("model { m = 2\n vertex A { genus 1 } }").unwrap_err();
        assert_eq!(err.0[0].span, Span { line: 2, column: 19 });
        assert!(parse_model("model { m = 99999999999 }").is_err());
        assert!(parse_model("model { m = 2 } trailing").is_err());
    }

    #[test]
    fn comments_and_named_edges() {
        let doc = parse_model("# header\nmodel { m = 3 # inline\n vertex A { genus = 2 ; mult = 1 }\n vertex B { genus = 0; mult = 2 }\n edge n1 A -- B\n edge A -- B }").unwrap();
        let names: Vec<_> = doc.model.edges().map(|e| e.name.clone()).collect();
        assert_eq!(names, ["n1", "e1"]);
        assert_eq!(doc.locations["n1"], Span { line: 5, column: 2 });
    }

    #[test]
    fn merge_groups_round_trip() {
        let text = "model { m = 3; vertex A { genus = 0 }; vertex B { genus = 2 }; edge A -- B\n mark P on A coeff 1 at x\n mark Q on A coeff 1 at x\n mark R on A coeff 2 }";
        let doc = parse_model(text).unwrap();
        let a = doc.model.component_by_name("A").unwrap();
        assert_eq!(doc.model.mark_groups(a).len(), 2);
        let again = parse_model(&emit_model(&doc.model)).unwrap();
        assert!(is_isomorphic(&doc.model, &again.model));
        assert_eq!(emit_model(&again.model), emit_model(&doc.model));
    }
}
