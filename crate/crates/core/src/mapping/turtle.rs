//! A Turtle subset sufficient for RML documents: `@prefix`/`PREFIX`,
//! IRIs, prefixed names, `a`, predicate and object lists, labelled and
//! anonymous blank nodes with property lists, and single-line literals.
//! Collections, `@base`, long strings and language tags are rejected.

use std::collections::BTreeMap;
use std::iter::Peekable;
use std::str::Chars;

use super::MappingError;
use crate::term::vocab;

const MAX_NESTING: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Iri(String),
    /// Labelled blank nodes keep their label; anonymous ones get `#{n}`,
    /// which no label can spell.
    Blank(String),
    Literal {
        lexical: String,
        datatype: Option<String>,
    },
}

impl Node {
    pub fn describe(&self) -> String {
        match self {
            Node::Iri(i) => format!("<{i}>"),
            Node::Blank(b) => format!("_:{b}"),
            Node::Literal { lexical, .. } => format!("{lexical:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub subject: Node,
    pub predicate: String,
    pub object: Node,
    /// Position of the predicate token.
    pub pos: Pos,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Document {
    pub prefixes: BTreeMap<String, String>,
    pub statements: Vec<Statement>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    IriRef(String),
    PName { prefix: String, local: String },
    BlankLabel(String),
    Str(String),
    Number(String, &'static str),
    Bool(bool),
    PrefixDirective,
    SparqlPrefix,
    BaseDirective,
    LangTag(String),
    Caret2,
    Dot,
    Semi,
    Comma,
    LBracket,
    RBracket,
    LParen,
    RParen,
    A,
    Eof,
}

struct Lexer<'a> {
    chars: Peekable<Chars<'a>>,
    line: usize,
    col: usize,
}

fn syntax(pos: Pos, message: impl Into<String>) -> MappingError {
    MappingError::Syntax {
        line: pos.line,
        col: pos.col,
        message: message.into(),
    }
}

fn unsupported(pos: Pos, construct: impl Into<String>) -> MappingError {
    MappingError::Unsupported {
        line: pos.line,
        col: pos.col,
        construct: construct.into(),
    }
}

fn is_pn_chars_base(c: char) -> bool {
    c.is_ascii_alphabetic() || (!c.is_ascii() && c.is_alphanumeric())
}

fn is_pn_chars(c: char) -> bool {
    is_pn_chars_base(c) || c.is_ascii_digit() || c == '_' || c == '-'
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            chars: src.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Result<(Tok, Pos), MappingError> {
        self.skip_trivia();
        let pos = self.pos();
        let Some(c) = self.peek() else {
            return Ok((Tok::Eof, pos));
        };
        let tok = match c {
            '<' => {
                self.bump();
                Tok::IriRef(self.iri_body(pos)?)
            }
            '"' | '\'' => Tok::Str(self.string(pos)?),
            '.' => {
                self.bump();
                if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    let mut s = String::from("0.");
                    return self.number_rest(&mut s, pos, true).map(|t| (t, pos));
                }
                Tok::Dot
            }
            ';' => {
                self.bump();
                Tok::Semi
            }
            ',' => {
                self.bump();
                Tok::Comma
            }
            '[' => {
                self.bump();
                Tok::LBracket
            }
            ']' => {
                self.bump();
                Tok::RBracket
            }
            '(' => {
                self.bump();
                Tok::LParen
            }
            ')' => {
                self.bump();
                Tok::RParen
            }
            '^' => {
                self.bump();
                if self.bump() != Some('^') {
                    return Err(syntax(pos, "expected '^^'"));
                }
                Tok::Caret2
            }
            '@' => {
                self.bump();
                let word = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
                match word.as_str() {
                    "prefix" => Tok::PrefixDirective,
                    "base" => Tok::BaseDirective,
                    "" => return Err(syntax(pos, "expected directive or language tag after '@'")),
                    _ => Tok::LangTag(word),
                }
            }
            '_' => {
                self.bump();
                if self.bump() != Some(':') {
                    return Err(syntax(pos, "expected ':' after '_' in blank node label"));
                }
                let label = self.take_name();
                if label.is_empty() {
                    return Err(syntax(pos, "empty blank node label"));
                }
                Tok::BlankLabel(label)
            }
            '+' | '-' | '0'..='9' => {
                let mut s = String::new();
                if c == '+' || c == '-' {
                    s.push(c);
                    self.bump();
                }
                self.number_rest(&mut s, pos, false)?
            }
            ':' => {
                self.bump();
                Tok::PName {
                    prefix: String::new(),
                    local: self.take_local(),
                }
            }
            c if is_pn_chars_base(c) => {
                let word = self.take_name();
                if self.peek() == Some(':') {
                    self.bump();
                    Tok::PName {
                        prefix: word,
                        local: self.take_local(),
                    }
                } else {
                    match word.as_str() {
                        "a" => Tok::A,
                        "true" => Tok::Bool(true),
                        "false" => Tok::Bool(false),
                        w if w.eq_ignore_ascii_case("prefix") => Tok::SparqlPrefix,
                        w if w.eq_ignore_ascii_case("base") => Tok::BaseDirective,
                        _ => return Err(syntax(pos, format!("unexpected bare word '{word}'"))),
                    }
                }
            }
            other => return Err(syntax(pos, format!("unexpected character {other:?}"))),
        };
        Ok((tok, pos))
    }

    fn take_while(&mut self, mut f: impl FnMut(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if !f(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    /// Names may contain '.' but not end with one; a trailing '.' is left
    /// for the statement terminator.
    fn take_dotted(&mut self, allowed: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        loop {
            match self.peek() {
                Some('.') => {
                    let mut ahead = self.chars.clone();
                    ahead.next();
                    match ahead.peek() {
                        Some(&n) if allowed(n) || n == '.' => {
                            s.push('.');
                            self.bump();
                        }
                        _ => break,
                    }
                }
                Some(c) if allowed(c) => {
                    s.push(c);
                    self.bump();
                }
                _ => break,
            }
        }
        s
    }

    fn take_name(&mut self) -> String {
        self.take_dotted(is_pn_chars)
    }

    fn take_local(&mut self) -> String {
        self.take_dotted(|c| is_pn_chars(c) || c == ':' || c == '%')
    }

    fn number_rest(&mut self, s: &mut String, pos: Pos, mut seen_dot: bool) -> Result<Tok, MappingError> {
        let mut seen_exp = false;
        s.push_str(&self.take_while(|c| c.is_ascii_digit()));
        if !seen_dot && self.peek() == Some('.') {
            let mut ahead = self.chars.clone();
            ahead.next();
            if ahead.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
                s.push('.');
                seen_dot = true;
                s.push_str(&self.take_while(|c| c.is_ascii_digit()));
            }
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            seen_exp = true;
            s.push('e');
            self.bump();
            if let Some(sign @ ('+' | '-')) = self.peek() {
                s.push(sign);
                self.bump();
            }
            let exp = self.take_while(|c| c.is_ascii_digit());
            if exp.is_empty() {
                return Err(syntax(pos, "malformed exponent"));
            }
            s.push_str(&exp);
        }
        if !s.chars().any(|c| c.is_ascii_digit()) {
            return Err(syntax(pos, "malformed number"));
        }
        let dt = if seen_exp {
            vocab::XSD_DOUBLE
        } else if seen_dot {
            vocab::XSD_DECIMAL
        } else {
            vocab::XSD_INTEGER
        };
        Ok(Tok::Number(std::mem::take(s), dt))
    }

    fn uchar(&mut self, len: usize, pos: Pos) -> Result<char, MappingError> {
        let mut hex = String::with_capacity(len);
        for _ in 0..len {
            match self.bump() {
                Some(c) if c.is_ascii_hexdigit() => hex.push(c),
                _ => return Err(syntax(pos, "malformed unicode escape")),
            }
        }
        u32::from_str_radix(&hex, 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(|| syntax(pos, format!("invalid code point U+{hex}")))
    }

    fn iri_body(&mut self, pos: Pos) -> Result<String, MappingError> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(syntax(pos, "unterminated IRI")),
                Some('>') => return Ok(s),
                Some('\\') => match self.bump() {
                    Some('u') => s.push(self.uchar(4, pos)?),
                    Some('U') => s.push(self.uchar(8, pos)?),
                    _ => return Err(syntax(pos, "invalid escape in IRI")),
                },
                Some(c) if c <= ' ' || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') => {
                    return Err(syntax(pos, format!("character {c:?} not allowed in IRI")));
                }
                Some(c) => s.push(c),
            }
        }
    }

    fn string(&mut self, pos: Pos) -> Result<String, MappingError> {
        let quote = self.bump().expect("caller peeked a quote");
        let mut ahead = self.chars.clone();
        if ahead.next() == Some(quote) && ahead.next() == Some(quote) {
            return Err(unsupported(pos, "long (triple-quoted) string literal"));
        }
        let mut s = String::new();
        loop {
            match self.bump() {
                None | Some('\n') | Some('\r') => return Err(syntax(pos, "unterminated string literal")),
                Some(c) if c == quote => return Ok(s),
                Some('\\') => {
                    let e = match self.bump() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.uchar(4, pos)?,
                        Some('U') => self.uchar(8, pos)?,
                        _ => return Err(syntax(pos, "invalid escape in string literal")),
                    };
                    s.push(e);
                }
                Some(c) => s.push(c),
            }
        }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    pos: Pos,
    doc: Document,
    anon: usize,
    depth: usize,
}

/// Parses a document in the supported Turtle subset into flat statements.
pub fn parse_document(src: &str) -> Result<Document, MappingError> {
    let mut lexer = Lexer::new(src);
    let (tok, pos) = lexer.next_token()?;
    let mut p = Parser {
        lexer,
        tok,
        pos,
        doc: Document::default(),
        anon: 0,
        depth: 0,
    };
    while p.tok != Tok::Eof {
        p.statement()?;
    }
    Ok(p.doc)
}

impl Parser<'_> {
    fn advance(&mut self) -> Result<Tok, MappingError> {
        let (tok, pos) = self.lexer.next_token()?;
        self.pos = pos;
        Ok(std::mem::replace(&mut self.tok, tok))
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), MappingError> {
        if self.tok == want {
            self.advance()?;
            Ok(())
        } else {
            Err(syntax(self.pos, format!("expected {what}, found {}", describe(&self.tok))))
        }
    }

    fn statement(&mut self) -> Result<(), MappingError> {
        match self.tok {
            Tok::PrefixDirective => {
                self.advance()?;
                self.prefix_decl()?;
                self.expect(Tok::Dot, "'.' after @prefix")
            }
            Tok::SparqlPrefix => {
                self.advance()?;
                self.prefix_decl()
            }
            Tok::BaseDirective => Err(unsupported(self.pos, "base IRI directive")),
            _ => {
                self.triples()?;
                self.expect(Tok::Dot, "'.' at end of statement")
            }
        }
    }

    fn prefix_decl(&mut self) -> Result<(), MappingError> {
        let pos = self.pos;
        let prefix = match self.advance()? {
            Tok::PName { prefix, local } if local.is_empty() => prefix,
            other => return Err(syntax(pos, format!("expected prefix name, found {}", describe(&other)))),
        };
        let pos = self.pos;
        let iri = match self.advance()? {
            Tok::IriRef(i) => i,
            other => return Err(syntax(pos, format!("expected IRI, found {}", describe(&other)))),
        };
        self.doc.prefixes.insert(prefix, iri);
        Ok(())
    }

    fn triples(&mut self) -> Result<(), MappingError> {
        if self.tok == Tok::LBracket {
            let subject = self.blank_property_list()?;
            if !matches!(self.tok, Tok::Dot) {
                self.predicate_object_list(&subject)?;
            }
            return Ok(());
        }
        let subject = self.subject()?;
        self.predicate_object_list(&subject)
    }

    fn subject(&mut self) -> Result<Node, MappingError> {
        let pos = self.pos;
        match self.advance()? {
            Tok::IriRef(i) => Ok(Node::Iri(i)),
            Tok::PName { prefix, local } => Ok(Node::Iri(self.expand(&prefix, &local, pos)?)),
            Tok::BlankLabel(l) => Ok(Node::Blank(l)),
            Tok::LParen => Err(unsupported(pos, "RDF collection")),
            other => Err(syntax(pos, format!("expected subject, found {}", describe(&other)))),
        }
    }

    fn expand(&self, prefix: &str, local: &str, pos: Pos) -> Result<String, MappingError> {
        match self.doc.prefixes.get(prefix) {
            Some(ns) => Ok(format!("{ns}{local}")),
            None => Err(MappingError::UndeclaredPrefix {
                line: pos.line,
                col: pos.col,
                prefix: prefix.to_owned(),
            }),
        }
    }

    fn predicate_object_list(&mut self, subject: &Node) -> Result<(), MappingError> {
        loop {
            let pos = self.pos;
            let predicate = match self.advance()? {
                Tok::A => vocab::RDF_TYPE.to_owned(),
                Tok::IriRef(i) => i,
                Tok::PName { prefix, local } => self.expand(&prefix, &local, pos)?,
                other => return Err(syntax(pos, format!("expected predicate, found {}", describe(&other)))),
            };
            loop {
                let object = self.object()?;
                self.doc.statements.push(Statement {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                    pos,
                });
                if self.tok == Tok::Comma {
                    self.advance()?;
                } else {
                    break;
                }
            }
            if self.tok != Tok::Semi {
                return Ok(());
            }
            while self.tok == Tok::Semi {
                self.advance()?;
            }
            if matches!(self.tok, Tok::Dot | Tok::RBracket) {
                return Ok(());
            }
        }
    }

    fn object(&mut self) -> Result<Node, MappingError> {
        let pos = self.pos;
        if self.tok == Tok::LBracket {
            return self.blank_property_list();
        }
        match self.advance()? {
            Tok::IriRef(i) => Ok(Node::Iri(i)),
            Tok::PName { prefix, local } => Ok(Node::Iri(self.expand(&prefix, &local, pos)?)),
            Tok::BlankLabel(l) => Ok(Node::Blank(l)),
            Tok::Number(n, dt) => Ok(Node::Literal {
                lexical: n,
                datatype: Some(dt.to_owned()),
            }),
            Tok::Bool(b) => Ok(Node::Literal {
                lexical: b.to_string(),
                datatype: Some(vocab::XSD_BOOLEAN.to_owned()),
            }),
            Tok::Str(s) => {
                let datatype = match self.tok {
                    Tok::LangTag(_) => return Err(unsupported(self.pos, "language-tagged literal")),
                    Tok::Caret2 => {
                        self.advance()?;
                        let dpos = self.pos;
                        match self.advance()? {
                            Tok::IriRef(i) => Some(i),
                            Tok::PName { prefix, local } => Some(self.expand(&prefix, &local, dpos)?),
                            other => {
                                return Err(syntax(dpos, format!("expected datatype IRI, found {}", describe(&other))))
                            }
                        }
                    }
                    _ => None,
                };
                Ok(Node::Literal { lexical: s, datatype })
            }
            Tok::LParen => Err(unsupported(pos, "RDF collection")),
            other => Err(syntax(pos, format!("expected object, found {}", describe(&other)))),
        }
    }

    fn blank_property_list(&mut self) -> Result<Node, MappingError> {
        let pos = self.pos;
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(syntax(pos, format!("blank node nesting deeper than {MAX_NESTING}")));
        }
        self.expect(Tok::LBracket, "'['")?;
        self.anon += 1;
        let node = Node::Blank(format!("#{}", self.anon));
        if self.tok != Tok::RBracket {
            self.predicate_object_list(&node)?;
        }
        self.expect(Tok::RBracket, "']'")?;
        self.depth -= 1;
        Ok(node)
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::IriRef(i) => format!("<{i}>"),
        Tok::PName { prefix, local } => format!("'{prefix}:{local}'"),
        Tok::BlankLabel(l) => format!("'_:{l}'"),
        Tok::Str(s) => format!("string {s:?}"),
        Tok::Number(n, _) => format!("number {n}"),
        Tok::Bool(b) => format!("'{b}'"),
        Tok::PrefixDirective => "'@prefix'".into(),
        Tok::SparqlPrefix => "'PREFIX'".into(),
        Tok::BaseDirective => "'@base'".into(),
        Tok::LangTag(t) => format!("'@{t}'"),
        Tok::Caret2 => "'^^'".into(),
        Tok::Dot => "'.'".into(),
        Tok::Semi => "';'".into(),
        Tok::Comma => "','".into(),
        Tok::LBracket => "'['".into(),
        Tok::RBracket => "']'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::A => "'a'".into(),
        Tok::Eof => "end of input".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefixes_and_property_lists() {
        let doc = parse_document(
            r#"@prefix ex: <http://ex.org/> .
PREFIX rr: <http://www.w3.org/ns/r2rml#>
ex:m a rr:TriplesMap ;
  rr:subjectMap [ rr:template "x/{a}" ; rr:class ex:C, ex:D ] .
"#,
        )
        .unwrap();
        assert_eq!(doc.prefixes.len(), 2);
        assert_eq!(doc.statements.len(), 5);
        let s = doc.statements.iter().find(|s| s.predicate.ends_with("subjectMap")).unwrap();
        assert_eq!(s.subject, Node::Iri("http://ex.org/m".into()));
        assert_eq!(s.predicate, "http://www.w3.org/ns/r2rml#subjectMap");
        assert_eq!(s.pos, Pos { line: 4, col: 3 });
        assert!(doc.statements.iter().any(|s| s.object == Node::Iri("http://ex.org/D".into())));
    }

    #[test]
    fn literals_numbers_and_escapes() {
        let doc = parse_document(
            "<s> <p> \"a\\\"b\\u00e9\", 'c', 12, -1.5, 2e3, true, \"v\"^^<http://dt> .",
        )
        .unwrap();
        let objs: Vec<_> = doc.statements.iter().map(|s| s.object.clone()).collect();
        assert_eq!(
            objs[0],
            Node::Literal {
                lexical: "a\"bé".into(),
                datatype: None
            }
        );
        assert_eq!(
            objs[3],
            Node::Literal {
                lexical: "-1.5".into(),
                datatype: Some(vocab::XSD_DECIMAL.into())
            }
        );
        assert_eq!(
            objs[4],
            Node::Literal {
                lexical: "2e3".into(),
                datatype: Some(vocab::XSD_DOUBLE.into())
            }
        );
        assert_eq!(
            objs[6],
            Node::Literal {
                lexical: "v".into(),
                datatype: Some("http://dt".into())
            }
        );
    }

    #[test]
    fn trailing_dot_is_not_part_of_local_name() {
        let doc = parse_document("@prefix ex: <e:> . ex:a ex:b ex:c.d.").unwrap();
        assert_eq!(doc.statements[0].object, Node::Iri("e:c.d".into()));
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_document("<s> <p> <o>\n<t> <p> <o> .").unwrap_err();
        assert_eq!(
            err,
            MappingError::Syntax {
                line: 2,
                col: 1,
                message: "expected '.' at end of statement, found <t>".into()
            }
        );
    }

    #[test]
    fn rejects_unsupported_constructs() {
        for src in [
            "<s> <p> ( <a> ) .",
            "<s> <p> \"\"\"long\"\"\" .",
            "<s> <p> \"x\"@en .",
            "@base <http://x/> .",
        ] {
            assert!(
                matches!(parse_document(src), Err(MappingError::Unsupported { .. })),
                "{src}"
            );
        }
    }

    #[test]
    fn undeclared_prefix() {
        assert!(matches!(
            parse_document("ex:a <p> <o> ."),
            Err(MappingError::UndeclaredPrefix { line: 1, col: 1, .. })
        ));
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let src = format!("<s> <p> {} .", "[ <p> ".repeat(500));
        assert!(matches!(parse_document(&src), Err(MappingError::Syntax { .. })));
    }
}
