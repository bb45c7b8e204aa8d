//! The JSONPath subset accepted by `rml:iterator`: `$`, child names
//! (`.name`, `['name']`) and wildcards (`[*]`, `.*`).

use serde_json::Value;

use super::SourceError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Child(String),
    Wildcard,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JsonPath {
    steps: Vec<Step>,
}

fn bad(expr: &str, reason: &str) -> SourceError {
    SourceError::InvalidIterator {
        expr: expr.to_owned(),
        reason: reason.to_owned(),
    }
}

impl JsonPath {
    pub fn parse(expr: &str) -> Result<Self, SourceError> {
        let rest = expr
            .strip_prefix('$')
            .ok_or_else(|| bad(expr, "must start with '$'"))?;
        let mut steps = Vec::new();
        let mut chars = rest.chars().peekable();
        while let Some(c) = chars.next() {
            match c {
                '.' => {
                    if chars.peek() == Some(&'*') {
                        chars.next();
                        steps.push(Step::Wildcard);
                        continue;
                    }
                    let mut name = String::new();
                    while let Some(&c) = chars.peek() {
                        if c == '.' || c == '[' {
                            break;
                        }
                        name.push(c);
                        chars.next();
                    }
                    if name.is_empty() {
                        return Err(bad(expr, "empty member name"));
                    }
                    steps.push(Step::Child(name));
                }
                '[' => match chars.next() {
                    Some('*') => {
                        if chars.next() != Some(']') {
                            return Err(bad(expr, "expected ']' after '*'"));
                        }
                        steps.push(Step::Wildcard);
                    }
                    Some(q @ ('\'' | '"')) => {
                        let mut name = String::new();
                        loop {
                            match chars.next() {
                                Some(c) if c == q => break,
                                Some(c) => name.push(c),
                                None => return Err(bad(expr, "unterminated quoted member name")),
                            }
                        }
                        if chars.next() != Some(']') {
                            return Err(bad(expr, "expected ']' after quoted name"));
                        }
                        steps.push(Step::Child(name));
                    }
                    _ => return Err(bad(expr, "only [*] and ['name'] selectors are supported")),
                },
                _ => return Err(bad(expr, "expected '.' or '['")),
            }
        }
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Elements the iterator ranges over. Wildcards apply to arrays only;
    /// a path without a trailing wildcard must land on arrays, whose
    /// elements are returned.
    pub fn select<'v>(&self, root: &'v Value) -> Result<Vec<&'v Value>, SourceError> {
        let mut current = vec![root];
        for step in &self.steps {
            let mut next = Vec::new();
            for v in current {
                match step {
                    Step::Child(name) => {
                        if let Some(c) = v.get(name.as_str()) {
                            next.push(c);
                        }
                    }
                    Step::Wildcard => match v {
                        Value::Array(items) => next.extend(items.iter()),
                        other => return Err(SourceError::IteratorNotArray(kind_of(other))),
                    },
                }
            }
            current = next;
        }
        if matches!(self.steps.last(), Some(Step::Wildcard)) {
            return Ok(current);
        }
        let mut out = Vec::new();
        for v in current {
            match v {
                Value::Array(items) => out.extend(items.iter()),
                other => return Err(SourceError::IteratorNotArray(kind_of(other))),
            }
        }
        Ok(out)
    }
}

pub(crate) fn kind_of(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}
