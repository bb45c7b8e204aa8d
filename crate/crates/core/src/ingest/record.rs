use std::collections::HashMap;
use std::sync::Arc;

/// Attribute names shared by every record of one source (CSV header), or
/// owned by a single record (JSON objects with varying keys).
#[derive(Debug, PartialEq, Eq)]
pub struct Schema {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Schema {
    /// Builds a schema; returns the first repeated name on conflict.
    pub fn new(names: Vec<String>) -> Result<Self, String> {
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(name.clone());
            }
        }
        Ok(Self { names, index })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// One row or object of a logical source: ordered attribute bindings with
/// raw string values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    schema: Arc<Schema>,
    values: Vec<String>,
    ordinal: u64,
}

impl Record {
    /// `values` must line up with `schema`.
    pub fn new(schema: Arc<Schema>, values: Vec<String>, ordinal: u64) -> Self {
        assert_eq!(schema.len(), values.len(), "record width must match its schema");
        Self {
            schema,
            values,
            ordinal,
        }
    }

    /// Convenience constructor for tests and small in-memory sources.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>, ordinal: u64) -> Self {
        let (names, values): (Vec<String>, Vec<String>) = pairs
            .into_iter()
            .map(|(k, v)| (k.to_owned(), v.to_owned()))
            .unzip();
        let schema = Schema::new(names).expect("duplicate attribute name");
        Self::new(Arc::new(schema), values, ordinal)
    }

    pub fn ordinal(&self) -> u64 {
        self.ordinal
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    /// Raw value of `attr`, including empty strings.
    pub fn get(&self, attr: &str) -> Option<&str> {
        self.schema.position(attr).map(|i| self.values[i].as_str())
    }

    /// Value of `attr` under the NONE policy: absent and empty are both `None`.
    pub fn value(&self, attr: &str) -> Option<&str> {
        self.get(attr).filter(|v| !v.is_empty())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.schema
            .names()
            .iter()
            .map(String::as_str)
            .zip(self.values.iter().map(String::as_str))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Values of `attrs` in the given order, or `None` if any is absent or empty.
pub fn project_attributes<'r, S: AsRef<str>>(record: &'r Record, attrs: &[S]) -> Option<Vec<&'r str>> {
    attrs.iter().map(|a| record.value(a.as_ref())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_single_attribute() {
        let r = Record::from_pairs([("enst", "E1")], 0);
        assert_eq!(project_attributes(&r, &["enst"]), Some(vec!["E1"]));
    }

    #[test]
    fn projection_missing_attribute_is_none() {
        let r = Record::from_pairs([("enst", "E1")], 0);
        assert_eq!(project_attributes(&r, &["missing"]), None);
    }

    #[test]
    fn projection_preserves_requested_order() {
        let r = Record::from_pairs([("a", "1"), ("b", "2")], 0);
        assert_eq!(project_attributes(&r, &["b", "a"]), Some(vec!["2", "1"]));
    }

    #[test]
    fn projection_empty_value_is_none() {
        let r = Record::from_pairs([("a", ""), ("b", "2")], 0);
        assert_eq!(project_attributes(&r, &["b", "a"]), None);
        assert_eq!(r.get("a"), Some(""));
    }

    #[test]
    fn schema_rejects_duplicate_names() {
        assert_eq!(Schema::new(vec!["a".into(), "a".into()]), Err("a".into()));
    }
}
