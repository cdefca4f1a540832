use std::collections::HashMap;

use crate::error::{Error, Result};

/// The twelve ExDark object categories under their COCO names, in ExDark's
/// official numbering order.
pub const EXDARK_CLASSES: [&str; 12] = [
    "bicycle",
    "boat",
    "bottle",
    "bus",
    "car",
    "cat",
    "chair",
    "cup",
    "dog",
    "motorcycle",
    "person",
    "dining table",
];

const EXDARK_ALIASES: [(&str, &str); 3] = [
    ("people", "person"),
    ("motorbike", "motorcycle"),
    ("table", "dining table"),
];

/// Dense class vocabulary with case-insensitive lookup and aliases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassTable {
    names: Vec<String>,
    lookup: HashMap<String, usize>,
}

impl ClassTable {
    /// Builds a table from canonical names (ids follow their order) and
    /// `(alias, canonical)` pairs.
    pub fn new<S: AsRef<str>>(names: &[S], aliases: &[(S, S)]) -> Result<Self> {
        let mut lookup = HashMap::new();
        let names: Vec<String> = names.iter().map(|n| n.as_ref().to_string()).collect();
        for (id, name) in names.iter().enumerate() {
            if lookup.insert(name.to_lowercase(), id).is_some() {
                return Err(Error::InvalidConfig(format!(
                    "duplicate class name {name:?}"
                )));
            }
        }
        for (alias, target) in aliases {
            let id = *lookup
                .get(&target.as_ref().to_lowercase())
                .ok_or_else(|| Error::NoMapping(target.as_ref().to_string()))?;
            let key = alias.as_ref().to_lowercase();
            match lookup.get(&key) {
                Some(&existing) if existing != id => {
                    return Err(Error::InvalidConfig(format!(
                        "alias {:?} resolves to two classes",
                        alias.as_ref()
                    )))
                }
                _ => {
                    lookup.insert(key, id);
                }
            }
        }
        Ok(Self { names, lookup })
    }

    /// The ExDark vocabulary with COCO canonical names.
    pub fn exdark() -> Self {
        Self::new(&EXDARK_CLASSES, &EXDARK_ALIASES).expect("static table is valid")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn resolve(&self, name: &str) -> Result<usize> {
        self.lookup
            .get(&name.trim().to_lowercase())
            .copied()
            .ok_or_else(|| Error::NoMapping(name.to_string()))
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.names.get(id).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

impl Default for ClassTable {
    fn default() -> Self {
        Self::exdark()
    }
}

/// Canonical id of `name` in the ExDark table.
pub fn map_class_name(name: &str) -> Result<usize> {
    ClassTable::exdark().resolve(name)
}
