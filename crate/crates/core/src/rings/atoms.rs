use std::fmt;

use super::RingError;

/// Symbol of the Tate class, always present with Euler number 1.
pub const TATE: &str = "L";
/// Symbol of the point class. It is the ring unit and never a variable.
pub const POINT: &str = "1";

/// Declared atomic classes generating the modeled Grothendieck ring, each
/// with the Euler characteristic it is sent to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomTable {
    entries: Vec<(String, i64)>,
}

impl Default for AtomTable {
    fn default() -> Self {
        Self::new()
    }
}

impl AtomTable {
    pub fn new() -> Self {
        AtomTable {
            entries: vec![(POINT.to_string(), 1), (TATE.to_string(), 1)],
        }
    }

    /// Adds an atom. Redeclaring `L` or `1` is accepted only with Euler number 1.
    pub fn declare(&mut self, symbol: &str, euler: i64) -> Result<(), RingError> {
        if !is_symbol(symbol) && symbol != POINT {
            return Err(RingError::BadSymbol(symbol.to_string()));
        }
        if let Some(existing) = self.euler(symbol) {
            if (symbol == TATE || symbol == POINT) && existing == euler {
                return Ok(());
            }
            return Err(RingError::DuplicateAtom(symbol.to_string()));
        }
        self.entries.push((symbol.to_string(), euler));
        Ok(())
    }

    pub fn with(mut self, symbol: &str, euler: i64) -> Result<Self, RingError> {
        self.declare(symbol, euler)?;
        Ok(self)
    }

    pub fn euler(&self, symbol: &str) -> Option<i64> {
        self.entries
            .iter()
            .find(|(s, _)| s == symbol)
            .map(|&(_, e)| e)
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.euler(symbol).is_some()
    }

    /// Atoms usable as polynomial variables, in declaration order.
    pub fn variables(&self) -> impl Iterator<Item = (&str, i64)> {
        self.entries
            .iter()
            .filter(|(s, _)| s != POINT)
            .map(|(s, e)| (s.as_str(), *e))
    }

    /// Atoms declared by the user beyond the built-in `1` and `L`.
    pub fn declared(&self) -> impl Iterator<Item = (&str, i64)> {
        self.entries[2..].iter().map(|(s, e)| (s.as_str(), *e))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

pub(crate) fn is_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Display for AtomTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(s, e)| format!("{s}:{e}"))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}
