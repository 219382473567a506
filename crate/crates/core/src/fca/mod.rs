//! Formal contexts: derivation, clarification, reduction and intent
//! enumeration by Next Closure.

mod cxt;

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use thiserror::Error;

pub use cxt::{parse_cxt, read_cxt, render_cxt, write_cxt};

#[derive(Debug, Error)]
pub enum FcaError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid context: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Objects,
    Attributes,
}

/// Objects × attributes incidence with labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalContext {
    objects: Vec<String>,
    attributes: Vec<String>,
    rows: Vec<FixedBitSet>,
    columns: Vec<FixedBitSet>,
}

impl FormalContext {
    pub fn new(objects: Vec<String>, attributes: Vec<String>, rows: Vec<FixedBitSet>) -> Result<Self, FcaError> {
        if rows.len() != objects.len() {
            return Err(FcaError::Invalid(format!(
                "{} objects but {} rows",
                objects.len(),
                rows.len()
            )));
        }
        for (name, labels) in [("object", &objects), ("attribute", &attributes)] {
            let mut seen = HashMap::new();
            for (i, l) in labels.iter().enumerate() {
                if let Some(j) = seen.insert(l.as_str(), i) {
                    return Err(FcaError::Invalid(format!("{name} label {l:?} repeated at {j} and {i}")));
                }
            }
        }
        let m = attributes.len();
        if let Some(i) = rows.iter().position(|r| r.len() != m) {
            return Err(FcaError::Invalid(format!(
                "row {i} has length {}, expected {m}",
                rows[i].len()
            )));
        }
        let mut columns = vec![FixedBitSet::with_capacity(objects.len()); m];
        for (g, row) in rows.iter().enumerate() {
            for a in row.ones() {
                columns[a].insert(g);
            }
        }
        Ok(FormalContext {
            objects,
            attributes,
            rows,
            columns,
        })
    }

    /// Builds a context from boolean rows with generated labels `g0…`, `m0…`.
    pub fn from_bools(rows: &[Vec<bool>], attribute_count: usize) -> Result<Self, FcaError> {
        let bits = rows
            .iter()
            .map(|r| {
                let mut b = FixedBitSet::with_capacity(attribute_count);
                for (j, &x) in r.iter().enumerate() {
                    if x {
                        if j >= attribute_count {
                            return Err(FcaError::Invalid(format!("column {j} out of range")));
                        }
                        b.insert(j);
                    }
                }
                Ok(b)
            })
            .collect::<Result<Vec<_>, _>>()?;
        FormalContext::new(
            (0..rows.len()).map(|i| format!("g{i}")).collect(),
            (0..attribute_count).map(|j| format!("m{j}")).collect(),
            bits,
        )
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn attribute_count(&self) -> usize {
        self.attributes.len()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn row(&self, g: usize) -> &FixedBitSet {
        &self.rows[g]
    }

    pub fn rows(&self) -> &[FixedBitSet] {
        &self.rows
    }

    pub fn column(&self, m: usize) -> &FixedBitSet {
        &self.columns[m]
    }

    pub fn incident(&self, g: usize, m: usize) -> bool {
        self.rows[g].contains(m)
    }

    fn side_len(&self, side: Side) -> usize {
        match side {
            Side::Objects => self.objects.len(),
            Side::Attributes => self.attributes.len(),
        }
    }

    /// Objects ↦ common attributes, or attributes ↦ common objects.
    pub fn derive(&self, side: Side, set: &FixedBitSet) -> FixedBitSet {
        let (lines, width) = match side {
            Side::Objects => (&self.rows, self.attributes.len()),
            Side::Attributes => (&self.columns, self.objects.len()),
        };
        debug_assert_eq!(set.len(), self.side_len(side));
        let mut out = FixedBitSet::with_capacity(width);
        out.insert_range(..);
        for i in set.ones() {
            out.intersect_with(&lines[i]);
        }
        out
    }

    pub fn extent(&self, intent: &FixedBitSet) -> FixedBitSet {
        self.derive(Side::Attributes, intent)
    }

    pub fn intent(&self, extent: &FixedBitSet) -> FixedBitSet {
        self.derive(Side::Objects, extent)
    }

    pub fn closure(&self, attributes: &FixedBitSet) -> FixedBitSet {
        self.intent(&self.extent(attributes))
    }

    pub fn transpose(&self) -> FormalContext {
        FormalContext {
            objects: self.attributes.clone(),
            attributes: self.objects.clone(),
            rows: self.columns.clone(),
            columns: self.rows.clone(),
        }
    }

    fn keep_objects(&self, keep: &[usize]) -> FormalContext {
        FormalContext {
            objects: keep.iter().map(|&g| self.objects[g].clone()).collect(),
            attributes: self.attributes.clone(),
            rows: keep.iter().map(|&g| self.rows[g].clone()).collect(),
            columns: self
                .columns
                .iter()
                .map(|c| {
                    let mut b = FixedBitSet::with_capacity(keep.len());
                    for (i, &g) in keep.iter().enumerate() {
                        b.set(i, c.contains(g));
                    }
                    b
                })
                .collect(),
        }
    }

    /// Keeps the first of each group of identical rows (columns). The merge
    /// map lists, per kept line, the original indices it stands for.
    pub fn clarify(&self, side: Side) -> (FormalContext, Vec<Vec<usize>>) {
        if side == Side::Attributes {
            let (t, merge) = self.transpose().clarify(Side::Objects);
            return (t.transpose(), merge);
        }
        let mut first: HashMap<&FixedBitSet, usize> = HashMap::new();
        let mut merge: Vec<Vec<usize>> = Vec::new();
        let mut keep = Vec::new();
        for (g, row) in self.rows.iter().enumerate() {
            match first.get(row) {
                Some(&slot) => merge[slot].push(g),
                None => {
                    first.insert(row, merge.len());
                    merge.push(vec![g]);
                    keep.push(g);
                }
            }
        }
        (self.keep_objects(&keep), merge)
    }

    /// Drops every row (column) equal to the meet of the strictly larger
    /// ones. Expects a context clarified on that side.
    pub fn reduce(&self, side: Side) -> (FormalContext, Vec<usize>) {
        if side == Side::Attributes {
            let (t, removed) = self.transpose().reduce(Side::Objects);
            return (t.transpose(), removed);
        }
        let mut keep = Vec::new();
        let mut removed = Vec::new();
        for (g, row) in self.rows.iter().enumerate() {
            let mut meet = FixedBitSet::with_capacity(self.attributes.len());
            meet.insert_range(..);
            for (h, other) in self.rows.iter().enumerate() {
                if h != g && row.is_subset(other) && row != other {
                    meet.intersect_with(other);
                }
            }
            if meet == *row {
                removed.push(g);
            } else {
                keep.push(g);
            }
        }
        (self.keep_objects(&keep), removed)
    }

    pub fn next_closure_intents(&self) -> NextClosure<'_> {
        NextClosure {
            ctx: self,
            current: None,
            done: false,
        }
    }

    /// Intents other than the full attribute set that are maximal among
    /// intents. Each is the row of some object.
    pub fn maximal_proper_intents(&self) -> Vec<FixedBitSet> {
        let m = self.attributes.len();
        let mut candidates: Vec<&FixedBitSet> = self.rows.iter().filter(|r| r.count_ones(..) < m).collect();
        candidates.sort();
        candidates.dedup();
        candidates
            .iter()
            .filter(|r| !candidates.iter().any(|o| o != *r && r.is_subset(o)))
            .map(|r| (*r).clone())
            .collect()
    }
}

/// Ganter's Next Closure: every intent once, in lectic order with attribute
/// 0 most significant.
pub struct NextClosure<'a> {
    ctx: &'a FormalContext,
    current: Option<FixedBitSet>,
    done: bool,
}

impl Iterator for NextClosure<'_> {
    type Item = FixedBitSet;

    fn next(&mut self) -> Option<FixedBitSet> {
        if self.done {
            return None;
        }
        let m = self.ctx.attribute_count();
        let next = match &self.current {
            None => Some(self.ctx.closure(&FixedBitSet::with_capacity(m))),
            Some(a) => {
                let mut found = None;
                for i in (0..m).rev() {
                    if a.contains(i) {
                        continue;
                    }
                    let mut seed = FixedBitSet::with_capacity(m);
                    seed.extend(a.ones().take_while(|&j| j < i));
                    seed.insert(i);
                    let b = self.ctx.closure(&seed);
                    if b.ones().take_while(|&j| j < i).eq(a.ones().take_while(|&j| j < i)) {
                        found = Some(b);
                        break;
                    }
                }
                found
            }
        };
        match next {
            Some(b) => {
                if b.count_ones(..) == m {
                    self.done = true;
                }
                self.current = Some(b.clone());
                Some(b)
            }
            None => {
                self.done = true;
                None
            }
        }
    }
}

/// Lectic comparison: the first attribute where `a` and `b` differ belongs
/// to the larger set.
pub fn lectic_less(a: &FixedBitSet, b: &FixedBitSet) -> bool {
    let n = a.len().max(b.len());
    for i in 0..n {
        let (x, y) = (a.contains(i), b.contains(i));
        if x != y {
            return y;
        }
    }
    false
}
