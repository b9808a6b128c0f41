//! Rough set analysis: indiscernibility partitions, lower/upper
//! approximations, the discernibility matrix and function, exhaustive reduct
//! search, and decision-rule extraction with a reserved "non-deterministic"
//! label for inconsistent classes.

use std::collections::BTreeMap;

use crate::data::Samples;
use crate::error::{Error, Result};
use crate::som::Discretizer1D;

/// Decision value reserved for inconsistent classes and unseen cases.
pub const NON_DETERMINISTIC: u8 = 6;

/// Hard cap for the exhaustive reduct search.
pub const MAX_REDUCT_ATTRS: usize = 16;

/// A finite universe with symbolic condition attributes and one decision
/// attribute. Values are small integers in 1..=5.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionTable {
    objects: Vec<String>,
    attributes: Vec<String>,
    decision: String,
    cond_values: Vec<Vec<u8>>,
    dec_values: Vec<u8>,
}

impl DecisionTable {
    pub fn new(
        objects: Vec<String>,
        attributes: Vec<String>,
        decision: String,
        cond_values: Vec<Vec<u8>>,
        dec_values: Vec<u8>,
    ) -> Result<Self> {
        if objects.is_empty() || attributes.is_empty() {
            return Err(Error::EmptyInput);
        }
        if attributes.contains(&decision) {
            return Err(Error::InvalidConfig(format!(
                "decision attribute `{decision}` also appears among the conditions"
            )));
        }
        if cond_values.len() != objects.len() || dec_values.len() != objects.len() {
            return Err(Error::DimensionMismatch {
                expected: objects.len(),
                got: cond_values.len().min(dec_values.len()),
            });
        }
        for row in &cond_values {
            if row.len() != attributes.len() {
                return Err(Error::DimensionMismatch {
                    expected: attributes.len(),
                    got: row.len(),
                });
            }
        }
        for v in cond_values.iter().flatten().chain(dec_values.iter()) {
            if !(1..=5).contains(v) {
                return Err(Error::InvalidConfig(format!(
                    "table values must lie in 1..=5, got {v}"
                )));
            }
        }
        Ok(DecisionTable { objects, attributes, decision, cond_values, dec_values })
    }

    pub fn n_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn n_attributes(&self) -> usize {
        self.attributes.len()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn decision_name(&self) -> &str {
        &self.decision
    }

    pub fn condition(&self, object: usize, attribute: usize) -> u8 {
        self.cond_values[object][attribute]
    }

    pub fn decision(&self, object: usize) -> u8 {
        self.dec_values[object]
    }

    pub fn attribute_index(&self, name: &str) -> Result<usize> {
        self.attributes
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    fn resolve<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.attribute_index(n.as_ref())).collect()
    }

    /// CSV export: object id, condition columns, decision column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("object_id");
        for a in &self.attributes {
            out.push(',');
            out.push_str(a);
        }
        out.push(',');
        out.push_str(&self.decision);
        out.push('\n');
        for i in 0..self.n_objects() {
            out.push_str(&self.objects[i]);
            for v in &self.cond_values[i] {
                out.push_str(&format!(",{v}"));
            }
            out.push_str(&format!(",{}\n", self.dec_values[i]));
        }
        out
    }

    /// Parses the `to_csv` format: first column is the object id, last
    /// column the decision, everything between a condition attribute.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or(Error::EmptyInput)?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 3 {
            return Err(Error::InvalidConfig(
                "decision-table CSV needs an id column, at least one attribute and a decision"
                    .into(),
            ));
        }
        let attributes: Vec<String> = cols[1..cols.len() - 1].iter().map(|s| s.to_string()).collect();
        let decision = cols[cols.len() - 1].to_string();
        let mut objects = Vec::new();
        let mut cond_values = Vec::new();
        let mut dec_values = Vec::new();
        for (i, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != cols.len() {
                return Err(Error::RowParse {
                    line: i + 2,
                    field: String::new(),
                    reason: format!("expected {} fields, got {}", cols.len(), cells.len()),
                });
            }
            let parse = |s: &str, field: &str| -> Result<u8> {
                s.parse().map_err(|_| Error::RowParse {
                    line: i + 2,
                    field: field.to_string(),
                    reason: format!("`{s}` is not a symbolic value"),
                })
            };
            objects.push(cells[0].to_string());
            let mut row = Vec::with_capacity(attributes.len());
            for (a, cell) in attributes.iter().zip(&cells[1..cells.len() - 1]) {
                row.push(parse(cell, a)?);
            }
            cond_values.push(row);
            dec_values.push(parse(cells[cells.len() - 1], &decision)?);
        }
        DecisionTable::new(objects, attributes, decision, cond_values, dec_values)
    }
}

/// An attribute subset as a bitmask over the table's attribute order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AttrSet(pub u32);

impl AttrSet {
    pub fn empty() -> Self {
        AttrSet(0)
    }

    pub fn insert(&mut self, idx: usize) {
        self.0 |= 1 << idx;
    }

    pub fn contains(self, idx: usize) -> bool {
        self.0 & (1 << idx) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset_of(self, other: AttrSet) -> bool {
        self.0 & other.0 == self.0
    }

    pub fn intersects(self, other: AttrSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.contains(i))
    }

    pub fn names(self, table: &DecisionTable) -> Vec<String> {
        self.indices().map(|i| table.attributes[i].clone()).collect()
    }
}

/// Groups objects agreeing on every attribute in `B`; classes are ordered by
/// their smallest member index and cover the universe exactly once.
/// An empty `B` puts the whole universe into one class.
pub fn indiscernibility_classes<S: AsRef<str>>(
    table: &DecisionTable,
    b: &[S],
) -> Result<Vec<Vec<usize>>> {
    let idx = table.resolve(b)?;
    Ok(partition_by(table, &idx))
}

fn partition_by(table: &DecisionTable, attrs: &[usize]) -> Vec<Vec<usize>> {
    let mut groups: BTreeMap<Vec<u8>, Vec<usize>> = BTreeMap::new();
    for obj in 0..table.n_objects() {
        let key: Vec<u8> = attrs.iter().map(|&a| table.cond_values[obj][a]).collect();
        groups.entry(key).or_default().push(obj);
    }
    let mut classes: Vec<Vec<usize>> = groups.into_values().collect();
    classes.sort_by_key(|c| c[0]);
    classes
}

/// Objects whose whole indiscernibility class lies inside `x`.
pub fn lower_approx<S: AsRef<str>>(
    table: &DecisionTable,
    b: &[S],
    x: &[usize],
) -> Result<Vec<usize>> {
    let (classes, inside) = approx_setup(table, b, x)?;
    let mut out = Vec::new();
    for class in &classes {
        if class.iter().all(|&o| inside[o]) {
            out.extend_from_slice(class);
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Objects whose indiscernibility class meets `x`.
pub fn upper_approx<S: AsRef<str>>(
    table: &DecisionTable,
    b: &[S],
    x: &[usize],
) -> Result<Vec<usize>> {
    let (classes, inside) = approx_setup(table, b, x)?;
    let mut out = Vec::new();
    for class in &classes {
        if class.iter().any(|&o| inside[o]) {
            out.extend_from_slice(class);
        }
    }
    out.sort_unstable();
    Ok(out)
}

fn approx_setup<S: AsRef<str>>(
    table: &DecisionTable,
    b: &[S],
    x: &[usize],
) -> Result<(Vec<Vec<usize>>, Vec<bool>)> {
    let mut inside = vec![false; table.n_objects()];
    for &o in x {
        if o >= table.n_objects() {
            return Err(Error::UnknownObject(o.to_string()));
        }
        inside[o] = true;
    }
    Ok((indiscernibility_classes(table, b)?, inside))
}

/// Lower-triangular matrix of per-pair attribute-difference sets. In the
/// decision-relative variant, pairs with equal decisions get an empty set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscernibilityMatrix {
    pub n: usize,
    pub decision_relative: bool,
    /// entries[i][j] = c_(i+1)j for j <= i, i in 0..n-1
    entries: Vec<Vec<AttrSet>>,
}

impl DiscernibilityMatrix {
    /// c_ij for any i, j; the diagonal is empty and the matrix is symmetric.
    pub fn entry(&self, i: usize, j: usize) -> AttrSet {
        if i == j {
            return AttrSet::empty();
        }
        let (hi, lo) = if i > j { (i, j) } else { (j, i) };
        self.entries[hi - 1][lo]
    }
}

pub fn discernibility_matrix(table: &DecisionTable, decision_relative: bool) -> DiscernibilityMatrix {
    let n = table.n_objects();
    let m = table.n_attributes();
    let mut entries = Vec::with_capacity(n.saturating_sub(1));
    for i in 1..n {
        let mut row = Vec::with_capacity(i);
        for j in 0..i {
            let mut set = AttrSet::empty();
            if !decision_relative || table.dec_values[i] != table.dec_values[j] {
                for a in 0..m {
                    if table.cond_values[i][a] != table.cond_values[j][a] {
                        set.insert(a);
                    }
                }
            }
            row.push(set);
        }
        entries.push(row);
    }
    DiscernibilityMatrix { n, decision_relative, entries }
}

/// Monotone CNF over positive attribute literals: a conjunction of
/// disjunction clauses, kept free of duplicate and absorbed clauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BooleanFormula {
    pub clauses: Vec<AttrSet>,
}

impl BooleanFormula {
    pub fn is_satisfied_by(&self, set: AttrSet) -> bool {
        self.clauses.iter().all(|c| c.intersects(set))
    }
}

/// Conjunction of the disjunctions of every nonempty matrix entry, with
/// absorption applied (a clause that contains another clause is dropped).
pub fn discernibility_function(matrix: &DiscernibilityMatrix) -> BooleanFormula {
    let mut clauses: Vec<AttrSet> = Vec::new();
    for i in 1..matrix.n {
        for j in 0..i {
            let c = matrix.entry(i, j);
            if !c.is_empty() {
                clauses.push(c);
            }
        }
    }
    clauses.sort();
    clauses.dedup();
    // absorption: keep a clause only if no other clause is its subset
    let kept: Vec<AttrSet> = clauses
        .iter()
        .filter(|&&c| {
            !clauses
                .iter()
                .any(|&other| other != c && other.is_subset_of(c))
        })
        .copied()
        .collect();
    BooleanFormula { clauses: kept }
}

/// All prime implicants of the monotone CNF: minimal attribute sets that hit
/// every clause, found by exhaustive search in increasing cardinality.
/// For an empty formula the empty set is the unique reduct.
pub fn reducts(formula: &BooleanFormula, n_attrs: usize) -> Result<Vec<AttrSet>> {
    if n_attrs > MAX_REDUCT_ATTRS {
        return Err(Error::TooManyAttributes(n_attrs, MAX_REDUCT_ATTRS));
    }
    if formula.clauses.is_empty() {
        return Ok(vec![AttrSet::empty()]);
    }
    let mut found: Vec<AttrSet> = Vec::new();
    let total = 1u32 << n_attrs;
    let mut by_size: Vec<AttrSet> = (0..total).map(AttrSet).collect();
    by_size.sort_by_key(|s| (s.len(), s.0));
    for set in by_size {
        if found.iter().any(|r| r.is_subset_of(set)) {
            continue; // a smaller reduct is already inside
        }
        if formula.is_satisfied_by(set) {
            found.push(set);
        }
    }
    Ok(found)
}

/// A decision rule: shared condition values over a set of attributes, a
/// decision (or `NON_DETERMINISTIC`), and the number of matching objects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionRule {
    /// (attribute name, value) in the table's attribute order.
    pub conditions: Vec<(String, u8)>,
    pub decision: u8,
    pub support: usize,
}

impl DecisionRule {
    pub fn matches(&self, values: &BTreeMap<String, u8>) -> bool {
        self.conditions
            .iter()
            .all(|(name, v)| values.get(name) == Some(v))
    }
}

/// One rule per indiscernibility class of `B`: the class's shared values,
/// its unique decision when consistent (otherwise `NON_DETERMINISTIC`), and
/// the class size as support. Rules are ordered by descending support, then
/// lexicographically by conditions. An empty `B` yields a single rule with
/// no conditions, which is only meaningful for constant-decision tables.
pub fn extract_decision_rules<S: AsRef<str>>(
    table: &DecisionTable,
    b: &[S],
) -> Result<Vec<DecisionRule>> {
    let idx = table.resolve(b)?;
    let classes = partition_by(table, &idx);
    let mut rules = Vec::with_capacity(classes.len());
    for class in classes {
        let first = class[0];
        let conditions: Vec<(String, u8)> = idx
            .iter()
            .map(|&a| (table.attributes[a].clone(), table.cond_values[first][a]))
            .collect();
        let d0 = table.dec_values[first];
        let consistent = class.iter().all(|&o| table.dec_values[o] == d0);
        rules.push(DecisionRule {
            conditions,
            decision: if consistent { d0 } else { NON_DETERMINISTIC },
            support: class.len(),
        });
    }
    rules.sort_by(|a, b| {
        b.support
            .cmp(&a.support)
            .then_with(|| a.conditions.cmp(&b.conditions))
    });
    Ok(rules)
}

/// Applies a rule set to a condition assignment. Unseen combinations return
/// `NON_DETERMINISTIC`.
pub fn classify(rules: &[DecisionRule], values: &BTreeMap<String, u8>) -> u8 {
    rules
        .iter()
        .find(|r| r.matches(values))
        .map(|r| r.decision)
        .unwrap_or(NON_DETERMINISTIC)
}

/// Scales a numeric dataset into a decision table by applying one fitted
/// discretizer per input plus one for the target.
pub fn scale_samples_to_table(
    data: &Samples,
    discretizers: &[Discretizer1D],
    target_discretizer: &Discretizer1D,
) -> Result<DecisionTable> {
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    if discretizers.len() != data.dim() {
        return Err(Error::DimensionMismatch { expected: data.dim(), got: discretizers.len() });
    }
    let objects = (0..data.len()).map(|i| format!("r{}", i + 1)).collect();
    let cond_values: Vec<Vec<u8>> = data
        .x
        .iter()
        .map(|row| {
            row.iter()
                .zip(discretizers)
                .map(|(&v, d)| d.apply(v) as u8)
                .collect()
        })
        .collect();
    let dec_values: Vec<u8> = data.y.iter().map(|&v| target_discretizer.apply(v) as u8).collect();
    DecisionTable::new(
        objects,
        data.input_names.clone(),
        data.target_name.clone(),
        cond_values,
        dec_values,
    )
}

/// Display name for a symbolic level under the five-level scheme.
pub fn level_label(value: u8) -> &'static str {
    match value {
        1 => "very low",
        2 => "low",
        3 => "medium",
        4 => "high",
        5 => "very high",
        _ => "non-deterministic",
    }
}

/// Text export of a rule list, one rule per line.
pub fn rules_to_text(rules: &[DecisionRule]) -> String {
    let mut out = String::new();
    for rule in rules {
        if rule.conditions.is_empty() {
            out.push_str("if (always)");
        } else {
            out.push_str("if ");
            for (i, (name, v)) in rule.conditions.iter().enumerate() {
                if i > 0 {
                    out.push_str(" and ");
                }
                out.push_str(&format!("{name} is {} ({v})", level_label(*v)));
            }
        }
        out.push_str(&format!(
            " then {} ({})  [support {}]\n",
            level_label(rule.decision),
            rule.decision,
            rule.support
        ));
    }
    out
}
