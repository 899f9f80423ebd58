//! Young diagrams, reduced diagrams and superbox combinatorics: shifts,
//! chain tuples, essential pairs and validation of compatible mappings.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::MatrixJet;

/// Young diagram given by nonincreasing row lengths.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "YoungRows")]
pub struct YoungDiagram {
    rows: Vec<usize>,
}

#[derive(Deserialize)]
struct YoungRows {
    rows: Vec<usize>,
}

impl TryFrom<YoungRows> for YoungDiagram {
    type Error = Error;
    fn try_from(r: YoungRows) -> Result<Self> {
        YoungDiagram::new(r.rows)
    }
}

impl YoungDiagram {
    pub fn new(rows: Vec<usize>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidDiagram("empty diagram".into()));
        }
        if rows.contains(&0) {
            return Err(Error::InvalidDiagram("rows must be positive".into()));
        }
        if rows.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidDiagram(format!("rows {rows:?} are not nonincreasing")));
        }
        Ok(YoungDiagram { rows })
    }

    /// Diagram with the given column heights (must be nonincreasing).
    pub fn from_columns(cols: &[usize]) -> Result<Self> {
        if cols.windows(2).any(|w| w[0] < w[1]) || cols.contains(&0) {
            return Err(Error::InvalidDiagram(format!("columns {cols:?} are not nonincreasing")));
        }
        YoungDiagram::new(conjugate(cols))
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn columns(&self) -> Vec<usize> {
        conjugate(&self.rows)
    }

    /// Number of boxes.
    pub fn size(&self) -> usize {
        self.rows.iter().sum()
    }

    /// Merges equal rows into levels.
    pub fn reduce(&self) -> ReducedDiagram {
        let mut levels: Vec<Level> = Vec::new();
        for &p in &self.rows {
            match levels.last_mut() {
                Some(l) if l.p == p => l.r += 1,
                _ => levels.push(Level { p, r: 1 }),
            }
        }
        ReducedDiagram { levels }
    }

    /// All Young diagrams with exactly `n` boxes.
    pub fn all_with_size(n: usize) -> Vec<YoungDiagram> {
        fn rec(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<YoungDiagram>) {
            if rest == 0 {
                out.push(YoungDiagram { rows: cur.clone() });
                return;
            }
            for p in (1..=rest.min(max)).rev() {
                cur.push(p);
                rec(rest - p, p, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if n > 0 {
            rec(n, n, &mut Vec::new(), &mut out);
        }
        out
    }
}

impl fmt::Display for YoungDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rows)
    }
}

fn conjugate(parts: &[usize]) -> Vec<usize> {
    let m = parts.first().cloned().unwrap_or(0);
    (1..=m).map(|k| parts.iter().filter(|&&p| p >= k).count()).collect()
}

/// A rectangular block of the reduced diagram: `r` equal rows of `p` boxes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Level {
    /// Number of superboxes in the level.
    pub p: usize,
    /// Size of each superbox.
    pub r: usize,
}

/// A box of the reduced diagram. Indices are zero-based internally and
/// printed one-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Superbox {
    pub level: usize,
    pub col: usize,
}

impl Superbox {
    pub fn new(level: usize, col: usize) -> Self {
        Superbox { level, col }
    }
}

impl fmt::Display for Superbox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.level + 1, self.col + 1)
    }
}

/// Reduced diagram: levels with strictly decreasing `p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReducedDiagram {
    pub levels: Vec<Level>,
}

impl ReducedDiagram {
    pub fn from_levels(levels: Vec<Level>) -> Result<Self> {
        if levels.is_empty() || levels.iter().any(|l| l.p == 0 || l.r == 0) {
            return Err(Error::InvalidDiagram("levels must be nonempty and positive".into()));
        }
        if levels.windows(2).any(|w| w[0].p <= w[1].p) {
            return Err(Error::InvalidDiagram("level lengths must strictly decrease".into()));
        }
        Ok(ReducedDiagram { levels })
    }

    pub fn to_young(&self) -> YoungDiagram {
        let rows = self
            .levels
            .iter()
            .flat_map(|l| std::iter::repeat_n(l.p, l.r))
            .collect();
        YoungDiagram { rows }
    }

    /// Number of levels `d`.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Number of columns, `p_1`.
    pub fn width(&self) -> usize {
        self.levels[0].p
    }

    /// Total number of boxes of the underlying Young diagram.
    pub fn half_dim(&self) -> usize {
        self.levels.iter().map(|l| l.p * l.r).sum()
    }

    pub fn size(&self, a: Superbox) -> usize {
        self.levels[a.level].r
    }

    /// Superboxes in frame order: levels top to bottom, columns left to right.
    pub fn superboxes(&self) -> Vec<Superbox> {
        self.levels
            .iter()
            .enumerate()
            .flat_map(|(i, l)| (0..l.p).map(move |k| Superbox::new(i, k)))
            .collect()
    }

    /// Column offset of superbox `a` in frame order.
    pub fn offset(&self, a: Superbox) -> usize {
        let before: usize = self.levels[..a.level].iter().map(|l| l.p * l.r).sum();
        before + a.col * self.levels[a.level].r
    }

    pub fn contains(&self, a: Superbox) -> bool {
        a.level < self.depth() && a.col < self.levels[a.level].p
    }

    pub fn first(&self, level: usize) -> Superbox {
        Superbox::new(level, 0)
    }

    pub fn last(&self, level: usize) -> Superbox {
        Superbox::new(level, self.levels[level].p - 1)
    }

    pub fn right(&self, a: Superbox) -> Option<Superbox> {
        (a.col + 1 < self.levels[a.level].p).then(|| Superbox::new(a.level, a.col + 1))
    }

    pub fn left(&self, a: Superbox) -> Option<Superbox> {
        (a.col > 0).then(|| Superbox::new(a.level, a.col - 1))
    }

    pub fn is_special(&self, a: Superbox) -> bool {
        a.col + 1 == self.levels[a.level].p
    }

    /// Superboxes in column `k` (zero-based), top to bottom.
    pub fn column(&self, k: usize) -> Vec<Superbox> {
        (0..self.depth())
            .filter(|&i| self.levels[i].p > k)
            .map(|i| Superbox::new(i, k))
            .collect()
    }

    /// The tuple of pairs linking level `j` (higher) with level `i` (lower),
    /// `j < i`. Each pair is (level-`j` box, level-`i` box).
    pub fn chain_pairs(&self, i: usize, j: usize) -> Result<Vec<(Superbox, Superbox)>> {
        if !(j < i && i < self.depth()) {
            return Err(Error::InvalidDiagram(format!(
                "chain needs 1 ≤ j < i ≤ {}, got i={}, j={}",
                self.depth(),
                i + 1,
                j + 1
            )));
        }
        let (pi, pj) = (self.levels[i].p, self.levels[j].p);
        let mut out = Vec::with_capacity(pi + pj - 1);
        let (mut x, mut y) = (0, 0);
        out.push((Superbox::new(j, x), Superbox::new(i, y)));
        // Alternate shifts until the level-i box is special ...
        while y + 1 < pi {
            y += 1;
            out.push((Superbox::new(j, x), Superbox::new(i, y)));
            x += 1;
            out.push((Superbox::new(j, x), Superbox::new(i, y)));
        }
        // ... then shift the level-j box only.
        while x + 1 < pj {
            x += 1;
            out.push((Superbox::new(j, x), Superbox::new(i, y)));
        }
        Ok(out)
    }

    /// Chain pairs that a normal mapping must set to zero (the first
    /// `p_j - p_i - 1` pairs of each chain).
    pub fn normal_zero_pairs(&self) -> Vec<(Superbox, Superbox)> {
        let mut out = Vec::new();
        for i in 0..self.depth() {
            for j in 0..i {
                let k = self.levels[j].p - self.levels[i].p - 1;
                out.extend(self.chain_pairs(i, j).unwrap().into_iter().take(k));
            }
        }
        out
    }

    /// Pairs whose curvature block may be nonzero for a normal mapping,
    /// closed under transposition.
    pub fn essential_pairs(&self) -> BTreeSet<(Superbox, Superbox)> {
        let mut set = BTreeSet::new();
        for a in self.superboxes() {
            set.insert((a, a));
            if let Some(ra) = self.right(a) {
                if self.size(a) > 1 {
                    set.insert((a, ra));
                    set.insert((ra, a));
                }
            }
        }
        for i in 0..self.depth() {
            for j in 0..i {
                let k = self.levels[j].p - self.levels[i].p - 1;
                for (a, b) in self.chain_pairs(i, j).unwrap().into_iter().skip(k) {
                    set.insert((a, b));
                    set.insert((b, a));
                }
            }
        }
        set
    }

    pub fn is_essential(&self, a: Superbox, b: Superbox) -> bool {
        self.essential_pairs().contains(&(a, b))
    }

    /// Whether a quasi-normal mapping may have a nonzero block at `(a, b)`.
    pub fn allows_nonzero(&self, a: Superbox, b: Superbox) -> bool {
        if a.level > b.level {
            return self.allows_nonzero(b, a);
        }
        if a == b || self.right(a) == Some(b) || self.right(b) == Some(a) {
            return true;
        }
        if a.level == b.level {
            return false;
        }
        self.chain_pairs(b.level, a.level).unwrap().contains(&(a, b))
    }
}

impl fmt::Display for ReducedDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .levels
            .iter()
            .map(|l| format!("(p={}, r={})", l.p, l.r))
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// A symmetric compatible mapping stored as one `n × n` matrix jet: the
/// block with rows of `b` and columns of `a` is `R(a, b)`, of shape
/// `size(b) × size(a)`. Symmetry `R(b, a) = R(a, b)ᵀ` is symmetry of the
/// whole matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CompatibleMapping {
    pub diagram: ReducedDiagram,
    pub matrix: MatrixJet,
}

/// Which definition a mapping is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strictness {
    QuasiNormal,
    Normal,
}

/// Kinds of mathematical violations reported by [`CompatibleMapping::validate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// `R(b, a) ≠ R(a, b)ᵀ`.
    Asymmetric,
    /// Nonzero block outside the allowed pattern.
    ForbiddenBlock,
    /// `R(a, r(a))` not antisymmetric.
    NotAntisymmetric,
    /// Leading chain block nonzero.
    LeadingChainBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub a: Superbox,
    pub b: Superbox,
    pub order: usize,
    pub magnitude: f64,
}

impl Serialize for Superbox {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.level + 1, self.col + 1].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Superbox {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [l, c] = <[usize; 2]>::deserialize(d)?;
        if l == 0 || c == 0 {
            return Err(serde::de::Error::custom("superbox indices are 1-based"));
        }
        Ok(Superbox::new(l - 1, c - 1))
    }
}

impl CompatibleMapping {
    pub fn zeros(diagram: &ReducedDiagram, center: f64, order: usize) -> Self {
        let n = diagram.half_dim();
        CompatibleMapping {
            diagram: diagram.clone(),
            matrix: MatrixJet::zeros(center, n, n, order),
        }
    }

    pub fn from_matrix(diagram: &ReducedDiagram, matrix: MatrixJet) -> Result<Self> {
        let n = diagram.half_dim();
        if matrix.shape() != (n, n) {
            return Err(Error::ShapeMismatch(format!(
                "mapping matrix is {:?}, diagram needs {n}x{n}",
                matrix.shape()
            )));
        }
        Ok(CompatibleMapping {
            diagram: diagram.clone(),
            matrix,
        })
    }

    pub fn order(&self) -> usize {
        self.matrix.order()
    }

    /// `R(a, b)`, of shape `size(b) × size(a)`.
    pub fn block(&self, a: Superbox, b: Superbox) -> MatrixJet {
        let d = &self.diagram;
        self.matrix
            .rows_range(d.offset(b), d.size(b))
            .columns(d.offset(a), d.size(a))
    }

    /// Sets `R(a, b)` and, by symmetry, `R(b, a)`.
    pub fn set_block(&mut self, a: Superbox, b: Superbox, value: &MatrixJet) -> Result<()> {
        let d = &self.diagram;
        let (rb, ra) = (d.size(b), d.size(a));
        if value.shape() != (rb, ra) {
            return Err(Error::ShapeMismatch(format!(
                "R({a},{b}) must be {rb}x{ra}, got {:?}",
                value.shape()
            )));
        }
        let (ob, oa) = (d.offset(b), d.offset(a));
        let n = value.order().min(self.matrix.order());
        self.matrix = self.matrix.truncate(n);
        for k in 0..=n {
            let v = &value.coeffs[k];
            self.matrix.coeffs[k].view_mut((ob, oa), (rb, ra)).copy_from(v);
            self.matrix.coeffs[k]
                .view_mut((oa, ob), (ra, rb))
                .copy_from(&v.transpose());
        }
        Ok(())
    }

    /// Constant block helper for tests and specs.
    pub fn set_constant_block(&mut self, a: Superbox, b: Superbox, m: DMatrix<f64>) -> Result<()> {
        let j = MatrixJet::constant(self.matrix.center, m, self.matrix.order());
        self.set_block(a, b, &j)
    }

    /// Checks the mapping against the quasi-normal or normal pattern. Every
    /// coefficient order is checked; returns all violations above `tol`.
    pub fn validate(&self, strictness: Strictness, tol: f64) -> Vec<Violation> {
        let d = &self.diagram;
        let boxes = d.superboxes();
        let mut out = Vec::new();
        let mut report = |kind, a, b, m: &MatrixJet| {
            for (k, c) in m.coeffs.iter().enumerate() {
                let mag = c.amax();
                if mag > tol {
                    out.push(Violation {
                        kind,
                        a,
                        b,
                        order: k,
                        magnitude: mag,
                    });
                    break;
                }
            }
        };
        for &a in &boxes {
            for &b in &boxes {
                if a > b {
                    continue;
                }
                let rab = self.block(a, b);
                let rba = self.block(b, a);
                report(ViolationKind::Asymmetric, a, b, &(&rba - &rab.transpose()));
                if !d.allows_nonzero(a, b) {
                    report(ViolationKind::ForbiddenBlock, a, b, &rab);
                }
            }
            if let Some(ra) = d.right(a) {
                let m = self.block(a, ra);
                report(ViolationKind::NotAntisymmetric, a, ra, &m.symmetric_part());
            }
        }
        if strictness == Strictness::Normal {
            for (a, b) in d.normal_zero_pairs() {
                report(ViolationKind::LeadingChainBlock, a, b, &self.block(a, b));
            }
        }
        out
    }

    /// Largest block norm among non-essential pairs.
    pub fn nonessential_magnitude(&self) -> f64 {
        let ess = self.diagram.essential_pairs();
        let boxes = self.diagram.superboxes();
        let mut m: f64 = 0.0;
        for &a in &boxes {
            for &b in &boxes {
                if !ess.contains(&(a, b)) {
                    m = m.max(self.block(a, b).max_abs());
                }
            }
        }
        m
    }
}
