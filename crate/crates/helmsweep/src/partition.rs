//! Strip decompositions along x and the index-set algebra over them.
//!
//! Subdomains are numbered from 0 and cover inclusive ranges of line
//! positions `[s_j, e_j]` of an operator layout. All index sets are whole
//! gridlines, so they are stored as line lists and expanded to global
//! unknowns (`p·m + q`) on request.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::SparseOperator;

#[derive(Debug, Error, PartialEq)]
pub enum PartitionError {
    #[error("cannot split {lines} gridlines into {j} strips")]
    TooManyStrips { j: usize, lines: usize },
    #[error("overlap of {0} lines is too wide for the strips")]
    OverlapTooWide(usize),
    #[error("source-transfer overlaps need at least 2 interior lines (got {0})")]
    OverlapTooThin(usize),
    #[error("subdomain {j} does not exist (J = {count})")]
    NoSubdomain { j: usize, count: usize },
    #[error("tag {0:?} needs an overlapping layout")]
    TagNeedsOverlap(Tag),
    #[error("partition invariant violated: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartitionKind {
    /// Neighbours share exactly their interface line.
    NonOverlapping,
    /// Neighbours share `overlap + 2` lines; every subdomain keeps a private core.
    Overlapping,
    /// Each subdomain is the union of two contacting overlaps.
    SourceTransfer,
}

/// Index-set tags of one subdomain `Ω_j = [s_j, e_j]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tag {
    /// `j⟨⟩`, every unknown of the subdomain.
    Full,
    /// `j⟨`, left interface `s_j`.
    Left,
    /// `j⟩`, right interface `e_j`.
    Right,
    /// `j⟨]`, left overlap `[s_j, e_{j−1}]`.
    LeftOverlap,
    /// `j[⟩`, right overlap `[s_{j+1}, e_j]`.
    RightOverlap,
    /// `j]`, end of the left overlap `e_{j−1}`.
    LeftOverlapEnd,
    /// `j[`, end of the right overlap `s_{j+1}`.
    RightOverlapEnd,
    /// `j•`, everything but the two interfaces.
    Interior,
    /// `j⟨•]`, open left overlap `(s_j, e_{j−1})`.
    LeftOverlapInterior,
    /// `j[•⟩`, open right overlap `(s_{j+1}, e_j)`.
    RightOverlapInterior,
    /// `j[•]`, the subdomain without its overlaps.
    Core,
    /// `∼j`, everything left of the subdomain.
    ExteriorLeft,
    /// `j∼`, everything right of the subdomain.
    ExteriorRight,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSet {
    pub j: usize,
    pub tag: Tag,
    /// Sorted global unknown indices.
    pub indices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StripPartition {
    pub kind: PartitionKind,
    /// Unknowns per line.
    pub m: usize,
    pub n_lines: usize,
    /// Interior lines of each overlap (0 when non-overlapping).
    pub overlap: usize,
    pub starts: Vec<usize>,
    pub ends: Vec<usize>,
}

/// Interface positions from splitting the `nx + 1` physical cells into
/// `parts` strips, leftmost strips taking the remainder.
fn base_interfaces(op: &SparseOperator, parts: usize) -> Result<Vec<usize>, PartitionError> {
    let cells = (1.0 / op.h).round() as usize;
    if parts == 0 || parts > cells / 2 {
        return Err(PartitionError::TooManyStrips { j: parts, lines: op.n_lines() });
    }
    let base = cells / parts;
    let rem = cells % parts;
    let mut g = 0i64;
    let mut out = Vec::with_capacity(parts.saturating_sub(1));
    for j in 0..parts - 1 {
        g += (base + usize::from(j < rem)) as i64;
        out.push(op.xaxis.position(g).expect("interface inside the layout"));
    }
    Ok(out)
}

/// Strip partition: non-overlapping for `overlap_lines = 0`, otherwise
/// every pair of neighbours shares `overlap_lines` interior lines.
pub fn make_strip_partition(op: &SparseOperator, j: usize, overlap_lines: usize) -> Result<StripPartition, PartitionError> {
    let g = base_interfaces(op, j)?;
    let last = op.n_lines() - 1;
    let mut starts = vec![0];
    let mut ends = Vec::with_capacity(j);
    for &gi in &g {
        if overlap_lines == 0 {
            starts.push(gi);
            ends.push(gi);
        } else {
            let back = overlap_lines.div_ceil(2);
            let s = gi.checked_sub(back).ok_or(PartitionError::OverlapTooWide(overlap_lines))?;
            starts.push(s);
            ends.push(s + overlap_lines + 1);
        }
    }
    ends.push(last);
    let p = StripPartition {
        kind: if overlap_lines == 0 { PartitionKind::NonOverlapping } else { PartitionKind::Overlapping },
        m: op.m(),
        n_lines: op.n_lines(),
        overlap: overlap_lines,
        starts,
        ends,
    };
    p.validate().map_err(|e| match e {
        PartitionError::Invalid(_) if overlap_lines > 0 => PartitionError::OverlapTooWide(overlap_lines),
        e => e,
    })?;
    Ok(p)
}

/// Generous-overlap layout: `j + 1` base strips with separators
/// `c_1..c_j`; subdomain `i` spans `[c_i, c_{i+2}]` with `c_0` and
/// `c_{j+1}` the first and last lines.
pub fn make_source_transfer_partition(op: &SparseOperator, j: usize) -> Result<StripPartition, PartitionError> {
    let mut c = vec![0];
    c.extend(base_interfaces(op, j + 1)?);
    c.push(op.n_lines() - 1);
    let starts: Vec<usize> = (0..j).map(|i| c[i]).collect();
    let ends: Vec<usize> = (0..j).map(|i| c[i + 2]).collect();
    let thinnest = (1..j).map(|i| c[i + 1] - c[i] - 1).min().unwrap_or(usize::MAX);
    if thinnest < 2 {
        return Err(PartitionError::OverlapTooThin(thinnest));
    }
    let p = StripPartition {
        kind: PartitionKind::SourceTransfer,
        m: op.m(),
        n_lines: op.n_lines(),
        overlap: if j > 1 { thinnest } else { 0 },
        starts,
        ends,
    };
    p.validate()?;
    Ok(p)
}

fn range(a: usize, b: usize) -> Vec<usize> {
    if a > b {
        vec![]
    } else {
        (a..=b).collect()
    }
}

fn open(a: usize, b: usize) -> Vec<usize> {
    if b <= a + 1 {
        vec![]
    } else {
        (a + 1..b).collect()
    }
}

impl StripPartition {
    pub fn count(&self) -> usize {
        self.starts.len()
    }

    pub fn len(&self, j: usize) -> usize {
        self.ends[j] - self.starts[j] + 1
    }

    /// Unknowns of subdomain `j`.
    pub fn dim(&self, j: usize) -> usize {
        self.len(j) * self.m
    }

    /// Line positions carrying `tag` in subdomain `j`.
    pub fn lines(&self, j: usize, tag: Tag) -> Result<Vec<usize>, PartitionError> {
        let jc = self.count();
        if j >= jc {
            return Err(PartitionError::NoSubdomain { j, count: jc });
        }
        if self.kind == PartitionKind::NonOverlapping && matches!(tag, Tag::LeftOverlapInterior | Tag::RightOverlapInterior) {
            return Err(PartitionError::TagNeedsOverlap(tag));
        }
        let (s, e) = (self.starts[j], self.ends[j]);
        let has_left = j > 0;
        let has_right = j + 1 < jc;
        let l = match tag {
            Tag::Full => range(s, e),
            Tag::Left => if has_left { vec![s] } else { vec![] },
            Tag::Right => if has_right { vec![e] } else { vec![] },
            Tag::LeftOverlap => if has_left { range(s, self.ends[j - 1]) } else { vec![] },
            Tag::RightOverlap => if has_right { range(self.starts[j + 1], e) } else { vec![] },
            Tag::LeftOverlapEnd => if has_left { vec![self.ends[j - 1]] } else { vec![] },
            Tag::RightOverlapEnd => if has_right { vec![self.starts[j + 1]] } else { vec![] },
            Tag::Interior => range(s + usize::from(has_left), e - usize::from(has_right)),
            Tag::LeftOverlapInterior => if has_left { open(s, self.ends[j - 1]) } else { vec![] },
            Tag::RightOverlapInterior => if has_right { open(self.starts[j + 1], e) } else { vec![] },
            Tag::Core => {
                let lo = if has_left { self.ends[j - 1] + 1 } else { s };
                let hi = if has_right { self.starts[j + 1] as isize - 1 } else { e as isize };
                if hi < lo as isize { vec![] } else { range(lo, hi as usize) }
            }
            Tag::ExteriorLeft => (0..s).collect(),
            Tag::ExteriorRight => (e + 1..self.n_lines).collect(),
        };
        Ok(l)
    }

    pub fn index_set(&self, j: usize, tag: Tag) -> Result<IndexSet, PartitionError> {
        let m = self.m;
        let indices = self.lines(j, tag)?.into_iter().flat_map(|p| p * m..(p + 1) * m).collect();
        Ok(IndexSet { j, tag, indices })
    }

    /// `R_j v`.
    pub fn restrict(&self, j: usize, v: &[C64]) -> Vec<C64> {
        v[self.starts[j] * self.m..(self.ends[j] + 1) * self.m].to_vec()
    }

    /// `u += R_jᵀ v_j`.
    pub fn extend_add(&self, j: usize, vj: &[C64], u: &mut [C64]) {
        let off = self.starts[j] * self.m;
        for (a, b) in u[off..off + vj.len()].iter_mut().zip(vj) {
            *a += b;
        }
    }

    /// Checks coverage, ordering and the separation of non-neighbours.
    /// Source-transfer layouts allow `Ω_j` and `Ω_{j+2}` to touch in one line.
    pub fn validate(&self) -> Result<(), PartitionError> {
        let jc = self.count();
        let bad = |s: String| Err(PartitionError::Invalid(s));
        if jc == 0 || self.ends.len() != jc {
            return bad("empty partition".into());
        }
        if self.starts[0] != 0 || self.ends[jc - 1] != self.n_lines - 1 {
            return bad("subdomains do not reach both ends".into());
        }
        for j in 0..jc {
            if self.ends[j] < self.starts[j] + 2 {
                return bad(format!("subdomain {j} has no interior line"));
            }
        }
        for j in 0..jc.saturating_sub(1) {
            let (s1, e0) = (self.starts[j + 1], self.ends[j]);
            if s1 <= self.starts[j] || self.ends[j + 1] <= e0 {
                return bad(format!("subdomains {j} and {} are not ordered", j + 1));
            }
            if s1 > e0 {
                return bad(format!("gap between subdomains {j} and {}", j + 1));
            }
            if self.kind == PartitionKind::NonOverlapping && s1 != e0 {
                return bad(format!("subdomains {j} and {} overlap", j + 1));
            }
        }
        for j in 0..jc.saturating_sub(2) {
            let touch = self.starts[j + 2] as isize - self.ends[j] as isize;
            let ok = match self.kind {
                PartitionKind::SourceTransfer => touch == 0,
                _ => touch >= 2,
            };
            if !ok {
                return bad(format!("subdomains {j} and {} are not separated as required", j + 2));
            }
        }
        if self.kind == PartitionKind::Overlapping {
            for j in 0..jc {
                if self.lines(j, Tag::Core)?.is_empty() {
                    return bad(format!("subdomain {j} has an empty core"));
                }
            }
        }
        Ok(())
    }

    /// Restricted 0/1 weights for gluing.
    pub fn weighting(&self, direction: Direction) -> WeightingOperator {
        let jc = self.count();
        let phi = (0..jc)
            .map(|j| {
                let (s, e) = (self.starts[j], self.ends[j]);
                // global line range carrying weight 1
                let (lo, hi) = match direction {
                    Direction::Forward => (
                        if j == 0 { s } else { s + 1 },
                        if j + 1 < jc { self.starts[j + 1] } else { e },
                    ),
                    Direction::Backward => (
                        if j == 0 { s } else { self.ends[j - 1] },
                        if j + 1 < jc { e - 1 } else { e },
                    ),
                };
                (s..=e).map(|p| if p >= lo && p <= hi { 1.0 } else { 0.0 }).collect()
            })
            .collect();
        WeightingOperator { direction, m: self.m, starts: self.starts.clone(), phi }
    }

    /// Damping matrix `D_j` of source transfer as per-line 0/1 values over
    /// `Ω_j`: one up to `s_{j+1}`, then through the first half of the open
    /// right overlap, zero afterwards.
    pub fn source_transfer_damping(&self, j: usize) -> Vec<f64> {
        let (s, e) = (self.starts[j], self.ends[j]);
        if j + 1 >= self.count() {
            return vec![1.0; e - s + 1];
        }
        let c = self.starts[j + 1];
        let n_int = e - c - 1;
        let keep = n_int.div_ceil(2);
        (s..=e).map(|p| if p <= c + keep { 1.0 } else { 0.0 }).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

/// Diagonal 0/1 weights `Φ_j` per subdomain, stored per line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightingOperator {
    pub direction: Direction,
    pub m: usize,
    pub starts: Vec<usize>,
    pub phi: Vec<Vec<f64>>,
}

impl WeightingOperator {
    /// `Φ_j v_j` for a local vector.
    pub fn apply_local(&self, j: usize, vj: &[C64]) -> Vec<C64> {
        let m = self.m;
        vj.iter().enumerate().map(|(i, v)| v * self.phi[j][i / m]).collect()
    }

    /// `u += R_jᵀ Φ_j v_j`.
    pub fn extend_add(&self, j: usize, vj: &[C64], u: &mut [C64]) {
        let m = self.m;
        let off = self.starts[j] * m;
        for (i, v) in vj.iter().enumerate() {
            let w = self.phi[j][i / m];
            if w != 0.0 {
                u[off + i] += v * w;
            }
        }
    }

    /// `Σ_j R_jᵀ Φ_j v_j`.
    pub fn glue(&self, parts: &[Vec<C64>], n: usize) -> Vec<C64> {
        let mut u = vec![C64::new(0.0, 0.0); n];
        for (j, vj) in parts.iter().enumerate() {
            self.extend_add(j, vj, &mut u);
        }
        u
    }

    /// Per-line sum `Σ_j R_jᵀ Φ_j R_j` (all ones for a partition of unity).
    pub fn line_sums(&self, n_lines: usize) -> Vec<f64> {
        let mut s = vec![0.0; n_lines];
        for (j, phi) in self.phi.iter().enumerate() {
            for (i, w) in phi.iter().enumerate() {
                s[self.starts[j] + i] += w;
            }
        }
        s
    }

    /// Whether `(R_jᵀΦ_j) R_j (R_lᵀΦ_l) = 0` for all `j ≠ l`, i.e. no line
    /// carrying weight in `Φ_l` lies inside `Ω_j` with weight in `Φ_j`.
    pub fn is_restricted(&self, p: &StripPartition) -> bool {
        for j in 0..self.phi.len() {
            for l in 0..self.phi.len() {
                if j == l {
                    continue;
                }
                for (i, wl) in self.phi[l].iter().enumerate() {
                    let line = self.starts[l] + i;
                    if *wl != 0.0 && line >= p.starts[j] && line <= p.ends[j] && self.phi[j][line - p.starts[j]] != 0.0 {
                        return false;
                    }
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble_helmholtz;
    use crate::mesh::{build_grid, BoundaryCondition, BoundarySpec, MediumProfile, PmlSpec};

    fn op(n: usize, bc: BoundarySpec) -> SparseOperator {
        let g = build_grid(n, n).unwrap();
        let pml = bc.left.pml_width().map(|w| PmlSpec::new(w, g.h, 10.0));
        assemble_helmholtz(&g, &MediumProfile::constant(10.0), &bc, pml.as_ref()).unwrap()
    }

    fn physical(o: &SparseOperator, p: &[usize]) -> Vec<i64> {
        p.iter().map(|&i| o.xaxis.nodes[i].idx).collect()
    }

    #[test]
    fn regular_interfaces_at_quarters() {
        let o = op(63, BoundarySpec::dirichlet());
        let p = make_strip_partition(&o, 4, 0).unwrap();
        assert_eq!(physical(&o, &p.starts[1..]), vec![16, 32, 48]);
        assert_eq!(physical(&o, &p.ends[..3]), vec![16, 32, 48]);
        assert_eq!(p.starts[0], 0);
        assert_eq!(p.ends[3], o.n_lines() - 1);
        assert_eq!(make_strip_partition(&o, 16, 0).unwrap().count(), 16);
        let one = make_strip_partition(&o, 1, 0).unwrap();
        assert_eq!((one.starts.clone(), one.ends.clone()), (vec![0], vec![62]));
    }

    #[test]
    fn remainder_goes_left() {
        let o = op(9, BoundarySpec::guide(BoundaryCondition::Robin));
        let p = make_strip_partition(&o, 3, 0).unwrap();
        // 10 cells into 3 strips: 4, 3, 3
        assert_eq!(physical(&o, &p.starts[1..]), vec![4, 7]);
    }

    #[test]
    fn nonoverlapping_tags_collapse() {
        let o = op(15, BoundarySpec::dirichlet());
        let p = make_strip_partition(&o, 4, 0).unwrap();
        for j in 1..4 {
            let a = p.index_set(j, Tag::Left).unwrap().indices;
            assert_eq!(a, p.index_set(j, Tag::LeftOverlapEnd).unwrap().indices);
            assert_eq!(a, p.index_set(j, Tag::LeftOverlap).unwrap().indices);
            assert_eq!(p.lines(j, Tag::Interior).unwrap(), p.lines(j, Tag::Core).unwrap());
        }
        assert!(p.index_set(0, Tag::Left).unwrap().indices.is_empty());
        assert!(p.index_set(3, Tag::Right).unwrap().indices.is_empty());
        assert!(matches!(p.lines(0, Tag::RightOverlapInterior), Err(PartitionError::TagNeedsOverlap(_))));
        assert!(matches!(p.lines(4, Tag::Full), Err(PartitionError::NoSubdomain { .. })));
    }

    #[test]
    fn overlap_interior_counts() {
        let o = op(31, BoundarySpec::dirichlet());
        let p = make_strip_partition(&o, 4, 2).unwrap();
        for j in 0..3 {
            assert_eq!(p.index_set(j, Tag::RightOverlapInterior).unwrap().indices.len(), 2 * 31);
            assert_eq!(p.lines(j, Tag::RightOverlapEnd).unwrap(), vec![p.starts[j + 1]]);
        }
        assert!(make_strip_partition(&o, 4, 7).is_err());
    }

    #[test]
    fn weights_form_restricted_partitions_of_unity() {
        let o = op(31, BoundarySpec::guide(BoundaryCondition::Pml(3)));
        for p in [
            make_strip_partition(&o, 4, 0).unwrap(),
            make_strip_partition(&o, 4, 3).unwrap(),
            make_source_transfer_partition(&o, 3).unwrap(),
        ] {
            for d in [Direction::Forward, Direction::Backward] {
                let w = p.weighting(d);
                assert!(w.line_sums(o.n_lines()).iter().all(|&s| s == 1.0), "{:?} {:?}", p.kind, d);
                assert!(w.is_restricted(&p));
            }
            let f = p.weighting(Direction::Forward);
            let b = p.weighting(Direction::Backward);
            for j in 1..p.count() {
                assert_eq!(f.phi[j][0], 0.0);
                assert_eq!(f.phi[j - 1][p.starts[j] - p.starts[j - 1]], 1.0);
                assert_eq!(b.phi[j - 1][p.len(j - 1) - 1], 0.0);
            }
        }
    }

    #[test]
    fn source_transfer_layout_contacts() {
        let o = op(31, BoundarySpec::dirichlet());
        let p = make_source_transfer_partition(&o, 3).unwrap();
        assert_eq!(p.ends[0], p.starts[2]);
        assert!(p.lines(1, Tag::Core).unwrap().is_empty());
        for j in 0..2 {
            let d = p.source_transfer_damping(j);
            let c = p.starts[j + 1] - p.starts[j];
            assert_eq!(d[c], 1.0);
            assert_eq!(d[c + 1], 1.0);
            assert_eq!(d[d.len() - 1], 0.0);
            assert_eq!(d[d.len() - 2], 0.0);
        }
        let thin = op(7, BoundarySpec::dirichlet());
        assert!(matches!(make_source_transfer_partition(&thin, 3), Err(PartitionError::OverlapTooThin(_)) | Err(PartitionError::TooManyStrips { .. })));
    }
}
