//! Verification suites: exactness of the transparent configurations,
//! iterate-level equivalences between algorithm forms, and structural
//! identities of the discretization and the partitions.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::assembly::{random_source, SparseOperator};
use crate::linalg::{block_tridiag_factor, schur_recurrence, DenseComplexMatrix};
use crate::mesh::{build_grid, layered_wavenumber, BoundaryCondition, BoundarySpec, PmlSpec};
use crate::partition::{make_source_transfer_partition, make_strip_partition, Direction, StripPartition};
use crate::precond::source_transfer::check_damping;
use crate::precond::{
    closures, subdomain_system, Closure, Dosm, DosmOptions, Gdc, GdcVariant, GlobalOsm, LuSweep, PolarizedTraces, Posm,
    norm, Problem, ResidualSubstructuring, Slp, SlpForm, SourceTransfer, Splitting, SubstructuredDosm,
};
use crate::transmission::{IfaceSide, TransmissionKind};

pub const SUITES: [&str; 3] = ["nilpotency", "equivalence", "structure"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub config: String,
    pub measured: f64,
    pub tol: f64,
    /// `true` when the measurement must stay at or below `tol`, `false`
    /// when it must reach at least `tol`.
    pub upper: bool,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, config: String, measured: f64, tol: f64) -> Check {
        Check { name: name.into(), config, measured, tol, upper: true, pass: measured <= tol }
    }

    pub fn at_least(name: &str, config: String, measured: f64, tol: f64) -> Check {
        Check { name: name.into(), config, measured, tol, upper: false, pass: measured >= tol }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn new(suite: &str, checks: Vec<Check>) -> SuiteReport {
        let pass = checks.iter().all(|c| c.pass);
        SuiteReport { suite: suite.into(), checks, pass }
    }

    /// Checks whose name starts with `prefix`.
    pub fn named<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Check> + 'a {
        self.checks.iter().filter(move |c| c.name.starts_with(prefix))
    }
}

pub fn verify_suite(name: &str) -> Result<SuiteReport, HarnessError> {
    let checks = match name {
        "nilpotency" => nilpotency(),
        "equivalence" => equivalence(),
        "structure" => structure(),
        _ => return Err(HarnessError::Config(format!("unknown suite `{name}`, expected one of {SUITES:?}"))),
    };
    Ok(SuiteReport::new(name, checks))
}

/// Layered test problem: four layers `10 + α[0, 10, 5, −5]` on an `n × n`
/// grid, guide with Robin ends or PML all around.
pub fn suite_problem(n: usize, alpha: f64, open: bool) -> Problem {
    let grid = build_grid(n, n).expect("suite grids are valid");
    let medium = layered_wavenumber(&[10.0; 4], &[0.0, 10.0, 5.0, -5.0], alpha, 1).expect("suite medium is valid");
    let (bc, pml) = if open {
        (BoundarySpec::open(BoundaryCondition::Pml(4)), Some(PmlSpec::new(4, grid.h, medium.layer_k(0))))
    } else {
        (BoundarySpec::guide(BoundaryCondition::Robin), None)
    };
    Problem::new(grid, medium, bc, pml).expect("suite problems assemble")
}

fn rel(a: &[C64], b: &[C64]) -> f64 {
    let d: Vec<C64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&d) / norm(b).max(1e-300)
}

fn rel_residual(op: &SparseOperator, u: &[C64], f: &[C64]) -> f64 {
    let r: Vec<C64> = op.mul(u).iter().zip(f).map(|(a, b)| b - a).collect();
    norm(&r) / norm(f)
}

fn direct(pb: &Problem, f: &[C64]) -> Vec<C64> {
    block_tridiag_factor(&pb.op.to_block_system()).expect("suite problems are nonsingular").solve(f)
}

fn strips(pb: &Problem, jc: usize) -> StripPartition {
    make_strip_partition(&pb.op, jc, 0).expect("strip counts fit the suite grids")
}

fn tag(n: usize, jc: usize, alpha: f64, open: bool) -> String {
    format!("n={n} J={jc} alpha={alpha} {}", if open { "open/pml4" } else { "guide/robin" })
}

/// One application of each transparent method: relative residual of
/// `M⁻¹f`. POSM and the global method have their own counts.
pub fn nilpotency() -> Vec<Check> {
    let exact = TransmissionKind::Exact;
    let mut out = Vec::new();
    for open in [false, true] {
        for alpha in [0.0, 1.0] {
            let pb = suite_problem(32, alpha, open);
            let f = random_source(&pb.op, 7);
            for jc in [2, 4] {
                let t = tag(32, jc, alpha, open);
                let part = strips(&pb, jc);
                let res = |u: Vec<C64>| rel_residual(&pb.op, &u, &f);
                let dosm = Dosm::from_kinds(&pb, part.clone(), exact, exact).expect("exact closures build");
                out.push(Check::at_most("dosm-exact", t.clone(), res(dosm.apply(&f)), 1e-10));
                let lu = LuSweep::new(&pb, &part, exact).expect("exact LU builds");
                out.push(Check::at_most("lu-sweep-exact", t.clone(), res(lu.apply(&f)), 1e-10));
                let st_part = make_source_transfer_partition(&pb.op, jc).expect("source-transfer layout fits");
                let st = SourceTransfer::new(&pb, st_part, exact).expect("exact source transfer builds");
                out.push(Check::at_most("source-transfer-exact", t.clone(), res(st.apply(&f)), 1e-10));
                let pt = PolarizedTraces::new(&pb, part.clone(), exact, Splitting::default()).expect("polarized builds");
                out.push(Check::at_most("polarized-exact", t.clone(), res(pt.apply(&f)), 1e-10));
                let ash = Gdc::from_kinds(&pb, &part, exact, exact, GdcVariant::Ash).expect("exact ASH builds");
                out.push(Check::at_most("gdc-ash-exact", t.clone(), res(ash.apply(&f)), 1e-10));
                let sub = SubstructuredDosm::new(dosm.clone());
                let (it, rep) = sub.solve(&f, 1e-12, 10);
                out.push(Check::at_most("dosm-sub-gmres-steps", t.clone(), rep.iters as f64, 1.0));
                out.push(Check::at_most("dosm-sub-gmres-exact", t.clone(), res(dosm.glue(&it.full)), 1e-10));
            }
        }
    }
    out.extend(posm_counts(32, 1.0));
    out.extend(global_osm_exact(32, 1.0));
    out.extend(resid_sub_exact(32, 1.0));
    out
}

/// POSM with exact closures: still off after `J − 1` iterations, exact
/// after `J`.
pub fn posm_counts(n: usize, alpha: f64) -> Vec<Check> {
    let pb = suite_problem(n, alpha, true);
    let f = random_source(&pb.op, 19);
    let u = direct(&pb, &f);
    let mut out = Vec::new();
    for jc in [2, 3, 4] {
        let t = tag(n, jc, alpha, true);
        let posm = Posm::new(&pb, &strips(&pb, jc), TransmissionKind::Exact, TransmissionKind::Exact).expect("POSM builds");
        out.push(Check::at_least("posm-before-j", t.clone(), rel(&posm.glue(&posm.run(&f, jc - 1)), &u), 1e-3));
        out.push(Check::at_most("posm-after-j", t, rel(&posm.glue(&posm.run(&f, jc)), &u), 1e-10));
    }
    out
}

/// One two-phase application of the global method.
pub fn global_osm_exact(n: usize, alpha: f64) -> Vec<Check> {
    let mut out = Vec::new();
    for open in [false, true] {
        let pb = suite_problem(n, alpha, open);
        let f = random_source(&pb.op, 23);
        let u = direct(&pb, &f);
        for jc in [2, 4] {
            let g = GlobalOsm::new(&pb, &strips(&pb, jc), TransmissionKind::Exact).expect("global method builds");
            out.push(Check::at_most("global-osm-exact", tag(n, jc, alpha, open), rel(&g.apply(&f), &u), 1e-10));
        }
    }
    out
}

/// Residual substructuring over SLP form 2: exact reduced solve, reduced
/// dimension and where the kept rows sit.
pub fn resid_sub_exact(n: usize, alpha: f64) -> Vec<Check> {
    let pb = suite_problem(n, alpha, true);
    let f = random_source(&pb.op, 29);
    let part = strips(&pb, 4);
    let t = tag(n, 4, alpha, true);
    let slp = Slp::new(&pb, part.clone(), TransmissionKind::Pml(4), SlpForm::Two).expect("SLP builds");
    let rs = ResidualSubstructuring::new(&pb.op, slp);
    let sol = rs.solve(&f, 1e-13, 500);
    let m = pb.op.m();
    let stray = rs.rows().iter().filter(|&&i| !part.starts[1..].iter().any(|&s| i / m + 1 >= s && i / m <= s + 1)).count();
    vec![
        Check::at_most("resid-sub-exact", t.clone(), rel_residual(&pb.op, &sol.u, &f), 1e-10),
        Check::at_most("resid-sub-reduced-fraction", t.clone(), sol.reduced_dim as f64 / pb.op.dim() as f64, 0.5),
        Check::at_most("resid-sub-rows-off-interfaces", t, stray as f64, 0.0),
    ]
}

fn max_dev(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn max_abs(parts: &[Vec<C64>]) -> f64 {
    parts.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Largest subdomain-iterate discrepancy relative to the largest entry.
fn iterate_gap(a: &[Vec<C64>], b: &[Vec<C64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| max_dev(x, y)).fold(0.0, f64::max) / max_abs(b).max(1e-300)
}

/// Pairwise iterate comparisons in each theorem's configuration.
pub fn equivalence() -> Vec<Check> {
    let mut out = Vec::new();
    for n in [16, 32] {
        for (alpha, open) in [(0.1, false), (1.0, true)] {
            let pb = suite_problem(n, alpha, open);
            let f = random_source(&pb.op, 31);
            for jc in [3, 4] {
                let t = tag(n, jc, alpha, open);
                out.extend(equivalences(&pb, &f, jc, &t));
            }
        }
    }
    out
}

fn pml_side_closures(pb: &Problem, part: &StripPartition, w: usize) -> (Vec<(Closure, Closure)>, Vec<(Closure, Closure)>) {
    let jc = part.count();
    let mut b = pb.builder();
    let kind = TransmissionKind::Pml(w);
    let mut fwd = Vec::new();
    let mut bwd = Vec::new();
    for j in 0..jc {
        let l = if j == 0 { Closure::Physical } else { Closure::from_interface(&b.build(kind, part, j, IfaceSide::Left).expect("PML closure")) };
        let last = j + 1 == jc;
        let r = if last { Closure::Physical } else { Closure::from_interface(&b.build(kind, part, j, IfaceSide::Right).expect("PML closure")) };
        fwd.push((l.clone(), r));
        bwd.push((l, if last { Closure::Physical } else { Closure::Dirichlet }));
    }
    (fwd, bwd)
}

fn equivalences(pb: &Problem, f: &[C64], jc: usize, t: &str) -> Vec<Check> {
    let pml = TransmissionKind::Pml(4);
    let part = strips(pb, jc);
    let mut out = Vec::new();
    let dosm = Dosm::from_kinds(pb, part.clone(), pml, pml).expect("DOSM builds");
    let it1 = dosm.sweep(f);
    let it2 = dosm.iterate(f, Some(&it1.full));

    // global deferred correction, two iterations
    let gdc = Gdc::from_kinds(pb, &part, pml, pml, GdcVariant::Ras).expect("GDC builds");
    let g1 = gdc.apply(f);
    let g2 = gdc.iterate(f, g1.clone());
    let gap = rel(&g1, &dosm.glue(&it1.full)).max(rel(&g2, &dosm.glue(&it2.full)));
    out.push(Check::at_most("gdc-vs-dosm", t.into(), gap, 1e-10));

    // substructured form, three iterations
    let sub = SubstructuredDosm::new(dosm.clone());
    let mut lam = vec![vec![C64::new(0.0, 0.0); pb.op.m()]; jc - 1];
    let mut prev: Option<Vec<Vec<C64>>> = None;
    let mut gap: f64 = 0.0;
    for _ in 0..3 {
        let it = dosm.iterate(f, prev.as_deref());
        let st = sub.step(f, &lam);
        gap = gap.max(iterate_gap(&st.iterates.full, &it.full));
        lam = st.lambda;
        prev = Some(it.full);
    }
    out.push(Check::at_most("substructured-vs-dosm", t.into(), gap, 1e-10));

    // block LU with identity-extension blocks against the DOSM specialization
    let kind = TransmissionKind::IdentExt;
    let lu = LuSweep::new(pb, &part, kind).expect("LU builds");
    let mut b = pb.builder();
    let cl: Vec<(Closure, Closure)> = (0..jc)
        .map(|j| {
            let l = if j == 0 { Closure::Physical } else { Closure::from_interface(&b.build(kind, &part, j, IfaceSide::Left).expect("closure")) };
            (l, if j + 1 == jc { Closure::Physical } else { Closure::Dirichlet })
        })
        .collect();
    let spec = Dosm::new(&pb.op, part.clone(), &cl, &cl, DosmOptions::default()).expect("specialized DOSM builds");
    let (lus, it) = (lu.sweep(f), spec.sweep(f));
    let gap = (0..jc).map(|j| max_dev(&lus.u[j], &it.full[j][..lus.u[j].len()])).fold(0.0, f64::max) / max_abs(&it.full);
    out.push(Check::at_most("lu-vs-dosm", t.into(), gap, 1e-10));

    // source transfer against DOSM with PML closures and cut sources
    let st_part = make_source_transfer_partition(&pb.op, jc).expect("layout fits");
    let st = SourceTransfer::new(pb, st_part.clone(), pml).expect("source transfer builds");
    let (fwd, bwd) = pml_side_closures(pb, &st_part, 4);
    let cut = Dosm::new(&pb.op, st_part, &fwd, &bwd, DosmOptions { cut_forward_sources: true, ..DosmOptions::default() })
        .expect("cut DOSM builds");
    out.push(Check::at_most("source-transfer-vs-dosm", t.into(), rel(&st.apply(f), &cut.apply(f)), 1e-10));

    // SLP form 2 against the harmonic-extension variant with shared closures
    let slp = Slp::new(pb, part.clone(), pml, SlpForm::Two).expect("SLP builds");
    let shared: Vec<(Closure, Closure)> = (0..jc).map(|j| (slp.solver(j).left.clone(), slp.solver(j).right.clone())).collect();
    let ash = Gdc::new(&pb.op, &part, &shared, &shared, GdcVariant::Ash).expect("ASH builds");
    out.push(Check::at_most("slp2-vs-ash", t.into(), rel(&slp.apply(f), &ash.apply(f)), 1e-10));

    // polarized traces: interior lines against the DOSM iterate, with the
    // theorem's PML closures and with exact closures
    for (name, kind) in [("polarized-vs-dosm", pml), ("polarized-vs-dosm-exact-closures", TransmissionKind::Exact)] {
        let pt = PolarizedTraces::new(pb, part.clone(), kind, Splitting::default()).expect("polarized builds");
        let d = if kind == pml { it1.clone() } else { Dosm::from_kinds(pb, part.clone(), kind, kind).expect("DOSM builds").sweep(f) };
        let state = pt.run(f);
        let mut gap: f64 = 0.0;
        for j in 0..jc {
            let sv = pt.solver(j);
            let lo = if j == 0 { sv.s } else { sv.s + 1 };
            let hi = if j + 1 == jc { sv.e } else { sv.e - 1 };
            for p in lo..=hi {
                gap = gap.max(max_dev(sv.line(&state.v[j], p), sv.line(&d.full[j], p)));
            }
        }
        out.push(Check::at_most(name, t.into(), gap / max_abs(&d.full), 1e-10));
    }
    out
}

/// Structural identities on small grids.
pub fn structure() -> Vec<Check> {
    let mut out = Vec::new();
    for open in [false, true] {
        let pb = suite_problem(11, 1.0, open);
        let t = tag(11, 3, 1.0, open);
        out.push(Check::at_most("block-tridiagonal", t.clone(), off_tridiagonal(&pb.op), 0.0));
        out.push(Check::at_most("schur-recurrence-vs-dense", t.clone(), schur_gap(&pb), 1e-12));
        for (jc, overlap) in [(3, 0), (2, 2)] {
            let part = make_strip_partition(&pb.op, jc, overlap).expect("partition fits");
            for dir in [Direction::Forward, Direction::Backward] {
                let w = part.weighting(dir);
                let sums = w.line_sums(pb.op.n_lines());
                let gap = sums.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
                let name = format!("partition-of-unity-{overlap}-{dir:?}").to_lowercase();
                out.push(Check::at_most(&name, t.clone(), gap, 0.0));
                let restricted = if w.is_restricted(&part) { 0.0 } else { 1.0 };
                out.push(Check::at_most("weights-restricted", format!("{t} overlap={overlap}"), restricted, 0.0));
            }
        }
        let st = make_source_transfer_partition(&pb.op, 3).expect("layout fits");
        let bad = (0..st.count() - 1).filter(|&j| !check_damping(&pb.op, &st, j, &st.source_transfer_damping(j))).count();
        out.push(Check::at_most("damping-products-zero", t.clone(), bad as f64, 0.0));
        out.push(Check::at_most("splitting-invariance", t.clone(), splitting_gap(&pb), 1e-12));
    }
    out.push(Check::at_most("representation-formula", tag(8, 2, 0.5, false), representation_gap(), 1e-12));
    out
}

/// Largest `|A_{ij}|` with `i`, `j` on gridlines more than one apart.
fn off_tridiagonal(op: &SparseOperator) -> f64 {
    let a = op.to_dense();
    let m = op.m();
    let mut worst: f64 = 0.0;
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            if (r / m).abs_diff(c / m) > 1 {
                worst = worst.max(a.row(r)[c].norm());
            }
        }
    }
    worst
}

/// `T_j` from the recurrence against the Schur complement of the leading
/// block computed densely.
fn schur_gap(pb: &Problem) -> f64 {
    let sys = pb.op.to_block_system();
    let t = schur_recurrence(&sys).expect("recurrence runs");
    let a = sys.to_dense();
    let m = pb.op.m();
    let mut worst: f64 = 0.0;
    for (j, tj) in t.iter().enumerate() {
        let d = a.block(j * m, j * m, m, m);
        let s = if j == 0 {
            d
        } else {
            let k = j * m;
            let inv = a.block(0, 0, k, k).inverse().expect("leading blocks are nonsingular");
            d.sub(&a.block(k, 0, m, k).matmul(&inv).matmul(&a.block(0, k, k, m)))
        };
        worst = worst.max(tj.sub(&s).max_abs() / s.max_abs());
    }
    worst
}

fn splitting_gap(pb: &Problem) -> f64 {
    let f = random_source(&pb.op, 3);
    let part = strips(pb, 3);
    let a = PolarizedTraces::new(pb, part.clone(), TransmissionKind::Pml(3), Splitting { theta: 0.5 }).expect("polarized builds");
    let b = PolarizedTraces::new(pb, part, TransmissionKind::Pml(3), Splitting { theta: 1.0 }).expect("polarized builds");
    rel(&a.apply(&f), &b.apply(&f))
}

/// Discrete representation formula on an 8×8 grid with a dense inverse:
/// any boundary block reproduces the interior from the traces.
fn representation_gap() -> f64 {
    let pb = suite_problem(8, 0.5, false);
    let op = &pb.op;
    let m = op.m();
    let f = random_source(op, 17);
    let u = direct(&pb, &f);
    let part = strips(&pb, 2);
    let cl = closures(&mut pb.builder(), &part, TransmissionKind::Pml(3), TransmissionKind::Pml(3)).expect("closures");
    let g = subdomain_system(op, 0, op.n_lines() - 1, &cl[1].0, &Closure::Physical).to_dense().inverse().expect("invertible");
    let ab = DenseComplexMatrix::from_fn(m, m, |r, c| C64::new((r * 7 + c * 3) as f64 % 5.0 - 2.0, (r + c) as f64 * 0.1));
    let (ub, ui) = u.split_at(m);
    let abu = ab.matvec(ub);
    let mut r = f.clone();
    for q in 0..m {
        let lam = abu[q] + op.xcoup[0][q] * ui[q] - f[q];
        r[q] += lam - abu[q];
        r[m + q] -= op.xcoup[0][q] * ub[q];
    }
    let w = g.matvec(&r);
    max_dev(&w[m..], ui) / ui.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_a_config_error() {
        assert!(verify_suite("speed").unwrap_err().is_config());
    }

    #[test]
    fn structure_suite_passes() {
        let r = verify_suite("structure").unwrap();
        for c in &r.checks {
            assert!(c.pass, "{c:?}");
        }
    }

    #[test]
    fn check_directions() {
        assert!(Check::at_most("a", String::new(), 1e-12, 1e-10).pass);
        assert!(!Check::at_least("a", String::new(), 1e-4, 1e-3).pass);
    }
}
