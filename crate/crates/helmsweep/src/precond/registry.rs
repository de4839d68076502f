//! Method selection by name: one entry point that builds any of the
//! preconditioners from a problem, a strip count and a transmission kind.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{
    Dosm, Gdc, GdcVariant, GlobalOsm, LuSweep, PolarizedTraces, Posm, PrecondError, Problem, ResidualSubstructuring, Slp,
    SlpForm, SourceTransfer, Splitting, SubstructuredDosm,
};
use crate::linalg::LinearMap;
use crate::partition::{make_source_transfer_partition, make_strip_partition};
use crate::transmission::TransmissionKind;

pub const METHOD_NAMES: [&str; 11] = [
    "lu-sweep",
    "dosm",
    "dosm-gdc",
    "dosm-sub",
    "source-transfer",
    "slp1",
    "slp2",
    "polarized",
    "resid-sub",
    "posm",
    "global-osm",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub name: String,
    pub parts: usize,
    pub kind: TransmissionKind,
    /// Lines shared by neighbours for the overlapping methods.
    #[serde(default)]
    pub overlap: usize,
    /// Polarized splitting weight.
    #[serde(default = "half")]
    pub theta: f64,
}

fn half() -> f64 {
    0.5
}

impl MethodSpec {
    pub fn new(name: &str, parts: usize, kind: TransmissionKind) -> MethodSpec {
        MethodSpec { name: name.into(), parts, kind, overlap: 0, theta: 0.5 }
    }
}

/// `exact`, `ident-ext`, `pml:W`, `robin` or `dirichlet`.
pub fn parse_kind(s: &str) -> Result<TransmissionKind, PrecondError> {
    let bad = || PrecondError::Invalid(format!("unknown transmission kind `{s}`"));
    Ok(match s {
        "exact" => TransmissionKind::Exact,
        "ident-ext" => TransmissionKind::IdentExt,
        "robin" => TransmissionKind::Robin,
        "dirichlet" => TransmissionKind::Dirichlet,
        _ => {
            let w = s.strip_prefix("pml:").ok_or_else(bad)?;
            TransmissionKind::Pml(w.parse().map_err(|_| bad())?)
        }
    })
}

/// A built method. `ResidSub` is a solver, not a map; as a map it applies
/// its inner SLP.
pub enum Preconditioner {
    Map(Box<dyn LinearMap + Send + Sync>),
    ResidSub(ResidualSubstructuring<Slp>),
}

impl LinearMap for Preconditioner {
    fn dim(&self) -> usize {
        match self {
            Preconditioner::Map(m) => m.dim(),
            Preconditioner::ResidSub(r) => r.inner().dim(),
        }
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        match self {
            Preconditioner::Map(m) => m.apply(x),
            Preconditioner::ResidSub(r) => r.inner().apply(x),
        }
    }
}

pub fn build_method(pb: &Problem, spec: &MethodSpec) -> Result<Preconditioner, PrecondError> {
    let (j, kind) = (spec.parts, spec.kind);
    let strips = || make_strip_partition(&pb.op, j, spec.overlap);
    let map = |m: Box<dyn LinearMap + Send + Sync>| Ok(Preconditioner::Map(m));
    match spec.name.as_str() {
        "lu-sweep" => map(Box::new(LuSweep::new(pb, &make_strip_partition(&pb.op, j, 0)?, kind)?)),
        "dosm" => map(Box::new(Dosm::from_kinds(pb, strips()?, kind, kind)?)),
        "dosm-gdc" => map(Box::new(Gdc::from_kinds(pb, &strips()?, kind, kind, GdcVariant::Ras)?)),
        "dosm-sub" => map(Box::new(SubstructuredDosm::new(Dosm::from_kinds(pb, strips()?, kind, kind)?))),
        "source-transfer" => map(Box::new(SourceTransfer::new(pb, make_source_transfer_partition(&pb.op, j)?, kind)?)),
        "slp1" => map(Box::new(Slp::new(pb, strips()?, kind, SlpForm::One)?)),
        "slp2" => map(Box::new(Slp::new(pb, strips()?, kind, SlpForm::Two)?)),
        "polarized" => map(Box::new(PolarizedTraces::new(pb, strips()?, kind, Splitting { theta: spec.theta })?)),
        "resid-sub" => {
            let slp = Slp::new(pb, strips()?, kind, SlpForm::Two)?;
            Ok(Preconditioner::ResidSub(ResidualSubstructuring::new(&pb.op, slp)))
        }
        "posm" => map(Box::new(Posm::new(pb, &strips()?, kind, kind)?)),
        "global-osm" => map(Box::new(GlobalOsm::new(pb, &strips()?, kind)?)),
        other => Err(PrecondError::UnknownMethod(other.into())),
    }
}
