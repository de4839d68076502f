//! Grid, layered medium and boundary descriptions for the unit square.
//!
//! Gridlines are indexed by their physical position: line `i` sits at
//! `x = i·h` with `h = 1/(nx+1)`. Interior Dirichlet lines are `1..=nx`;
//! Robin sides add the boundary line itself and PML sides append extra
//! lines outside `[0, 1]`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("grid needs at least 2 interior points per axis, got {0}x{1}")]
    TooSmall(usize, usize),
    #[error("only square cells are supported (nx = {0}, ny = {1})")]
    Anisotropic(usize, usize),
    #[error("medium lists must be non-empty and equally long")]
    BadMedium,
    #[error("x = {0} lies outside (0, 1)")]
    OutOfDomain(f64),
    #[error("layer edges must increase strictly inside (0, 1)")]
    BadEdges,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
}

/// Square grid of `nx × ny` interior points on the unit square.
pub fn build_grid(nx: usize, ny: usize) -> Result<Grid2D, MeshError> {
    if nx < 2 || ny < 2 {
        return Err(MeshError::TooSmall(nx, ny));
    }
    if nx != ny {
        return Err(MeshError::Anisotropic(nx, ny));
    }
    Ok(Grid2D { nx, ny, h: 1.0 / (nx as f64 + 1.0) })
}

impl Grid2D {
    /// Interior unknowns before any PML extension.
    pub fn n_interior(&self) -> usize {
        self.nx * self.ny
    }

    /// Cells across the domain in x, i.e. `nx + 1`.
    pub fn cells(&self) -> usize {
        self.nx + 1
    }

    /// x-coordinate of gridline `i`. Computed as a single rounded division
    /// so that lines landing on a layer edge compare exactly.
    pub fn x(&self, i: i64) -> f64 {
        i as f64 / (self.nx as f64 + 1.0)
    }

    pub fn y(&self, j: i64) -> f64 {
        j as f64 / (self.ny as f64 + 1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MediumProfile {
    /// Interior breakpoints, strictly increasing in (0, 1).
    pub layer_edges: Vec<f64>,
    pub base_k: Vec<f64>,
    pub delta_k: Vec<f64>,
    pub alpha: f64,
}

/// `4·repeats`-style layered profile: layer `l` gets
/// `base[l mod n] + alpha·delta[l mod n]`, all layers of equal width.
pub fn layered_wavenumber(
    base: &[f64],
    delta: &[f64],
    alpha: f64,
    repeats: usize,
) -> Result<MediumProfile, MeshError> {
    if base.is_empty() || base.len() != delta.len() || repeats == 0 {
        return Err(MeshError::BadMedium);
    }
    let n = base.len() * repeats;
    let layer_edges = (1..n).map(|l| l as f64 / n as f64).collect();
    let base_k = (0..n).map(|l| base[l % base.len()]).collect();
    let delta_k = (0..n).map(|l| delta[l % delta.len()]).collect();
    Ok(MediumProfile { layer_edges, base_k, delta_k, alpha })
}

impl MediumProfile {
    pub fn constant(k: f64) -> Self {
        MediumProfile { layer_edges: vec![], base_k: vec![k], delta_k: vec![0.0], alpha: 0.0 }
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        if self.base_k.is_empty()
            || self.base_k.len() != self.delta_k.len()
            || self.layer_edges.len() + 1 != self.base_k.len()
        {
            return Err(MeshError::BadMedium);
        }
        let mut prev = 0.0;
        for &e in &self.layer_edges {
            if !(e > prev && e < 1.0) {
                return Err(MeshError::BadEdges);
            }
            prev = e;
        }
        Ok(())
    }

    pub fn n_layers(&self) -> usize {
        self.base_k.len()
    }

    pub fn layer_k(&self, l: usize) -> f64 {
        self.base_k[l] + self.alpha * self.delta_k[l]
    }

    /// Layer containing `x`; edges belong to the layer on their right.
    /// Points outside `[0, 1]` are clamped to the outermost layers.
    pub fn layer_of(&self, x: f64) -> usize {
        self.layer_edges.iter().take_while(|&&e| x >= e).count()
    }

    /// Wavenumber at any x, extended by constants outside the unit interval.
    pub fn k_clamped(&self, x: f64) -> f64 {
        self.layer_k(self.layer_of(x))
    }

    pub fn k_max(&self) -> f64 {
        (0..self.n_layers()).map(|l| self.layer_k(l)).fold(f64::MIN, f64::max)
    }

    pub fn k_min(&self) -> f64 {
        (0..self.n_layers()).map(|l| self.layer_k(l)).fold(f64::MAX, f64::min)
    }
}

/// k(x) for 0 < x < 1.
pub fn evaluate_k(profile: &MediumProfile, x: f64) -> Result<f64, MeshError> {
    if !(x > 0.0 && x < 1.0) {
        return Err(MeshError::OutOfDomain(x));
    }
    Ok(profile.k_clamped(x))
}

/// At least ten points per wavelength: `h·k_max ≤ 2π/10`.
pub fn resolution_ok(grid: &Grid2D, profile: &MediumProfile) -> bool {
    grid.h * profile.k_max() <= 2.0 * std::f64::consts::PI / 10.0 + 1e-12
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryCondition {
    Dirichlet,
    Robin,
    Pml(usize),
}

impl BoundaryCondition {
    pub fn pml_width(&self) -> Option<usize> {
        match self {
            BoundaryCondition::Pml(w) => Some(*w),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub left: BoundaryCondition,
    pub right: BoundaryCondition,
    pub bottom: BoundaryCondition,
    pub top: BoundaryCondition,
    /// `p0` in `∂n u + p0 u = 0`; `None` means `-i·k` at the boundary point.
    pub robin_coefficient: Option<C64>,
}

impl BoundarySpec {
    pub fn dirichlet() -> Self {
        Self::guide(BoundaryCondition::Dirichlet)
    }

    /// Wave guide: Dirichlet top and bottom, `outer` on the left and right.
    pub fn guide(outer: BoundaryCondition) -> Self {
        BoundarySpec {
            left: outer,
            right: outer,
            bottom: BoundaryCondition::Dirichlet,
            top: BoundaryCondition::Dirichlet,
            robin_coefficient: None,
        }
    }

    /// Open domain: `outer` on all four sides.
    pub fn open(outer: BoundaryCondition) -> Self {
        BoundarySpec { left: outer, right: outer, bottom: outer, top: outer, robin_coefficient: None }
    }

    pub fn pml_widths(&self) -> Vec<usize> {
        [self.left, self.right, self.bottom, self.top].iter().filter_map(|b| b.pml_width()).collect()
    }

    pub fn has_pml(&self) -> bool {
        !self.pml_widths().is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PmlSpec {
    pub width_cells: usize,
    pub sigma0: f64,
    pub profile_exponent: i32,
    pub omega: f64,
}

/// Target round-trip amplitude through the layer.
pub const PML_REFLECTION: f64 = 1e-4;

impl PmlSpec {
    /// Quadratic profile with the smallest `sigma0` giving a round trip of
    /// `PML_REFLECTION` for a wave with wavenumber `omega`.
    pub fn new(width_cells: usize, h: f64, omega: f64) -> Self {
        let p = 2;
        let delta = width_cells as f64 * h;
        let sigma0 = (p as f64 + 1.0) * (1.0 / PML_REFLECTION).ln() / (2.0 * delta);
        PmlSpec { width_cells, sigma0, profile_exponent: p, omega }
    }

    pub fn thickness(&self, h: f64) -> f64 {
        self.width_cells as f64 * h
    }

    /// Stretch factor at depth `t ≥ 0` into the layer.
    pub fn stretch(&self, t: f64, h: f64) -> C64 {
        if t <= 0.0 {
            return C64::new(1.0, 0.0);
        }
        let d = self.thickness(h);
        let sigma = self.sigma0 * (t.min(d) / d).powi(self.profile_exponent);
        C64::new(1.0, sigma / self.omega)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        let g = build_grid(63, 63).unwrap();
        assert_eq!(g.h, 1.0 / 64.0);
        assert_eq!(g.n_interior(), 3969);
        let g = build_grid(2, 2).unwrap();
        assert!((g.h - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(g.n_interior(), 4);
        let g = build_grid(127, 127).unwrap();
        assert_eq!(g.h, 1.0 / 128.0);
        assert_eq!(g.n_interior(), 16129);
    }

    #[test]
    fn grid_rejects_bad_shapes() {
        assert_eq!(build_grid(1, 5), Err(MeshError::TooSmall(1, 5)));
        assert_eq!(build_grid(8, 9), Err(MeshError::Anisotropic(8, 9)));
    }

    #[test]
    fn table_profiles() {
        let p = layered_wavenumber(&[20.0; 4], &[0.0, 20.0, 10.0, -10.0], 1.0, 1).unwrap();
        let ks: Vec<f64> = (0..4).map(|l| p.layer_k(l)).collect();
        assert_eq!(ks, vec![20.0, 40.0, 30.0, 10.0]);
        let p = layered_wavenumber(&[40.0; 4], &[0.0, 40.0, 20.0, -20.0], 0.05, 1).unwrap();
        let ks: Vec<f64> = (0..4).map(|l| p.layer_k(l)).collect();
        for (a, b) in ks.iter().zip([40.0, 42.0, 41.0, 39.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let p = layered_wavenumber(&[20.0; 4], &[0.0, 20.0, 10.0, -10.0], 0.0, 4).unwrap();
        assert_eq!(p.n_layers(), 16);
        assert!((0..16).all(|l| p.layer_k(l) == 20.0));
    }

    #[test]
    fn evaluate_with_ties() {
        let p = layered_wavenumber(&[20.0; 4], &[0.0, 20.0, 10.0, -10.0], 1.0, 1).unwrap();
        assert_eq!(evaluate_k(&p, 0.3).unwrap(), 40.0);
        assert_eq!(evaluate_k(&p, 0.25).unwrap(), 40.0);
        assert_eq!(evaluate_k(&p, 0.1).unwrap(), 20.0);
        assert!(evaluate_k(&p, 0.0).is_err());
        assert!(evaluate_k(&p, 1.0).is_err());
    }

    #[test]
    fn empty_medium_rejected() {
        assert_eq!(layered_wavenumber(&[], &[], 1.0, 1), Err(MeshError::BadMedium));
        assert_eq!(layered_wavenumber(&[1.0], &[1.0, 2.0], 1.0, 1), Err(MeshError::BadMedium));
    }

    #[test]
    fn gridline_on_edge_goes_right() {
        // 12/48 must land exactly on the 0.25 edge
        let g = build_grid(47, 47).unwrap();
        let p = layered_wavenumber(&[1.0, 2.0, 3.0, 4.0], &[0.0; 4], 0.0, 1).unwrap();
        assert_eq!(p.k_clamped(g.x(12)), 2.0);
        assert_eq!(p.k_clamped(g.x(11)), 1.0);
    }

    #[test]
    fn pml_round_trip_factor() {
        let h = 1.0 / 64.0;
        let pml = PmlSpec::new(5, h, 20.0);
        let d = pml.thickness(h);
        let integral = pml.sigma0 * d / 3.0;
        assert!(((-2.0 * integral).exp() - PML_REFLECTION).abs() < 1e-12);
        assert_eq!(pml.stretch(0.0, h), C64::new(1.0, 0.0));
    }
}
