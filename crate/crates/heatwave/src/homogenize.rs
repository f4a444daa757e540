//! Nystrom collocation for the limiting integral equation
//! U = F - int g q U and the stationary average (I + B) psi = phi.
//!
//! The weakly singular diagonal uses the exact mean of the Newtonian kernel
//! over the collocation cell (closed-form box integral) plus a low-order
//! Gauss rule for the smooth screened remainder; off-diagonal cells use the
//! midpoint rule.

use crate::error::{Error, Result};
use crate::geometry::{Box3, Point3};
use crate::kernels::{green_kernel, FreeField};
use crate::linalg::solve_dense_complex;
use crate::manybody::{Provenance, ResolventField};
use crate::particles::MediumSpec;
use crate::quadrature::{box_gauss_points, box_inv_dist_integral};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Hard cap on collocation cells for the dense solve.
pub const IE_CELL_CAP: usize = 20_000;

/// Regular collocation mesh over a box.
#[derive(Debug, Clone)]
pub struct ContinuumGrid {
    pub bounds: Box3,
    pub n: [usize; 3],
}

impl ContinuumGrid {
    pub fn new(bounds: Box3, n: [usize; 3]) -> Result<Self> {
        if n.iter().any(|&k| k < 2) {
            return Err(Error::Domain(format!(
                "grid needs at least 2 cells per axis, got {n:?}"
            )));
        }
        if bounds.volume() <= 0.0 {
            return Err(Error::Domain("grid over an empty box".into()));
        }
        Ok(Self { bounds, n })
    }

    pub fn cube(bounds: Box3, n: usize) -> Result<Self> {
        Self::new(bounds, [n, n, n])
    }

    pub fn cells(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn cell_sides(&self) -> [f64; 3] {
        let s = self.bounds.sides();
        [
            s[0] / self.n[0] as f64,
            s[1] / self.n[1] as f64,
            s[2] / self.n[2] as f64,
        ]
    }

    pub fn cell_volume(&self) -> f64 {
        let s = self.cell_sides();
        s[0] * s[1] * s[2]
    }

    /// Cell centers in row-major (x3 fastest) order.
    pub fn centers(&self) -> Vec<Point3> {
        let s = self.cell_sides();
        let mut out = Vec::with_capacity(self.cells());
        for i in 0..self.n[0] {
            for j in 0..self.n[1] {
                for k in 0..self.n[2] {
                    out.push(Point3::new(
                        self.bounds.lo.x1 + (i as f64 + 0.5) * s[0],
                        self.bounds.lo.x2 + (j as f64 + 0.5) * s[1],
                        self.bounds.lo.x3 + (k as f64 + 0.5) * s[2],
                    ));
                }
            }
        }
        out
    }

    pub fn cell_box(&self, flat: usize) -> Box3 {
        let s = self.cell_sides();
        let k = flat % self.n[2];
        let j = (flat / self.n[2]) % self.n[1];
        let i = flat / (self.n[1] * self.n[2]);
        let lo = Point3::new(
            self.bounds.lo.x1 + i as f64 * s[0],
            self.bounds.lo.x2 + j as f64 * s[1],
            self.bounds.lo.x3 + k as f64 * s[2],
        );
        Box3::new(lo, Point3::new(lo.x1 + s[0], lo.x2 + s[1], lo.x3 + s[2]))
    }

    pub fn cell_of(&self, x: &Point3) -> Option<usize> {
        if !self.bounds.contains(x) {
            return None;
        }
        let s = self.cell_sides();
        let i = (((x.x1 - self.bounds.lo.x1) / s[0]) as usize).min(self.n[0] - 1);
        let j = (((x.x2 - self.bounds.lo.x2) / s[1]) as usize).min(self.n[1] - 1);
        let k = (((x.x3 - self.bounds.lo.x3) / s[2]) as usize).min(self.n[2] - 1);
        Some((i * self.n[1] + j) * self.n[2] + k)
    }
}

/// q(x) = c(x) h(x) N(x) sampled at the grid's cell centers.
#[derive(Debug, Clone)]
pub struct PotentialField {
    pub values: Vec<Complex64>,
}

impl PotentialField {
    pub fn from_spec(grid: &ContinuumGrid, spec: &MediumSpec) -> Result<Self> {
        spec.validate()?;
        let values: Vec<Complex64> = grid
            .centers()
            .iter()
            .map(|c| spec.impedance.eval(c) * (spec.shape_constant * spec.density.eval(c)))
            .collect();
        let field = Self { values };
        field.validate()?;
        Ok(field)
    }

    pub fn constant(grid: &ContinuumGrid, q: Complex64) -> Self {
        Self {
            values: vec![q; grid.cells()],
        }
    }

    pub fn zero(grid: &ContinuumGrid) -> Self {
        Self::constant(grid, Complex64::new(0.0, 0.0))
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.iter().any(|q| q.re < 0.0) {
            return Err(Error::Domain(
                "potential q must have nonnegative real part".into(),
            ));
        }
        Ok(())
    }
}

/// int_cell g(x, y, lambda) dy for x in (or near) the cell: exact Newtonian
/// mean plus a 2-point Gauss rule for the smooth screened remainder.
pub fn self_cell_integral(x: &Point3, cell: &Box3, lambda: f64) -> f64 {
    let g0 = box_inv_dist_integral(x, cell) / (4.0 * PI);
    let sqrt_lam = lambda.sqrt();
    let mut rem = 0.0;
    for (y, w) in box_gauss_points(cell, 2) {
        let r = x.dist(&y);
        let val = if r < 1e-14 {
            -sqrt_lam / (4.0 * PI)
        } else {
            ((-sqrt_lam * r).exp() - 1.0) / (4.0 * PI * r)
        };
        rem += w * val;
    }
    g0 + rem
}

/// Solve U(x_i) = F(x_i) - sum_j w_ij q_j U(x_j) with exact self-cell means.
pub fn solve_resolvent_ie(
    grid: &ContinuumGrid,
    q: &PotentialField,
    lambda: f64,
    free: &FreeField,
) -> Result<ResolventField> {
    if grid.cells() > IE_CELL_CAP {
        return Err(Error::SizeLimit(format!(
            "grid has {} cells > {IE_CELL_CAP}",
            grid.cells()
        )));
    }
    if q.values.len() != grid.cells() {
        return Err(Error::Domain("potential/grid size mismatch".into()));
    }
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be > 0, got {lambda}")));
    }
    let centers = grid.centers();
    let vol = grid.cell_volume();
    let rhs: Vec<Complex64> = centers
        .par_iter()
        .map(|p| free.eval(p, lambda).map(|v| Complex64::new(v, 0.0)))
        .collect::<Result<_>>()?;
    let diag: Vec<f64> = (0..centers.len())
        .into_par_iter()
        .map(|i| self_cell_integral(&centers[i], &grid.cell_box(i), lambda))
        .collect();
    let (values, _cond) = solve_dense_complex(
        centers.len(),
        |i, j| {
            let b = if i == j {
                diag[i]
            } else {
                green_kernel(&centers[i], &centers[j], lambda).expect("distinct centers") * vol
            };
            let delta = if i == j { 1.0 } else { 0.0 };
            Complex64::new(delta, 0.0) + q.values[j] * b
        },
        &rhs,
    )?;
    let field = ResolventField {
        lambda,
        points: centers,
        values,
        provenance: Provenance::IntegralEquation,
    };
    field.validate()?;
    Ok(field)
}

/// Evaluate U(x) = F(x) - sum_j (int_cell_j g q U) off the collocation
/// points; the cell containing x uses the exact self-cell mean, others the
/// midpoint rule.
pub fn field_from_cells(
    x: &Point3,
    lambda: f64,
    cells: &[Box3],
    q: &[Complex64],
    u: &[Complex64],
    free: &FreeField,
) -> Result<Complex64> {
    if cells.len() != q.len() || q.len() != u.len() {
        return Err(Error::Domain("cells/q/u length mismatch".into()));
    }
    let mut acc = Complex64::new(free.eval(x, lambda)?, 0.0);
    for ((cell, qj), uj) in cells.iter().zip(q).zip(u) {
        let w = if cell.contains(x) {
            self_cell_integral(x, cell, lambda)
        } else {
            green_kernel(x, &cell.center(), lambda)? * cell.volume()
        };
        acc -= qj * w * uj;
    }
    Ok(acc)
}

/// Evaluate the integral-equation solution anywhere in the grid's box.
pub fn eval_resolvent(
    x: &Point3,
    grid: &ContinuumGrid,
    q: &PotentialField,
    field: &ResolventField,
    free: &FreeField,
) -> Result<Complex64> {
    let cells: Vec<Box3> = (0..grid.cells()).map(|i| grid.cell_box(i)).collect();
    field_from_cells(x, field.lambda, &cells, &q.values, &field.values, free)
}

/// The stationary average psi with its condition estimate.
#[derive(Debug, Clone)]
pub struct StationaryAverage {
    pub points: Vec<Point3>,
    pub values: Vec<Complex64>,
    /// lower bound on cond_1(I + B); large values signal an unreliable psi
    pub condition: f64,
}

/// Solve (I + B) psi = phi with B psi = int g0 q psi and phi = int g0 f.
pub fn stationary_average(
    grid: &ContinuumGrid,
    q: &PotentialField,
    free: &FreeField,
) -> Result<StationaryAverage> {
    if grid.cells() > IE_CELL_CAP {
        return Err(Error::SizeLimit(format!(
            "grid has {} cells > {IE_CELL_CAP}",
            grid.cells()
        )));
    }
    q.validate()?;
    if q.values.len() != grid.cells() {
        return Err(Error::Domain("potential/grid size mismatch".into()));
    }
    let centers = grid.centers();
    let vol = grid.cell_volume();
    let phi: Vec<Complex64> = centers
        .par_iter()
        .map(|p| free.eval_potential(p).map(|v| Complex64::new(v, 0.0)))
        .collect::<Result<_>>()?;
    let diag: Vec<f64> = (0..centers.len())
        .into_par_iter()
        .map(|i| box_inv_dist_integral(&centers[i], &grid.cell_box(i)) / (4.0 * PI))
        .collect();
    let (values, condition) = solve_dense_complex(
        centers.len(),
        |i, j| {
            let b = if i == j {
                diag[i]
            } else {
                green_kernel(&centers[i], &centers[j], 0.0).expect("distinct centers") * vol
            };
            let delta = if i == j { 1.0 } else { 0.0 };
            Complex64::new(delta, 0.0) + q.values[j] * b
        },
        &phi,
    )?;
    Ok(StationaryAverage {
        points: centers,
        values,
        condition,
    })
}
