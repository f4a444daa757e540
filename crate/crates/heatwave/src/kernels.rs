//! Scalar heat kernels and the free field they induce.
//!
//! `green_kernel` is the resolvent kernel e^{-sqrt(lambda) r}/(4 pi r); at
//! lambda = 0 it degenerates to the Newtonian kernel. `FreeField` evaluates
//! F(x, lambda) = (1/lambda) int g(x, y, lambda) f(y) dy by fixed-order
//! tensor Gauss quadrature over a cell decomposition of supp f, with one
//! refinement level for cells near the evaluation point.

use crate::error::{Error, Result};
use crate::geometry::{Box3, Point3};
use crate::quadrature::{box_gauss_points, gauss_legendre, SurfaceMesh};
use std::f64::consts::PI;

/// Minimal separation below which two kernel arguments count as coincident.
const COINCIDENT_TOL: f64 = 1e-14;

/// e^{-sqrt(lambda) |x-y|} / (4 pi |x-y|) for lambda >= 0.
pub fn green_kernel(x: &Point3, y: &Point3, lambda: f64) -> Result<f64> {
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "green_kernel requires lambda >= 0, got {lambda}"
        )));
    }
    let r = x.dist(y);
    if r < COINCIDENT_TOL {
        return Err(Error::Domain(
            "green_kernel called with coincident points".into(),
        ));
    }
    Ok((-(lambda.sqrt()) * r).exp() / (4.0 * PI * r))
}

/// Newtonian kernel 1/(4 pi |x-y|).
pub fn newtonian_kernel(x: &Point3, y: &Point3) -> Result<f64> {
    green_kernel(x, y, 0.0)
}

/// Compactly supported volumetric source terms.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    Zero,
    /// Indicator of a ball.
    UniformBall { center: Point3, radius: f64 },
    /// exp(-|y - center|^2 / (2 sigma^2)) truncated to `support`.
    GaussianBump {
        center: Point3,
        sigma: f64,
        support: Box3,
    },
}

impl Source {
    pub fn eval(&self, y: &Point3) -> f64 {
        match self {
            Source::Zero => 0.0,
            Source::UniformBall { center, radius } => {
                if y.dist(center) <= *radius {
                    1.0
                } else {
                    0.0
                }
            }
            Source::GaussianBump {
                center,
                sigma,
                support,
            } => {
                if support.contains(y) {
                    let r = y.dist(center);
                    (-r * r / (2.0 * sigma * sigma)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// Bounding box of the support; `None` for the zero source.
    pub fn support(&self) -> Option<Box3> {
        match self {
            Source::Zero => None,
            Source::UniformBall { center, radius } => Some(Box3::new(
                Point3::new(center.x1 - radius, center.x2 - radius, center.x3 - radius),
                Point3::new(center.x1 + radius, center.x2 + radius, center.x3 + radius),
            )),
            Source::GaussianBump { support, .. } => Some(*support),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Source::Zero => Ok(()),
            Source::UniformBall { radius, .. } => {
                if *radius > 0.0 && radius.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Domain(format!("ball radius must be > 0, got {radius}")))
                }
            }
            Source::GaussianBump { sigma, support, .. } => {
                if !(*sigma > 0.0) || !sigma.is_finite() {
                    return Err(Error::Domain(format!("sigma must be > 0, got {sigma}")));
                }
                if support.volume() <= 0.0 {
                    return Err(Error::Domain("empty source support box".into()));
                }
                Ok(())
            }
        }
    }
}

struct VolumeCell {
    bounds: Box3,
    /// (node, weight * f(node))
    base: Vec<(Point3, f64)>,
    /// same cell split once into 8 subcells, used near the evaluation point
    fine: Vec<(Point3, f64)>,
}

/// Precomputed quadrature for F(x, lambda) = lambda^{-1} int g f dy.
///
/// Smooth box-supported sources use a uniform cell decomposition with
/// tensor Gauss points per cell; ball indicators use a spherical product
/// rule (radial Gauss x sphere mesh) aligned with the discontinuity so the
/// integrand is smooth on every cell.
pub struct FreeField {
    cells: Vec<VolumeCell>,
}

impl FreeField {
    /// Default resolution: 6 cells per axis, 4-point Gauss.
    pub fn new(source: &Source) -> Result<Self> {
        Self::with_resolution(source, 6, 4)
    }

    pub fn with_resolution(source: &Source, cells_per_axis: usize, order: usize) -> Result<Self> {
        source.validate()?;
        if cells_per_axis == 0 || order == 0 {
            return Err(Error::Domain(
                "cells_per_axis and order must be positive".into(),
            ));
        }
        let cells = match source {
            Source::Zero => Vec::new(),
            Source::UniformBall { center, radius } => {
                ball_shells(center, *radius, cells_per_axis.max(4), 4 * order)
            }
            Source::GaussianBump { .. } => {
                let support = source.support().expect("bump has support");
                let mut cells = Vec::new();
                let s = support.sides();
                let n = cells_per_axis;
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            let lo = Point3::new(
                                support.lo.x1 + s[0] * i as f64 / n as f64,
                                support.lo.x2 + s[1] * j as f64 / n as f64,
                                support.lo.x3 + s[2] * k as f64 / n as f64,
                            );
                            let hi = Point3::new(
                                support.lo.x1 + s[0] * (i + 1) as f64 / n as f64,
                                support.lo.x2 + s[1] * (j + 1) as f64 / n as f64,
                                support.lo.x3 + s[2] * (k + 1) as f64 / n as f64,
                            );
                            let cell = Box3::new(lo, hi);
                            cells.push(VolumeCell {
                                bounds: cell,
                                base: weighted_points(&cell, order, source),
                                fine: refined_points(&cell, order, source),
                            });
                        }
                    }
                }
                cells
            }
        };
        Ok(Self { cells })
    }

    /// F(x, lambda); requires lambda > 0 because of the 1/lambda factor.
    pub fn eval(&self, x: &Point3, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!(
                "free field requires lambda > 0, got {lambda}"
            )));
        }
        Ok(self.integrate_kernel(x, lambda.sqrt())? / lambda)
    }

    /// The Newtonian potential int g0(x, y) f(y) dy (no 1/lambda factor).
    pub fn eval_potential(&self, x: &Point3) -> Result<f64> {
        self.integrate_kernel(x, 0.0)
    }

    fn integrate_kernel(&self, x: &Point3, sqrt_lam: f64) -> Result<f64> {
        let mut acc = 0.0;
        for cell in &self.cells {
            let near = dist_to_box(x, &cell.bounds) <= cell.bounds.diameter();
            let pts = if near { &cell.fine } else { &cell.base };
            for (y, wf) in pts {
                let r = x.dist(y);
                if r < COINCIDENT_TOL {
                    return Err(Error::Domain(
                        "free field evaluation point coincides with a quadrature node".into(),
                    ));
                }
                acc += wf * (-sqrt_lam * r).exp() / (4.0 * PI * r);
            }
        }
        Ok(acc)
    }
}

/// Convenience one-shot wrapper around [`FreeField`].
pub fn free_field(x: &Point3, lambda: f64, source: &Source) -> Result<f64> {
    FreeField::new(source)?.eval(x, lambda)
}

fn weighted_points(cell: &Box3, order: usize, source: &Source) -> Vec<(Point3, f64)> {
    box_gauss_points(cell, order)
        .into_iter()
        .map(|(p, w)| (p, w * source.eval(&p)))
        .filter(|(_, wf)| *wf != 0.0)
        .collect()
}

fn refined_points(cell: &Box3, order: usize, source: &Source) -> Vec<(Point3, f64)> {
    let c = cell.center();
    let mut out = Vec::new();
    for &(lx, hx) in &[(cell.lo.x1, c.x1), (c.x1, cell.hi.x1)] {
        for &(ly, hy) in &[(cell.lo.x2, c.x2), (c.x2, cell.hi.x2)] {
            for &(lz, hz) in &[(cell.lo.x3, c.x3), (c.x3, cell.hi.x3)] {
                let sub = Box3::new(Point3::new(lx, ly, lz), Point3::new(hx, hy, hz));
                out.extend(weighted_points(&sub, order, source));
            }
        }
    }
    out
}

/// Spherical product rule over a ball: Gauss in r on [0, radius] (split into
/// shells) times a sphere product rule per shell. One logical cell per shell.
fn ball_shells(center: &Point3, radius: f64, n_shells: usize, n_theta: usize) -> Vec<VolumeCell> {
    let build = |nt: usize, nr: usize| -> Vec<(Point3, f64)> {
        let mesh = SurfaceMesh::sphere(Point3::zero(), 1.0, nt).expect("unit sphere mesh");
        let (gr, wr) = gauss_legendre(nr);
        let mut pts = Vec::new();
        for s in 0..n_shells {
            let r0 = radius * s as f64 / n_shells as f64;
            let r1 = radius * (s + 1) as f64 / n_shells as f64;
            for (i, &xi) in gr.iter().enumerate() {
                let r = 0.5 * (r0 + r1) + 0.5 * (r1 - r0) * xi;
                let wrad = 0.5 * (r1 - r0) * wr[i] * r * r;
                for (node, w) in mesh.nodes.iter().zip(&mesh.weights) {
                    // unit-sphere weights carry the solid-angle measure
                    pts.push((center.add(&node.scale(r)), wrad * w));
                }
            }
        }
        pts
    };
    let bounds = Box3::new(
        Point3::new(center.x1 - radius, center.x2 - radius, center.x3 - radius),
        Point3::new(center.x1 + radius, center.x2 + radius, center.x3 + radius),
    );
    vec![VolumeCell {
        bounds,
        base: build(n_theta, 6),
        fine: build(2 * n_theta, 12),
    }]
}

fn dist_to_box(x: &Point3, b: &Box3) -> f64 {
    let d1 = (b.lo.x1 - x.x1).max(0.0).max(x.x1 - b.hi.x1);
    let d2 = (b.lo.x2 - x.x2).max(0.0).max(x.x2 - b.hi.x2);
    let d3 = (b.lo.x3 - x.x3).max(0.0).max(x.x3 - b.hi.x3);
    (d1 * d1 + d2 * d2 + d3 * d3).sqrt()
}

/// Integral of the double-layer (normal-derivative) Newtonian kernel over a
/// closed surface: int_S d/dN_s g0(s, probe) ds.
///
/// Evaluates to -1 for probes inside, 0 outside, and -1/2 on the surface.
/// On-surface probes on spheres are handled by re-parametrizing the sphere
/// with the probe at the pole: the sin(theta) area factor cancels the 1/r
/// kernel singularity, leaving a smooth integrand for a Gauss rule in theta.
pub fn gauss_identity_check(surface: &SurfaceMesh, probe: &Point3) -> Result<f64> {
    surface.validate()?;
    let double_layer = |s: &Point3, n: &Point3| -> f64 {
        let d = s.sub(probe);
        let r = d.norm();
        -n.dot(&d) / (4.0 * PI * r * r * r)
    };
    if let Some(sphere) = surface.sphere {
        let rho = probe.dist(&sphere.center);
        let on_surface_tol = 1e-9 * sphere.radius.max(1.0);
        if (rho - sphere.radius).abs() < on_surface_tol {
            // rotated polar rule with the probe at the pole
            let axis = probe.sub(&sphere.center).scale(1.0 / rho);
            let (e1, e2) = orthonormal_frame(&axis);
            let nt = sphere.n_theta;
            let (gt, wt) = gauss_legendre(nt);
            let n_phi = 2 * nt;
            let mut acc = 0.0;
            for (i, &xi) in gt.iter().enumerate() {
                let theta = 0.5 * PI * (1.0 + xi);
                let (st, ct) = theta.sin_cos();
                for k in 0..n_phi {
                    let phi = 2.0 * PI * (k as f64 + 0.5) / n_phi as f64;
                    let dir = axis
                        .scale(ct)
                        .add(&e1.scale(st * phi.cos()))
                        .add(&e2.scale(st * phi.sin()));
                    let s = sphere.center.add(&dir.scale(sphere.radius));
                    let w = 0.5 * PI * wt[i] * sphere.radius * sphere.radius * st * 2.0 * PI
                        / n_phi as f64;
                    acc += w * double_layer(&s, &dir);
                }
            }
            return Ok(acc);
        }
    }
    Ok(surface.integrate(double_layer))
}

fn orthonormal_frame(axis: &Point3) -> (Point3, Point3) {
    let helper = if axis.x1.abs() < 0.9 {
        Point3::new(1.0, 0.0, 0.0)
    } else {
        Point3::new(0.0, 1.0, 0.0)
    };
    let e1 = {
        let raw = Point3::new(
            axis.x2 * helper.x3 - axis.x3 * helper.x2,
            axis.x3 * helper.x1 - axis.x1 * helper.x3,
            axis.x1 * helper.x2 - axis.x2 * helper.x1,
        );
        raw.scale(1.0 / raw.norm())
    };
    let e2 = Point3::new(
        axis.x2 * e1.x3 - axis.x3 * e1.x2,
        axis.x3 * e1.x1 - axis.x1 * e1.x3,
        axis.x1 * e1.x2 - axis.x2 * e1.x1,
    );
    (e1, e2)
}
