//! Gauss-Legendre rules, sphere surface meshes, and the closed-form
//! Newtonian self-integral over a box.

use crate::error::{Error, Result};
use crate::geometry::{Box3, Point3};
use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton
/// iteration on the Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_deriv(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Tensor Gauss points over a box; weights include the cell Jacobian.
pub fn box_gauss_points(cell: &Box3, order: usize) -> Vec<(Point3, f64)> {
    let (gx, gw) = gauss_legendre(order);
    let s = cell.sides();
    let c = cell.center();
    let mut out = Vec::with_capacity(order * order * order);
    for (i, &xi) in gx.iter().enumerate() {
        for (j, &xj) in gx.iter().enumerate() {
            for (k, &xk) in gx.iter().enumerate() {
                let p = Point3::new(
                    c.x1 + 0.5 * s[0] * xi,
                    c.x2 + 0.5 * s[1] * xj,
                    c.x3 + 0.5 * s[2] * xk,
                );
                let w = gw[i] * gw[j] * gw[k] * s[0] * s[1] * s[2] / 8.0;
                out.push((p, w));
            }
        }
    }
    out
}

/// Quadrature nodes on a closed surface. Spheres carry their analytic
/// description so that on-surface (weakly singular) integrals can be
/// re-parametrized around the singular point.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    pub nodes: Vec<Point3>,
    pub weights: Vec<f64>,
    pub normals: Vec<Point3>,
    pub area: f64,
    pub sphere: Option<Sphere>,
}

#[derive(Debug, Clone, Copy)]
pub struct Sphere {
    pub center: Point3,
    pub radius: f64,
    /// polar resolution used when the mesh was built
    pub n_theta: usize,
}

impl SurfaceMesh {
    /// Product rule on a sphere: Gauss-Legendre in cos(theta) x uniform
    /// in phi (2*n_theta azimuthal points).
    pub fn sphere(center: Point3, radius: f64, n_theta: usize) -> Result<Self> {
        if radius <= 0.0 || n_theta < 2 {
            return Err(Error::Domain(format!(
                "sphere mesh needs radius > 0 and n_theta >= 2, got radius={radius}, n_theta={n_theta}"
            )));
        }
        let n_phi = 2 * n_theta;
        let (ct, wt) = gauss_legendre(n_theta);
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        let mut normals = Vec::with_capacity(n_theta * n_phi);
        for (i, &c) in ct.iter().enumerate() {
            let st = (1.0 - c * c).max(0.0).sqrt();
            for k in 0..n_phi {
                let phi = 2.0 * PI * (k as f64 + 0.5) / n_phi as f64;
                let n = Point3::new(st * phi.cos(), st * phi.sin(), c);
                nodes.push(center.add(&n.scale(radius)));
                normals.push(n);
                weights.push(radius * radius * wt[i] * 2.0 * PI / n_phi as f64);
            }
        }
        let area = weights.iter().sum();
        Ok(Self {
            nodes,
            weights,
            normals,
            area,
            sphere: Some(Sphere {
                center,
                radius,
                n_theta,
            }),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate a function of (node, outward normal) over the surface.
    pub fn integrate<F: Fn(&Point3, &Point3) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.normals)
            .zip(&self.weights)
            .map(|((s, n), w)| w * f(s, n))
            .sum()
    }

    /// Checks the weight-sum and unit-normal invariants.
    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Domain("empty surface mesh".into()));
        }
        for n in &self.normals {
            if (n.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::Domain("non-unit normal in surface mesh".into()));
            }
        }
        let w: f64 = self.weights.iter().sum();
        let tol = 1e-10 * self.area.max(1.0);
        if (w - self.area).abs() > tol {
            return Err(Error::Domain("weights do not sum to surface area".into()));
        }
        Ok(())
    }
}

/// `int_box dy / |x - y|` for `x` inside (or on the boundary of) the box.
///
/// Reduces the volume integral to six smooth face integrals via the
/// solid-angle substitution, each with the closed-form antiderivative
/// `u ln(v+r) + v ln(u+r) - h atan(uv/(h r))`.
pub fn box_inv_dist_integral(x: &Point3, cell: &Box3) -> f64 {
    let a1 = x.x1 - cell.lo.x1;
    let a2 = cell.hi.x1 - x.x1;
    let b1 = x.x2 - cell.lo.x2;
    let b2 = cell.hi.x2 - x.x2;
    let c1 = x.x3 - cell.lo.x3;
    let c2 = cell.hi.x3 - x.x3;
    let mut total = 0.0;
    total += 0.5 * a1 * face_int(b1, b2, c1, c2, a1) + 0.5 * a2 * face_int(b1, b2, c1, c2, a2);
    total += 0.5 * b1 * face_int(a1, a2, c1, c2, b1) + 0.5 * b2 * face_int(a1, a2, c1, c2, b2);
    total += 0.5 * c1 * face_int(a1, a2, b1, b2, c1) + 0.5 * c2 * face_int(a1, a2, b1, b2, c2);
    total
}

/// `int_{-p1}^{p2} int_{-q1}^{q2} du dv / sqrt(u^2 + v^2 + h^2)`.
fn face_int(p1: f64, p2: f64, q1: f64, q2: f64, h: f64) -> f64 {
    let antideriv = |u: f64, v: f64| -> f64 {
        let r = (u * u + v * v + h * h).sqrt();
        let t1 = if u.abs() > 0.0 && v + r > 0.0 {
            u * (v + r).ln()
        } else {
            0.0
        };
        let t2 = if v.abs() > 0.0 && u + r > 0.0 {
            v * (u + r).ln()
        } else {
            0.0
        };
        let t3 = if h > 0.0 && r > 0.0 {
            h * (u * v / (h * r)).atan()
        } else {
            0.0
        };
        t1 + t2 - t3
    };
    antideriv(p2, q2) - antideriv(-p1, q2) - antideriv(p2, -q1) + antideriv(-p1, -q1)
}
