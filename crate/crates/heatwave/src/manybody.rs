//! Full order-M and reduced order-P linear systems for the field in a
//! particle-laden medium, plus field evaluation and interaction diagnostics.

use crate::error::{Error, Result};
use crate::geometry::{Box3, Point3};
use crate::kernels::{green_kernel, FreeField};
use crate::linalg::solve_dense_complex;
use crate::particles::{MediumSpec, ParticleCloud};
use crate::quadrature::SurfaceMesh;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest M accepted by the dense full-system solver.
pub const FULL_LAS_CAP: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    FullLas,
    ReducedLas,
    IntegralEquation,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::FullLas => "full-las",
            Provenance::ReducedLas => "reduced-las",
            Provenance::IntegralEquation => "integral-equation",
        }
    }
}

/// Sampled values of U(., lambda) with their sample points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolventField {
    pub lambda: f64,
    pub points: Vec<Point3>,
    pub values: Vec<Complex64>,
    pub provenance: Provenance,
}

impl ResolventField {
    pub fn validate(&self) -> Result<()> {
        if self.points.len() != self.values.len() {
            return Err(Error::Domain("points/values length mismatch".into()));
        }
        if self
            .values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::Numerical("non-finite field values".into()));
        }
        Ok(())
    }

    /// CSV with columns x1,x2,x3,re_u,im_u,lambda,provenance.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x1,x2,x3,re_u,im_u,lambda,provenance\n");
        for (p, v) in self.points.iter().zip(&self.values) {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                p.x1,
                p.x2,
                p.x3,
                v.re,
                v.im,
                self.lambda,
                self.provenance.as_str()
            ));
        }
        out
    }
}

fn free_values(points: &[Point3], lambda: f64, free: &FreeField) -> Result<Vec<Complex64>> {
    points
        .par_iter()
        .map(|p| free.eval(p, lambda).map(|v| Complex64::new(v, 0.0)))
        .collect()
}

/// Solve U_m = F_m - a^{2-kappa} sum_{m' != m} g_{mm'} h_{m'} c_S U_{m'}.
pub fn solve_full_las(
    cloud: &ParticleCloud,
    lambda: f64,
    free: &FreeField,
) -> Result<ResolventField> {
    cloud.validate()?;
    let m = cloud.m();
    if m == 0 {
        return Err(Error::Domain("empty cloud".into()));
    }
    if m > FULL_LAS_CAP {
        return Err(Error::SizeLimit(format!(
            "full system has M = {m} > {FULL_LAS_CAP}; use the reduced solver"
        )));
    }
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be > 0, got {lambda}")));
    }
    let rhs = free_values(&cloud.centers, lambda, free)?;
    let scale = cloud.a.powf(2.0 - cloud.kappa) * cloud.c_s;
    let centers = &cloud.centers;
    let h = &cloud.h;
    let (values, _cond) = solve_dense_complex(
        m,
        |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                let g = green_kernel(&centers[i], &centers[j], lambda)
                    .expect("distinct validated centers");
                h[j] * (scale * g)
            }
        },
        &rhs,
    )?;
    let field = ResolventField {
        lambda,
        points: cloud.centers.clone(),
        values,
        provenance: Provenance::FullLas,
    };
    field.validate()?;
    Ok(field)
}

/// A tiling of the domain's bounding box into near-cubic cells of side ~ b,
/// restricted to the cells that actually contain particles.
#[derive(Debug, Clone)]
pub struct Partition {
    pub bounds: Box3,
    pub nb: [usize; 3],
    pub cell_sides: [f64; 3],
    /// centers of the retained (nonempty) cells
    pub centers: Vec<Point3>,
    /// particle count per retained cell
    pub counts: Vec<usize>,
    /// flat index of each retained cell in the full nb1*nb2*nb3 tiling
    pub flat_index: Vec<usize>,
}

impl Partition {
    pub fn build(bounds: &Box3, b: f64, cloud: &ParticleCloud) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::Domain(format!("partition side must be > 0, got {b}")));
        }
        if cloud.m() >= 2 && b < 4.0 * cloud.d_min * (1.0 - 1e-12) {
            return Err(Error::Domain(format!(
                "partition side b = {b} violates b >= 4 d_min = {}",
                4.0 * cloud.d_min
            )));
        }
        let sides = bounds.sides();
        let mut nb = [0usize; 3];
        for (k, &s) in sides.iter().enumerate() {
            nb[k] = ((s / b + 0.5).floor() as usize).max(1);
            // keep the realized side >= 4 d_min after rounding up the count
            while nb[k] > 1 && s / (nb[k] as f64) < 4.0 * cloud.d_min * (1.0 - 1e-12) {
                nb[k] -= 1;
            }
        }
        let cell_sides = [
            sides[0] / nb[0] as f64,
            sides[1] / nb[1] as f64,
            sides[2] / nb[2] as f64,
        ];
        let flat = |i: usize, j: usize, k: usize| (i * nb[1] + j) * nb[2] + k;
        let mut counts_full = vec![0usize; nb[0] * nb[1] * nb[2]];
        for c in &cloud.centers {
            let i = (((c.x1 - bounds.lo.x1) / cell_sides[0]) as usize).min(nb[0] - 1);
            let j = (((c.x2 - bounds.lo.x2) / cell_sides[1]) as usize).min(nb[1] - 1);
            let k = (((c.x3 - bounds.lo.x3) / cell_sides[2]) as usize).min(nb[2] - 1);
            counts_full[flat(i, j, k)] += 1;
        }
        let mut centers = Vec::new();
        let mut counts = Vec::new();
        let mut flat_index = Vec::new();
        for i in 0..nb[0] {
            for j in 0..nb[1] {
                for k in 0..nb[2] {
                    let f = flat(i, j, k);
                    if counts_full[f] == 0 {
                        continue;
                    }
                    centers.push(Point3::new(
                        bounds.lo.x1 + (i as f64 + 0.5) * cell_sides[0],
                        bounds.lo.x2 + (j as f64 + 0.5) * cell_sides[1],
                        bounds.lo.x3 + (k as f64 + 0.5) * cell_sides[2],
                    ));
                    counts.push(counts_full[f]);
                    flat_index.push(f);
                }
            }
        }
        if centers.is_empty() {
            return Err(Error::Infeasible("partition has no nonempty cells".into()));
        }
        Ok(Self {
            bounds: *bounds,
            nb,
            cell_sides,
            centers,
            counts,
            flat_index,
        })
    }

    pub fn p(&self) -> usize {
        self.centers.len()
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_sides[0] * self.cell_sides[1] * self.cell_sides[2]
    }

    /// Box of the retained cell `idx`.
    pub fn cell_box(&self, idx: usize) -> Box3 {
        let f = self.flat_index[idx];
        let k = f % self.nb[2];
        let j = (f / self.nb[2]) % self.nb[1];
        let i = f / (self.nb[1] * self.nb[2]);
        let lo = Point3::new(
            self.bounds.lo.x1 + i as f64 * self.cell_sides[0],
            self.bounds.lo.x2 + j as f64 * self.cell_sides[1],
            self.bounds.lo.x3 + k as f64 * self.cell_sides[2],
        );
        Box3::new(
            lo,
            Point3::new(
                lo.x1 + self.cell_sides[0],
                lo.x2 + self.cell_sides[1],
                lo.x3 + self.cell_sides[2],
            ),
        )
    }

    /// Index of the retained cell containing `x`, if that cell is retained.
    pub fn cell_of(&self, x: &Point3) -> Option<usize> {
        if !self.bounds.contains(x) {
            return None;
        }
        let i = (((x.x1 - self.bounds.lo.x1) / self.cell_sides[0]) as usize).min(self.nb[0] - 1);
        let j = (((x.x2 - self.bounds.lo.x2) / self.cell_sides[1]) as usize).min(self.nb[1] - 1);
        let k = (((x.x3 - self.bounds.lo.x3) / self.cell_sides[2]) as usize).min(self.nb[2] - 1);
        let f = (i * self.nb[1] + j) * self.nb[2] + k;
        self.flat_index.binary_search(&f).ok()
    }
}

/// Solve U_p = F_p - sum_{p' != p} g_{pp'} h(x_{p'}) c_S N(x_{p'}) |cell| U_{p'}.
pub fn solve_reduced_las(
    cloud: &ParticleCloud,
    spec: &MediumSpec,
    b: f64,
    lambda: f64,
    free: &FreeField,
) -> Result<(ResolventField, Partition)> {
    cloud.validate()?;
    spec.validate()?;
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be > 0, got {lambda}")));
    }
    let partition = Partition::build(&spec.domain.bounding_box(), b, cloud)?;
    let p = partition.p();
    let rhs = free_values(&partition.centers, lambda, free)?;
    let vol = partition.cell_volume();
    let centers = &partition.centers;
    let weights: Vec<Complex64> = centers
        .iter()
        .map(|c| spec.impedance.eval(c) * (spec.shape_constant * spec.density.eval(c) * vol))
        .collect();
    let (values, _cond) = solve_dense_complex(
        p,
        |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                let g = green_kernel(&centers[i], &centers[j], lambda)
                    .expect("distinct cell centers");
                weights[j] * g
            }
        },
        &rhs,
    )?;
    let field = ResolventField {
        lambda,
        points: partition.centers.clone(),
        values,
        provenance: Provenance::ReducedLas,
    };
    field.validate()?;
    Ok((field, partition))
}

/// Evaluate the full-system field away from the particles:
/// F(x) - sum_m g(x, x_m) zeta_m |S_m| U_m.
pub fn field_at(
    x: &Point3,
    cloud: &ParticleCloud,
    centers_field: &ResolventField,
    free: &FreeField,
) -> Result<Complex64> {
    if centers_field.provenance != Provenance::FullLas
        || centers_field.points.len() != cloud.m()
    {
        return Err(Error::Domain(
            "field_at expects the full-system field on the cloud's centers".into(),
        ));
    }
    let lambda = centers_field.lambda;
    for c in &cloud.centers {
        if x.dist(c) < cloud.a {
            return Err(Error::Domain(format!(
                "evaluation point ({}, {}, {}) lies inside a particle",
                x.x1, x.x2, x.x3
            )));
        }
    }
    let surface = cloud.c_s * cloud.a * cloud.a;
    let mut acc = Complex64::new(free.eval(x, lambda)?, 0.0);
    for (m, c) in cloud.centers.iter().enumerate() {
        let g = green_kernel(x, c, lambda)?;
        acc -= cloud.zeta(m) * (surface * g) * centers_field.values[m];
    }
    Ok(acc)
}

/// The a-priori bound max(sqrt(lambda) a, a / d_min) on the relative size of
/// neighbor-interaction corrections.
pub fn interaction_ratio_diagnostic(cloud: &ParticleCloud, lambda: f64) -> f64 {
    let spectral = lambda.max(0.0).sqrt() * cloud.a;
    let spacing = if cloud.d_min.is_finite() {
        cloud.a / cloud.d_min
    } else {
        0.0
    };
    spectral.max(spacing)
}

/// Quadrature estimate of |J2 / J1| for a constant surface density on a
/// sphere of radius `a` probed from distance `d`: J1 = |S| g(x, center) and
/// J2 = int_S (g(x, s) - g(x, center)) ds.
pub fn pair_interaction_estimate(a: f64, d: f64, lambda: f64, n_theta: usize) -> Result<f64> {
    if !(d > a) {
        return Err(Error::Domain(format!(
            "probe distance {d} must exceed the sphere radius {a}"
        )));
    }
    let center = Point3::zero();
    let probe = Point3::new(d, 0.0, 0.0);
    let mesh = SurfaceMesh::sphere(center, a, n_theta)?;
    let g_center = green_kernel(&probe, &center, lambda)?;
    let j2 = mesh.integrate(|s, _| {
        green_kernel(&probe, s, lambda).expect("probe outside sphere") - g_center
    });
    Ok((j2 / (mesh.area * g_center)).abs())
}
