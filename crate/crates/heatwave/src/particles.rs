//! Particle clouds following the distribution law M ~ a^{-(2-kappa)} int N.
//!
//! Centers sit on a jittered lattice: the jitter amplitude is capped so that
//! neighboring centers stay at least 2a apart, and exactly M lattice sites
//! are kept by density-weighted selection without replacement. This keeps
//! generation O(M), deterministic in the seed, and aperiodic.

use crate::error::{Error, Result};
use crate::geometry::{Box3, Point3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Region holding the particles.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Box { bounds: Box3 },
    /// Axis along x3.
    Cylinder {
        center: Point3,
        radius: f64,
        height: f64,
    },
}

impl Domain {
    pub fn bounding_box(&self) -> Box3 {
        match self {
            Domain::Box { bounds } => *bounds,
            Domain::Cylinder {
                center,
                radius,
                height,
            } => Box3::new(
                Point3::new(
                    center.x1 - radius,
                    center.x2 - radius,
                    center.x3 - height / 2.0,
                ),
                Point3::new(
                    center.x1 + radius,
                    center.x2 + radius,
                    center.x3 + height / 2.0,
                ),
            ),
        }
    }

    pub fn contains(&self, p: &Point3) -> bool {
        match self {
            Domain::Box { bounds } => bounds.contains(p),
            Domain::Cylinder {
                center,
                radius,
                height,
            } => {
                let dx = p.x1 - center.x1;
                let dy = p.x2 - center.x2;
                dx * dx + dy * dy <= radius * radius && (p.x3 - center.x3).abs() <= height / 2.0
            }
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Domain::Box { bounds } => bounds.volume(),
            Domain::Cylinder { radius, height, .. } => PI * radius * radius * height,
        }
    }

    fn center(&self) -> Point3 {
        match self {
            Domain::Box { bounds } => bounds.center(),
            Domain::Cylinder { center, .. } => *center,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Domain::Box { bounds } => bounds.volume() > 0.0,
            Domain::Cylinder { radius, height, .. } => *radius > 0.0 && *height > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain("domain has nonpositive volume".into()))
        }
    }
}

/// Continuous scalar coefficient fields (density, impedance parts).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarField {
    Constant { value: f64 },
    /// base + gradient . x
    Linear { base: f64, gradient: [f64; 3] },
}

impl ScalarField {
    pub fn eval(&self, p: &Point3) -> f64 {
        match self {
            ScalarField::Constant { value } => *value,
            ScalarField::Linear { base, gradient } => {
                base + gradient[0] * p.x1 + gradient[1] * p.x2 + gradient[2] * p.x3
            }
        }
    }
}

/// Complex impedance h(x) with Re h >= 0 (validated where sampled).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ImpedanceField {
    pub re: ScalarField,
    pub im: ScalarField,
}

impl ImpedanceField {
    pub fn constant(re: f64, im: f64) -> Self {
        Self {
            re: ScalarField::Constant { value: re },
            im: ScalarField::Constant { value: im },
        }
    }

    pub fn eval(&self, p: &Point3) -> Complex64 {
        Complex64::new(self.re.eval(p), self.im.eval(p))
    }
}

fn default_shape_constant() -> f64 {
    4.0 * PI
}

/// The medium: where particles live, how densely, and with what impedance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MediumSpec {
    pub domain: Domain,
    pub density: ScalarField,
    pub impedance: ImpedanceField,
    pub kappa: f64,
    /// |S|/a^2; 4 pi for spheres.
    #[serde(default = "default_shape_constant")]
    pub shape_constant: f64,
}

impl MediumSpec {
    pub fn unit_cube(density: f64, h_re: f64, kappa: f64) -> Self {
        Self {
            domain: Domain::Box {
                bounds: Box3::unit_cube(),
            },
            density: ScalarField::Constant { value: density },
            impedance: ImpedanceField::constant(h_re, 0.0),
            kappa,
            shape_constant: default_shape_constant(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        if !(0.0..1.0).contains(&self.kappa) {
            return Err(Error::Domain(format!(
                "kappa must lie in [0, 1), got {}",
                self.kappa
            )));
        }
        if self.shape_constant <= 0.0 {
            return Err(Error::Domain(format!(
                "shape_constant must be > 0, got {}",
                self.shape_constant
            )));
        }
        Ok(())
    }

    /// int_D N dx, closed form (N is constant or linear and both supported
    /// domains are symmetric about their centers).
    pub fn density_integral(&self) -> f64 {
        self.domain.volume() * self.density.eval(&self.domain.center())
    }
}

/// A realized discrete medium.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParticleCloud {
    pub a: f64,
    pub kappa: f64,
    pub c_s: f64,
    pub centers: Vec<Point3>,
    pub h: Vec<Complex64>,
    /// realized minimal center spacing; infinite for M <= 1
    pub d_min: f64,
}

impl ParticleCloud {
    pub fn m(&self) -> usize {
        self.centers.len()
    }

    /// Surface impedance parameter zeta_m = h(x_m) / a^kappa.
    pub fn zeta(&self, m: usize) -> Complex64 {
        self.h[m] / self.a.powf(self.kappa)
    }

    pub fn validate(&self) -> Result<()> {
        if self.centers.len() != self.h.len() {
            return Err(Error::Domain("centers/h length mismatch".into()));
        }
        if !(0.0..1.0).contains(&self.kappa) || self.a <= 0.0 || self.c_s <= 0.0 {
            return Err(Error::Domain("bad cloud parameters".into()));
        }
        if self.h.iter().any(|h| h.re < 0.0) {
            return Err(Error::Domain("impedance with negative real part".into()));
        }
        // bodies of radius a must have disjoint interiors
        if self.m() >= 2 && self.d_min < 2.0 * self.a * (1.0 - 1e-12) {
            return Err(Error::Domain(format!(
                "particles overlap: d_min = {} < 2a = {}",
                self.d_min,
                2.0 * self.a
            )));
        }
        Ok(())
    }

    /// Exact count of centers inside an axis-aligned box.
    pub fn region_count(&self, region: &Box3) -> usize {
        self.centers.iter().filter(|c| region.contains(c)).count()
    }

    /// JSON export with the documented layout
    /// {a, kappa, c_S, centers:[[x1,x2,x3],...], h:[[re,im],...]}.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Wire<'a> {
            a: f64,
            kappa: f64,
            #[serde(rename = "c_S")]
            c_s: f64,
            centers: Vec<[f64; 3]>,
            h: Vec<[f64; 2]>,
            #[serde(skip_serializing_if = "Option::is_none")]
            d_min: Option<f64>,
            _phantom: std::marker::PhantomData<&'a ()>,
        }
        let wire = Wire {
            a: self.a,
            kappa: self.kappa,
            c_s: self.c_s,
            centers: self.centers.iter().map(|c| [c.x1, c.x2, c.x3]).collect(),
            h: self.h.iter().map(|h| [h.re, h.im]).collect(),
            d_min: self.d_min.is_finite().then_some(self.d_min),
            _phantom: std::marker::PhantomData,
        };
        serde_json::to_string_pretty(&wire).expect("cloud serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Wire {
            a: f64,
            kappa: f64,
            #[serde(rename = "c_S")]
            c_s: f64,
            centers: Vec<[f64; 3]>,
            h: Vec<[f64; 2]>,
            d_min: Option<f64>,
        }
        let wire: Wire = serde_json::from_str(text)
            .map_err(|e| Error::Domain(format!("cloud JSON parse error: {e}")))?;
        let centers: Vec<Point3> = wire
            .centers
            .iter()
            .map(|c| Point3::new(c[0], c[1], c[2]))
            .collect();
        let d_min = match wire.d_min {
            Some(d) => d,
            None => realized_d_min(&centers),
        };
        let cloud = ParticleCloud {
            a: wire.a,
            kappa: wire.kappa,
            c_s: wire.c_s,
            centers,
            h: wire.h.iter().map(|h| Complex64::new(h[0], h[1])).collect(),
            d_min,
        };
        cloud.validate()?;
        Ok(cloud)
    }
}

/// Generate a cloud with exactly M = round(a^{-(2-kappa)} int_D N) centers.
pub fn generate_cloud(spec: &MediumSpec, a: f64, seed: u64) -> Result<ParticleCloud> {
    spec.validate()?;
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("particle radius must be > 0, got {a}")));
    }
    let total_density = spec.density_integral();
    if total_density < 0.0 {
        return Err(Error::Domain("density integrates to a negative value".into()));
    }
    let m_target = (a.powf(-(2.0 - spec.kappa)) * total_density).round() as usize;
    if m_target == 0 {
        return Ok(ParticleCloud {
            a,
            kappa: spec.kappa,
            c_s: spec.shape_constant,
            centers: Vec::new(),
            h: Vec::new(),
            d_min: f64::INFINITY,
        });
    }

    let bbox = spec.domain.bounding_box();
    let sides = bbox.sides();
    let max_side = sides[0].max(sides[1]).max(sides[2]);
    // lattice resolution: start near M^{1/3} per axis (relative to the
    // longest side) and refine until enough admissible sites exist
    let mut n1 = ((m_target as f64).powf(1.0 / 3.0).ceil() as usize).max(1);
    loop {
        let cell = max_side / n1 as f64;
        if cell < 2.0 * a * (1.0 - 1e-12) {
            return Err(Error::Infeasible(format!(
                "cannot place {m_target} disjoint particles of radius {a}: lattice cell {cell:.4} \
                 is below the 2a = {} spacing floor; decrease a or the density",
                2.0 * a
            )));
        }
        match try_lattice(spec, a, seed, &bbox, cell, m_target)? {
            Some(cloud) => return Ok(cloud),
            None => {
                n1 += 1;
                // a denser lattice only helps while cells stay >= 2a
                if max_side / (n1 as f64) < 2.0 * a * (1.0 - 1e-12) {
                    return Err(Error::Infeasible(format!(
                        "cannot place {m_target} disjoint particles of radius {a} inside the \
                         domain; decrease a or the density"
                    )));
                }
            }
        }
    }
}

fn try_lattice(
    spec: &MediumSpec,
    a: f64,
    seed: u64,
    bbox: &Box3,
    cell: f64,
    m_target: usize,
) -> Result<Option<ParticleCloud>> {
    let sides = bbox.sides();
    let n: [usize; 3] = [
        (sides[0] / cell).round().max(1.0) as usize,
        (sides[1] / cell).round().max(1.0) as usize,
        (sides[2] / cell).round().max(1.0) as usize,
    ];
    let cells: [f64; 3] = [
        sides[0] / n[0] as f64,
        sides[1] / n[1] as f64,
        sides[2] / n[2] as f64,
    ];
    let min_cell = cells[0].min(cells[1]).min(cells[2]);
    if min_cell < 2.0 * a * (1.0 - 1e-12) {
        return Ok(None);
    }
    // jitter fraction of the cell: capped at 1/3 and at 1 - 2.2 a/cell so
    // neighbor spacing stays >= max(2.2a, 2 cell/3) >= 2a
    let eta = (1.0 - 2.2 * a / min_cell).clamp(0.0, 1.0 / 3.0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sites: Vec<(Point3, f64)> = Vec::with_capacity(n[0] * n[1] * n[2]);
    for i in 0..n[0] {
        for j in 0..n[1] {
            for k in 0..n[2] {
                // draw all variates in a fixed order so the stream does not
                // depend on which sites are admissible
                let jx: f64 = rng.gen_range(-0.5..0.5);
                let jy: f64 = rng.gen_range(-0.5..0.5);
                let jz: f64 = rng.gen_range(-0.5..0.5);
                let u: f64 = rng.gen_range(0.0..1.0);
                let p = Point3::new(
                    bbox.lo.x1 + (i as f64 + 0.5 + eta * jx) * cells[0],
                    bbox.lo.x2 + (j as f64 + 0.5 + eta * jy) * cells[1],
                    bbox.lo.x3 + (k as f64 + 0.5 + eta * jz) * cells[2],
                );
                if !spec.domain.contains(&p) {
                    continue;
                }
                let w = spec.density.eval(&p);
                if w < 0.0 {
                    return Err(Error::Domain(format!(
                        "density is negative at ({}, {}, {})",
                        p.x1, p.x2, p.x3
                    )));
                }
                if w > 0.0 {
                    // weighted sampling without replacement: keep the
                    // m_target largest keys u^(1/w), compared via ln(u)/w
                    sites.push((p, u.ln() / w));
                }
            }
        }
    }
    if sites.len() < m_target {
        return Ok(None);
    }
    sites.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite selection keys"));
    let mut centers: Vec<Point3> = sites[..m_target].iter().map(|s| s.0).collect();
    // deterministic order independent of the selection keys
    centers.sort_by(|p, q| {
        (p.x1, p.x2, p.x3)
            .partial_cmp(&(q.x1, q.x2, q.x3))
            .expect("finite coordinates")
    });

    let h: Vec<Complex64> = centers.iter().map(|c| spec.impedance.eval(c)).collect();
    if let Some(bad) = h.iter().position(|h| h.re < 0.0) {
        let c = centers[bad];
        return Err(Error::Domain(format!(
            "impedance has negative real part at ({}, {}, {})",
            c.x1, c.x2, c.x3
        )));
    }
    let d_min = realized_d_min(&centers);
    let cloud = ParticleCloud {
        a,
        kappa: spec.kappa,
        c_s: spec.shape_constant,
        centers,
        h,
        d_min,
    };
    cloud.validate()?;
    Ok(Some(cloud))
}

/// Exact minimal pairwise spacing via a spatial hash (each bucket holds few
/// points, so only 27-neighborhoods need checking).
fn realized_d_min(centers: &[Point3]) -> f64 {
    if centers.len() < 2 {
        return f64::INFINITY;
    }
    let mut lo = centers[0];
    let mut hi = centers[0];
    for c in centers {
        lo = Point3::new(lo.x1.min(c.x1), lo.x2.min(c.x2), lo.x3.min(c.x3));
        hi = Point3::new(hi.x1.max(c.x1), hi.x2.max(c.x2), hi.x3.max(c.x3));
    }
    let span = (hi.x1 - lo.x1).max(hi.x2 - lo.x2).max(hi.x3 - lo.x3).max(1e-300);
    let nb = ((centers.len() as f64).powf(1.0 / 3.0).ceil() as usize).max(1);
    let cell = span / nb as f64;
    let key = |p: &Point3| -> (i64, i64, i64) {
        (
            ((p.x1 - lo.x1) / cell) as i64,
            ((p.x2 - lo.x2) / cell) as i64,
            ((p.x3 - lo.x3) / cell) as i64,
        )
    };
    let mut buckets: std::collections::HashMap<(i64, i64, i64), Vec<usize>> =
        std::collections::HashMap::new();
    for (idx, c) in centers.iter().enumerate() {
        buckets.entry(key(c)).or_default().push(idx);
    }
    // expand the neighborhood ring until the found minimum is certified
    // (a pair closer than ring*cell cannot hide outside the ring)
    let mut ring = 1i64;
    loop {
        let mut best = f64::INFINITY;
        for (idx, c) in centers.iter().enumerate() {
            let (ki, kj, kk) = key(c);
            for di in -ring..=ring {
                for dj in -ring..=ring {
                    for dk in -ring..=ring {
                        if let Some(list) = buckets.get(&(ki + di, kj + dj, kk + dk)) {
                            for &other in list {
                                if other > idx {
                                    best = best.min(centers[idx].dist(&centers[other]));
                                }
                            }
                        }
                    }
                }
            }
        }
        if best <= ring as f64 * cell || ring as f64 * cell > span {
            return best;
        }
        ring += 1;
    }
}
