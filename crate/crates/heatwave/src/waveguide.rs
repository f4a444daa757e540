//! Separable cylinder spectrum lambda_n = mu_m + nu_l, eigen-expansion heat
//! evolution u(t) = sum e^{-lambda_n t} (f, phi_n) phi_n with
//! phi_n = v_m(rho) w_l(s), and the confinement / signal-transmission
//! diagnostics for the designed guide (lambda_1 = 0, lambda_2 = 11).

use crate::error::{Error, Result};
use crate::sturm_liouville::EigenPair1D;
use serde_json::json;

/// Sorted 3-D eigenvalues with their (radial, axial) factor indices and the
/// 1-D eigenpairs they were assembled from. Stored lambdas are the exact
/// sums mu_m + nu_l; nothing is re-solved.
#[derive(Debug, Clone)]
pub struct WaveguideSpectrum {
    pub lambdas: Vec<f64>,
    /// 0-based (m, l) factor indices, bijective with the lambda list.
    pub index_map: Vec<(usize, usize)>,
    pub radial: Vec<EigenPair1D>,
    pub axial: Vec<EigenPair1D>,
}

impl WaveguideSpectrum {
    pub fn r_max(&self) -> f64 {
        *self.radial[0].grid.last().expect("nonempty grid")
    }

    pub fn length(&self) -> f64 {
        *self.axial[0].grid.last().expect("nonempty grid")
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "lambdas": self.lambdas,
            "map": self.index_map.iter().map(|&(m, l)| [m + 1, l + 1]).collect::<Vec<_>>(),
            "R": self.r_max(),
            "L": self.length(),
        })
    }
}

/// Smallest `count` sums mu_m + nu_l. Errors when the requested count is not
/// resolvable from the supplied 1-D lists: any unenumerated sum is at least
/// min(mu_last + nu_first, mu_first + nu_last), so kept sums must stay below
/// that bound. Ties are broken by (m, l) lexicographic order.
pub fn assemble_spectrum(
    radial: Vec<EigenPair1D>,
    axial: Vec<EigenPair1D>,
    count: usize,
) -> Result<WaveguideSpectrum> {
    if radial.is_empty() || axial.is_empty() || count == 0 {
        return Err(Error::Domain("need 1-D modes and a positive count".into()));
    }
    let mu: Vec<f64> = radial.iter().map(|p| p.eigenvalue).collect();
    let nu: Vec<f64> = axial.iter().map(|p| p.eigenvalue).collect();
    let mut sums: Vec<(f64, usize, usize)> = Vec::with_capacity(mu.len() * nu.len());
    for (m, &a) in mu.iter().enumerate() {
        for (l, &b) in nu.iter().enumerate() {
            sums.push((a + b, m, l));
        }
    }
    sums.sort_by(|x, y| {
        x.0.partial_cmp(&y.0)
            .expect("finite eigenvalues")
            .then(x.1.cmp(&y.1))
            .then(x.2.cmp(&y.2))
    });
    if count > sums.len() {
        return Err(Error::Domain(format!(
            "requested {count} modes but only {} products available",
            sums.len()
        )));
    }
    let resolved = mu.last().unwrap() + nu[0].min(mu[0] + nu.last().unwrap());
    let worst = sums[count - 1].0;
    if worst > resolved {
        return Err(Error::Domain(format!(
            "count {count} unresolved: the {count}-th sum {worst:.4} exceeds the certified bound \
             {resolved:.4}; supply more radial ({} given) or axial ({} given) modes",
            mu.len(),
            nu.len()
        )));
    }
    let (lambdas, index_map) = sums[..count]
        .iter()
        .map(|&(v, m, l)| (v, (m, l)))
        .unzip();
    Ok(WaveguideSpectrum {
        lambdas,
        index_map,
        radial,
        axial,
    })
}

/// Axisymmetric initial temperature f(s, rho). The azimuthal variant exists
/// only to be rejected: the separable mode basis omits theta-dependence.
#[derive(Debug, Clone, Copy)]
pub enum InitialData {
    Zero,
    /// exp(-(s - s_center)^2 / 2 s_sigma^2) * exp(-rho^2 / 2 rho_sigma^2)
    AxialGaussian {
        s_center: f64,
        s_sigma: f64,
        rho_sigma: f64,
    },
    /// cos(azimuthal_index * theta)-modulated data; not axisymmetric.
    Azimuthal { azimuthal_index: usize },
}

impl InitialData {
    pub fn is_axisymmetric(&self) -> bool {
        !matches!(self, InitialData::Azimuthal { .. })
    }

    pub fn eval(&self, s: f64, rho: f64) -> f64 {
        match *self {
            InitialData::Zero => 0.0,
            InitialData::AxialGaussian {
                s_center,
                s_sigma,
                rho_sigma,
            } => {
                let ds = (s - s_center) / s_sigma;
                let dr = rho / rho_sigma;
                (-0.5 * (ds * ds + dr * dr)).exp()
            }
            InitialData::Azimuthal { .. } => {
                unreachable!("rejected before evaluation")
            }
        }
    }
}

fn require_axisymmetric(f: &InitialData) -> Result<()> {
    if f.is_axisymmetric() {
        Ok(())
    } else {
        Err(Error::Domain(
            "initial data is not axisymmetric; the separable mode basis cannot represent it"
                .into(),
        ))
    }
}

/// Modal coefficients c_n = (f, phi_n) = int f w_l(s) v_m(rho) rho drho ds
/// for the first n_modes modes, by trapezoid quadrature on the shared
/// eigenfunction grids (separated into per-m radial contractions).
pub fn project(spectrum: &WaveguideSpectrum, f: &InitialData, n_modes: usize) -> Result<Vec<f64>> {
    require_axisymmetric(f)?;
    if n_modes > spectrum.lambdas.len() {
        return Err(Error::Domain(format!(
            "n_modes {n_modes} exceeds the {} assembled modes",
            spectrum.lambdas.len()
        )));
    }
    let s_grid = &spectrum.axial[0].grid;
    let rho_grid = &spectrum.radial[0].grid;
    let hs = s_grid[1] - s_grid[0];
    let hr = rho_grid[1] - rho_grid[0];
    // f sampled once on the product grid
    let f_grid: Vec<Vec<f64>> = s_grid
        .iter()
        .map(|&s| rho_grid.iter().map(|&r| f.eval(s, r)).collect())
        .collect();
    let trap = |k: usize, n: usize| if k == 0 || k == n { 0.5 } else { 1.0 };
    let nr = rho_grid.len() - 1;
    let ns = s_grid.len() - 1;
    // g_m(s) = int f(s, rho) v_m(rho) rho drho
    let m_used: Vec<usize> = {
        let mut v: Vec<usize> = spectrum.index_map[..n_modes].iter().map(|&(m, _)| m).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut g = vec![vec![0.0; s_grid.len()]; spectrum.radial.len()];
    for &m in &m_used {
        let vm = &spectrum.radial[m].samples;
        for (si, row) in f_grid.iter().enumerate() {
            g[m][si] = row
                .iter()
                .enumerate()
                .map(|(k, &fv)| trap(k, nr) * fv * vm[k] * rho_grid[k])
                .sum::<f64>()
                * hr;
        }
    }
    let coeffs = spectrum.index_map[..n_modes]
        .iter()
        .map(|&(m, l)| {
            let wl = &spectrum.axial[l].samples;
            g[m].iter()
                .enumerate()
                .map(|(k, &gv)| trap(k, ns) * gv * wl[k])
                .sum::<f64>()
                * hs
        })
        .collect();
    Ok(coeffs)
}

/// L2(rho drho ds) norm of f on the eigenfunction grids.
pub fn initial_norm(spectrum: &WaveguideSpectrum, f: &InitialData) -> Result<f64> {
    require_axisymmetric(f)?;
    let s_grid = &spectrum.axial[0].grid;
    let rho_grid = &spectrum.radial[0].grid;
    let hs = s_grid[1] - s_grid[0];
    let hr = rho_grid[1] - rho_grid[0];
    let trap = |k: usize, n: usize| if k == 0 || k == n { 0.5 } else { 1.0 };
    let mut acc = 0.0;
    for (si, &s) in s_grid.iter().enumerate() {
        for (ri, &r) in rho_grid.iter().enumerate() {
            let fv = f.eval(s, r);
            acc += trap(si, s_grid.len() - 1) * trap(ri, rho_grid.len() - 1) * fv * fv * r;
        }
    }
    Ok((acc * hs * hr).sqrt())
}

/// Truncated eigen-expansion at time t on the (s, rho) product grid.
#[derive(Debug, Clone)]
pub struct EvolvedField {
    pub s: Vec<f64>,
    pub rho: Vec<f64>,
    /// values[si][ri] = u(s_si, rho_ri, t)
    pub values: Vec<Vec<f64>>,
    pub coefficients: Vec<f64>,
    /// e^{-lambda_{n_modes+1} t} * ||f||, bounding the dropped tail
    pub tail_bound: f64,
    pub t: f64,
}

impl EvolvedField {
    /// L2(rho drho ds) norm of the evolved field.
    pub fn norm(&self) -> f64 {
        let hs = self.s[1] - self.s[0];
        let hr = self.rho[1] - self.rho[0];
        let trap = |k: usize, n: usize| if k == 0 || k == n { 0.5 } else { 1.0 };
        let mut acc = 0.0;
        for (si, row) in self.values.iter().enumerate() {
            for (ri, &v) in row.iter().enumerate() {
                acc += trap(si, self.s.len() - 1) * trap(ri, self.rho.len() - 1)
                    * v * v * self.rho[ri];
            }
        }
        (acc * hs * hr).sqrt()
    }
}

/// u(., t) = sum_{n < n_modes} e^{-lambda_n t} c_n v_m(rho) w_l(s).
pub fn evolve(
    spectrum: &WaveguideSpectrum,
    f: &InitialData,
    t: f64,
    n_modes: usize,
) -> Result<EvolvedField> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    let coefficients = project(spectrum, f, n_modes)?;
    let s_grid = spectrum.axial[0].grid.clone();
    let rho_grid = spectrum.radial[0].grid.clone();
    let mut values = vec![vec![0.0; rho_grid.len()]; s_grid.len()];
    for (n, &c) in coefficients.iter().enumerate() {
        let (m, l) = spectrum.index_map[n];
        let amp = c * (-spectrum.lambdas[n] * t).exp();
        if amp == 0.0 {
            continue;
        }
        let vm = &spectrum.radial[m].samples;
        let wl = &spectrum.axial[l].samples;
        for (si, row) in values.iter_mut().enumerate() {
            let aw = amp * wl[si];
            for (ri, v) in row.iter_mut().enumerate() {
                *v += aw * vm[ri];
            }
        }
    }
    // dropped-tail bound; when every assembled mode is used, the next
    // eigenvalue is unknown and the last one gives a conservative bound
    let next_lambda = spectrum.lambdas[n_modes.min(spectrum.lambdas.len() - 1)];
    let tail_bound = (-next_lambda * t).exp() * initial_norm(spectrum, f)?;
    Ok(EvolvedField {
        s: s_grid,
        rho: rho_grid,
        values,
        coefficients,
        tail_bound,
        t,
    })
}

/// Least-squares slope of log || u(t) - c_1 e^{-lambda_1 t} phi_1 || over
/// uniformly spaced t in [t0, t1]; mode orthonormality turns the norm into
/// sqrt(sum_{n >= 2} c_n^2 e^{-2 lambda_n t}).
pub fn residual_decay_slope(
    spectrum: &WaveguideSpectrum,
    f: &InitialData,
    t0: f64,
    t1: f64,
    samples: usize,
) -> Result<f64> {
    if !(t1 > t0) || samples < 2 {
        return Err(Error::Domain("need t1 > t0 and >= 2 samples".into()));
    }
    let coeffs = project(spectrum, f, spectrum.lambdas.len())?;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for k in 0..samples {
        let t = t0 + (t1 - t0) * k as f64 / (samples - 1) as f64;
        let res2: f64 = coeffs
            .iter()
            .zip(&spectrum.lambdas)
            .skip(1)
            .map(|(&c, &lam)| c * c * (-2.0 * lam * t).exp())
            .sum();
        if res2 <= 0.0 {
            return Err(Error::Numerical("residual vanished; no slope to fit".into()));
        }
        let y = res2.sqrt().ln();
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
    }
    let n = samples as f64;
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

/// r = sup_{[R/2, R]} |v_1| / sup_{[0, R/2]} |v_1| and the sampled profile;
/// the profile is reported regardless of whether r < 1.
pub fn confinement_metric(spectrum: &WaveguideSpectrum) -> (f64, Vec<(f64, f64)>) {
    let v1 = &spectrum.radial[0];
    let half = spectrum.r_max() / 2.0;
    let mut inner = 0.0f64;
    let mut outer = 0.0f64;
    let mut profile = Vec::with_capacity(v1.grid.len());
    for (&rho, &v) in v1.grid.iter().zip(&v1.samples) {
        profile.push((rho, v.abs()));
        if rho <= half {
            inner = inner.max(v.abs());
        } else {
            outer = outer.max(v.abs());
        }
    }
    (outer / inner, profile)
}

/// Probe evaluations of the evolved field.
#[derive(Debug, Clone)]
pub struct HeatTrace {
    /// (s, rho) pairs as given
    pub probes: Vec<(f64, f64)>,
    pub times: Vec<f64>,
    /// values[k][p] = u(probe p, times[k])
    pub values: Vec<Vec<f64>>,
}

impl HeatTrace {
    pub fn validate(&self) -> Result<()> {
        for w in self.times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Domain("trace times must strictly increase".into()));
            }
        }
        if self.values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("trace contains non-finite values".into()));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,s,rho,value\n");
        for (k, &t) in self.times.iter().enumerate() {
            for (p, &(s, rho)) in self.probes.iter().enumerate() {
                out.push_str(&format!("{t},{s},{rho},{}\n", self.values[k][p]));
            }
        }
        out
    }
}

fn interp(grid: &[f64], samples: &[f64], x: f64) -> f64 {
    let n = grid.len();
    let h = grid[1] - grid[0];
    let x = x.clamp(grid[0], grid[n - 1]);
    let k = (((x - grid[0]) / h) as usize).min(n - 2);
    let t = (x - grid[k]) / h;
    samples[k] * (1.0 - t) + samples[k + 1] * t
}

/// Evaluate the truncated expansion at probes and times. An exact on-axis
/// probe is mapped to the first interior radial node, since every
/// transformed mode satisfies v(0) = 0 identically.
pub fn signal_trace(
    spectrum: &WaveguideSpectrum,
    f: &InitialData,
    probes: &[(f64, f64)],
    times: &[f64],
    n_modes: usize,
) -> Result<HeatTrace> {
    for w in times.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Domain("trace times must strictly increase".into()));
        }
    }
    if times.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::Domain("trace times must be >= 0".into()));
    }
    let coeffs = project(spectrum, f, n_modes)?;
    let rho_floor = spectrum.radial[0].grid[1];
    // per-probe mode shapes phi_n(probe)
    let shapes: Vec<Vec<f64>> = probes
        .iter()
        .map(|&(s, rho)| {
            let rho_eff = rho.max(rho_floor);
            spectrum.index_map[..n_modes]
                .iter()
                .map(|&(m, l)| {
                    interp(&spectrum.radial[m].grid, &spectrum.radial[m].samples, rho_eff)
                        * interp(&spectrum.axial[l].grid, &spectrum.axial[l].samples, s)
                })
                .collect()
        })
        .collect();
    let values = times
        .iter()
        .map(|&t| {
            shapes
                .iter()
                .map(|shape| {
                    coeffs
                        .iter()
                        .zip(&spectrum.lambdas)
                        .zip(shape)
                        .map(|((&c, &lam), &phi)| c * (-lam * t).exp() * phi)
                        .sum()
                })
                .collect()
        })
        .collect();
    let trace = HeatTrace {
        probes: probes.to_vec(),
        times: times.to_vec(),
        values,
    };
    trace.validate()?;
    Ok(trace)
}
