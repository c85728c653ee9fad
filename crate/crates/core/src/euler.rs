//! The Euler orbit: closed form, transverse linearized flow, rotation number,
//! stability and degeneracy curves.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{sample_step, State};
use crate::error::{Error, Result};
use crate::ode::{self, Tolerance};
use crate::paramspace::ReducedParams;
use crate::roots;
use crate::sp2index::{self, Mat2, Sp2Path};

pub const THETA_TOL: Tolerance = Tolerance::new(1e-12, 1e-14);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerOrbit {
    pub params: ReducedParams,
    pub varpi: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub period: f64,
}

impl EulerOrbit {
    pub fn radius(&self, theta: f64) -> f64 {
        let p = self.params;
        self.varpi * self.varpi * p.beta / (1.0 + p.eps * theta.cos())
    }

    pub fn radius_prime(&self, theta: f64) -> f64 {
        let p = self.params;
        let d = 1.0 + p.eps * theta.cos();
        self.varpi * self.varpi * p.beta * p.eps * theta.sin() / (d * d)
    }

    /// Phase-space point at anomaly θ.
    pub fn state_at(&self, theta: f64) -> State {
        let p = self.params;
        State::new(p.eps * theta.sin() / (self.varpi * p.beta), 0.0, self.radius(theta), 0.0)
    }

    /// Time since r_min at anomaly θ ∈ [0, 2π].
    pub fn time_at(&self, theta: f64) -> f64 {
        let e = self.params.eps;
        let turns = (theta / (2.0 * PI)).floor();
        let th = theta - 2.0 * PI * turns;
        let half = 0.5 * th;
        let mut ecc = 2.0 * ((1.0 - e).sqrt() * half.sin()).atan2((1.0 + e).sqrt() * half.cos());
        if ecc < 0.0 {
            ecc += 2.0 * PI;
        }
        let mean = ecc - e * ecc.sin();
        (turns + mean / (2.0 * PI)) * self.period
    }

    pub fn start(&self) -> State {
        State::new(0.0, 0.0, self.r_min, 0.0)
    }
}

pub fn build_euler(params: ReducedParams) -> EulerOrbit {
    let varpi = params.varpi();
    let w = varpi * varpi * params.beta;
    EulerOrbit {
        params,
        varpi,
        r_min: w / (1.0 + params.eps),
        r_max: w / (1.0 - params.eps),
        period: PI / (2f64.sqrt() * params.beta),
    }
}

fn theta_rhs(beta: f64, eps: f64) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] + Copy {
    // Fundamental matrix of ξ' = J₀ diag(1, q(θ)) ξ, row-major.
    move |th: f64, y: &[f64; 4]| {
        let q = 1.0 + 7.0 * beta / (1.0 + eps * th.cos());
        [-q * y[2], -q * y[3], y[0], y[1]]
    }
}

/// Fundamental solution of the transverse equation in the anomaly θ over
/// `periods` turns.
pub fn transverse_path_euler(params: ReducedParams, periods: usize) -> Result<Sp2Path> {
    let f = theta_rhs(params.beta, params.eps);
    let mut times = vec![0.0];
    let mut mats = vec![Mat2::identity()];
    let mut err = None;
    let to_mat = |y: &[f64; 4]| Ok(Mat2::new(y[0], y[1], y[2], y[3]));
    ode::integrate(f, 0.0, [1.0, 0.0, 0.0, 1.0], 2.0 * PI * periods as f64, THETA_TOL, |d| {
        if err.is_none() {
            if let Err(e) = sample_step(d, &mut times, &mut mats, to_mat) {
                err = Some(e);
            }
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Sp2Path::new(times, mats)
}

/// Monodromy of the transverse equation over one turn.
pub fn monodromy_euler(params: ReducedParams) -> Result<Mat2> {
    let f = theta_rhs(params.beta, params.eps);
    let y = ode::integrate(f, 0.0, [1.0, 0.0, 0.0, 1.0], 2.0 * PI, THETA_TOL, |_| {})?;
    Ok(Mat2::new(y[0], y[1], y[2], y[3]))
}

/// Range of the angular advance per turn of φ' = 1 + 7β sin²φ/(1 + ε cos θ)
/// over `turns` turns, across 16 initial phases in [0, π). The rotation
/// number lies in this range up to the sampling of the initial phase.
/// Fundamental matrix at θ = π. The coefficient is even in θ, so the full
/// monodromy satisfies tr + 2 = 4·m₀₀·m₁₁ and tr − 2 = 4·m₀₁·m₁₀ at half period.
pub fn half_monodromy_euler(params: ReducedParams) -> Result<Mat2> {
    let f = theta_rhs(params.beta, params.eps);
    let y = ode::integrate(f, 0.0, [1.0, 0.0, 0.0, 1.0], PI, Tolerance::tight(), |_| {})?;
    Ok(Mat2::new(y[0], y[1], y[2], y[3]))
}

/// (tr + 2, tr − 2) of the monodromy from the half-period factorization.
pub fn trace_offsets(params: ReducedParams) -> Result<(f64, f64)> {
    let h = half_monodromy_euler(params)?;
    Ok((4.0 * h[(0, 0)] * h[(1, 1)], 4.0 * h[(0, 1)] * h[(1, 0)]))
}

/// Monodromy trace, taken from whichever factorized offset is smaller.
pub fn monodromy_trace(params: ReducedParams) -> Result<f64> {
    let (plus, minus) = trace_offsets(params)?;
    Ok(if plus.abs() < minus.abs() { plus - 2.0 } else { minus + 2.0 })
}

pub fn phase_rotation_bounds(params: ReducedParams, turns: usize) -> Result<(f64, f64)> {
    let (b, e) = (params.beta, params.eps);
    let f = move |th: f64, y: &[f64; 16]| {
        let q = 7.0 * b / (1.0 + e * th.cos());
        let mut out = [0.0; 16];
        for (o, phi) in out.iter_mut().zip(y.iter()) {
            let s = phi.sin();
            *o = 1.0 + q * s * s;
        }
        out
    };
    let y0: [f64; 16] = std::array::from_fn(|i| PI * i as f64 / 16.0);
    let t_end = 2.0 * PI * turns as f64;
    let y = ode::integrate(f, 0.0, y0, t_end, Tolerance::new(1e-9, 1e-11), |_| {})?;
    let adv = y.iter().zip(y0.iter()).map(|(a, b)| (a - b) / t_end);
    Ok(adv.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x))))
}

/// ρ_e = 1 + ρ of the transverse path, cross-checked with the phase equation
/// integrated over 64 turns.
pub fn rotation_number_euler(params: ReducedParams) -> Result<f64> {
    let path = transverse_path_euler(params, 1)?;
    let (_, rho) = sp2index::mean_index_and_rotation(&path)?;
    let (lo, hi) = phase_rotation_bounds(params, 64)?;
    if rho < lo - 1e-3 || rho > hi + 1e-3 {
        return Err(Error::Consistency(format!("index rotation {rho} outside phase range [{lo}, {hi}]")));
    }
    Ok(1.0 + rho)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilityClass {
    Elliptic,
    NegativeHyperbolic,
    Degenerate,
}

impl StabilityClass {
    pub fn name(&self) -> &'static str {
        match self {
            StabilityClass::Elliptic => "elliptic",
            StabilityClass::NegativeHyperbolic => "negative_hyperbolic",
            StabilityClass::Degenerate => "degenerate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub class: StabilityClass,
    pub trace: f64,
    pub rho_e: f64,
}

pub fn stability_classify(params: ReducedParams) -> Result<StabilityVerdict> {
    let tr = monodromy_trace(params)?;
    if tr > 2.0 + 1e-7 {
        return Err(Error::Invariant(format!("positive hyperbolic trace {tr}")));
    }
    let class = if tr < -2.0 - 1e-9 {
        StabilityClass::NegativeHyperbolic
    } else if tr.abs() < 2.0 - 1e-9 {
        StabilityClass::Elliptic
    } else {
        StabilityClass::Degenerate
    };
    Ok(StabilityVerdict { class, trace: tr, rho_e: rotation_number_euler(params)? })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub beta: f64,
    pub eps: f64,
    pub verdict: StabilityVerdict,
}

/// Stability over a product grid, row-major in (β, ε), computed in parallel.
pub fn stability_map(betas: &[f64], epss: &[f64]) -> Result<Vec<StabilityRow>> {
    let pts: Vec<(f64, f64)> = betas.iter().flat_map(|&b| epss.iter().map(move |&e| (b, e))).collect();
    pts.par_iter()
        .map(|&(beta, eps)| {
            let v = stability_classify(ReducedParams::new(beta, eps)?)?;
            Ok(StabilityRow { beta, eps, verdict: v })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Omega {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Cosine,
    Sine,
}

pub const EPS_CLOSED_FORM: f64 = 1e-6;

fn recurrence_tail(beta: f64, eps: f64, omega: Omega, depth: usize) -> [f64; 2] {
    // Backward recurrence from (y_{N+1}, y_N) = (0, 1); returns the normalized
    // minimal solution at the junction: (a₁, a₀) for ω = −1, (a₃, a₂) for ω = +1.
    let shift = match omega {
        Omega::Minus => 0.5,
        Omega::Plus => 0.0,
    };
    let stop = match omega {
        Omega::Minus => 1,
        Omega::Plus => 3,
    };
    let (mut hi, mut lo) = (0.0, 1.0);
    let mut n = depth;
    while n >= stop {
        let k = n as f64 + shift;
        let a = 0.5 * eps * ((k + 1.0) * (k + 1.0) - 1.0);
        let b = 0.5 * eps * ((k - 1.0) * (k - 1.0) - 1.0);
        let c = 1.0 + 7.0 * beta - k * k;
        let next = (c * lo - a * hi) / b;
        let s = lo.hypot(next);
        hi = lo / s;
        lo = next / s;
        n -= 1;
    }
    [hi, lo]
}

fn forced_ratio(beta: f64, eps: f64, omega: Omega, family: Family) -> f64 {
    match (omega, family) {
        (Omega::Minus, Family::Cosine) => (6.0 + 56.0 * beta + 3.0 * eps) / (5.0 * eps),
        (Omega::Minus, Family::Sine) => (6.0 + 56.0 * beta - 3.0 * eps) / (5.0 * eps),
        (Omega::Plus, _) => (7.0 * beta - 3.0) / (4.0 * eps),
    }
}

fn mismatch_at(beta: f64, eps: f64, omega: Omega, family: Family, depth: usize) -> f64 {
    let [hi, lo] = recurrence_tail(beta, eps, omega, depth);
    let f = forced_ratio(beta, eps, omega, family);
    (f * lo - hi) / f.hypot(1.0)
}

/// Signed mismatch between the forced initial ratio and the decaying
/// solution of the Fourier recursion; zero exactly at ω-degenerate parameters.
pub fn fourier_degeneracy(params: ReducedParams, omega: Omega, family: Family, depth: usize) -> Result<f64> {
    let (beta, eps) = (params.beta, params.eps);
    if eps < EPS_CLOSED_FORM {
        let s = (1.0 + 7.0 * beta).sqrt();
        return Ok(match omega {
            Omega::Plus => (PI * s).sin(),
            Omega::Minus => (PI * s).cos(),
        });
    }
    if depth < 64 {
        return Err(Error::InvalidParameter(format!("recursion depth {depth} below 64")));
    }
    let m1 = mismatch_at(beta, eps, omega, family, depth);
    let m2 = mismatch_at(beta, eps, omega, family, 2 * depth);
    if (m1 - m2).abs() > 1e-8 {
        return Err(Error::Truncation(format!("mismatch changes by {} under depth doubling", (m1 - m2).abs())));
    }
    Ok(m2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyCurvePoint {
    pub omega: Omega,
    pub family: Family,
    pub beta: f64,
    pub eps: f64,
    /// n for ω = +1, n + 1/2 for ω = −1.
    pub label: f64,
}

impl DegeneracyCurvePoint {
    pub fn branch(&self) -> String {
        match self.omega {
            Omega::Plus => format!("gamma1_{}", self.label),
            Omega::Minus => {
                let s = if self.family == Family::Cosine { "+" } else { "-" };
                format!("gammam1_{}{}", self.label - 0.5, s)
            }
        }
    }
}

/// β-roots of the mismatch at fixed ε, ascending.
pub fn degeneracy_roots(eps: f64, omega: Omega, family: Family, depth: usize) -> Result<Vec<f64>> {
    let f = |b: f64| match ReducedParams::new(b, eps) {
        Ok(p) => fourier_degeneracy(p, omega, family, depth).unwrap_or(f64::NAN),
        Err(_) => f64::NAN,
    };
    let mut out = Vec::new();
    for (a, b) in roots::sign_changes(f, 1e-6, 1.0 - 1e-9, 400) {
        out.push(roots::brent(f, a, b, 1e-14, 200)?);
    }
    Ok(out)
}

/// Degeneracy curves for every ε of the grid; labels follow the ordering in β,
/// anchored at the ε = 0 values ((n+1/2)² − 1)/7 and (n² − 1)/7.
pub fn stability_boundary_curves(eps_grid: &[f64], n_max: usize) -> Result<Vec<DegeneracyCurvePoint>> {
    let branches = [(Omega::Minus, Family::Cosine), (Omega::Minus, Family::Sine), (Omega::Plus, Family::Cosine)];
    let per_eps: Vec<Result<Vec<DegeneracyCurvePoint>>> = eps_grid
        .par_iter()
        .map(|&eps| {
            let mut pts = Vec::new();
            for &(omega, family) in &branches {
                let roots = if eps < EPS_CLOSED_FORM {
                    anchors(omega, n_max)
                } else {
                    degeneracy_roots(eps, omega, family, 512)?
                };
                // the smallest admissible label: 1 + 1/2 for ω = −1, 2 for ω = +1
                let first = match omega {
                    Omega::Minus => 1.5,
                    Omega::Plus => 2.0,
                };
                for (i, beta) in roots.into_iter().enumerate() {
                    let label = first + i as f64;
                    if label > n_max as f64 + 0.5 {
                        break;
                    }
                    pts.push(DegeneracyCurvePoint { omega, family, beta, eps, label });
                }
            }
            Ok(pts)
        })
        .collect();
    let mut out = Vec::new();
    for r in per_eps {
        out.extend(r?);
    }
    Ok(out)
}

fn anchors(omega: Omega, n_max: usize) -> Vec<f64> {
    let shift = if omega == Omega::Minus { 0.5 } else { 0.0 };
    (1..=n_max).map(|n| ((n as f64 + shift).powi(2) - 1.0) / 7.0).filter(|&b| b > 0.0 && b < 1.0).collect()
}

/// β in [lo, hi] where the one-turn monodromy has trace 2ω (eigenvalue ω).
pub fn monodromy_degeneracy(eps: f64, omega: Omega, lo: f64, hi: f64) -> Result<f64> {
    let f = |b: f64| match ReducedParams::new(b, eps).and_then(trace_offsets) {
        Ok((plus, minus)) => {
            if omega == Omega::Plus {
                minus
            } else {
                plus
            }
        }
        Err(_) => f64::NAN,
    };
    roots::brent(f, lo, hi, 1e-13, 200)
}

fn sqrt_weight_coeffs(eps: f64) -> Vec<f64> {
    // Fourier cosine coefficients f̂_j of (1 + ε cos θ)^{1/2}.
    let n = 2048;
    let vals: Vec<f64> = (0..n).map(|i| (1.0 + eps * (2.0 * PI * i as f64 / n as f64).cos()).sqrt()).collect();
    let mut out = Vec::new();
    for j in 0..n / 4 {
        let c: f64 =
            vals.iter().enumerate().map(|(i, v)| v * (2.0 * PI * (i * j) as f64 / n as f64).cos()).sum::<f64>()
                / n as f64;
        out.push(c);
        if j > 4 && c.abs() < 1e-17 {
            break;
        }
    }
    out
}

fn hill_spectrum(beta: f64, sigma: f64, fhat: &[f64], n: usize) -> Vec<f64> {
    let jm = fhat.len() as i64 - 1;
    let fh = |j: i64| if j.abs() > jm { 0.0 } else { fhat[j.unsigned_abs() as usize] };
    let nn = n as i64;
    let dim = 2 * n + 1;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for (row, mi) in (-nn..=nn).enumerate() {
        for (col, ni) in (-nn..=nn).enumerate().skip(row) {
            let lo = mi.min(ni) - jm;
            let hi = mi.max(ni) + jm;
            let mut s = 0.0;
            for k in lo..=hi {
                let kk = k as f64 + sigma;
                s += fh(k - mi) * (kk * kk - 1.0) * fh(k - ni);
            }
            if row == col {
                s -= 7.0 * beta;
            }
            m[(row, col)] = s;
            m[(col, row)] = s;
        }
    }
    SymmetricEigen::new(m).eigenvalues.iter().cloned().collect()
}

/// (Morse index, nullity) of the Hill-type operator with Floquet multiplier ω.
pub fn hill_morse_index(params: ReducedParams, omega: Complex<f64>, n: usize) -> Result<(usize, usize)> {
    if n < 32 {
        return Err(Error::InvalidParameter(format!("truncation {n} below 32")));
    }
    if (omega.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter("omega must lie on the unit circle".into()));
    }
    let mut sigma = omega.arg() / (2.0 * PI);
    if sigma < 0.0 {
        sigma += 1.0;
    }
    let fhat = sqrt_weight_coeffs(params.eps);
    let count = |n: usize| {
        let ev = hill_spectrum(params.beta, sigma, &fhat, n);
        (ev.iter().filter(|&&l| l < -1e-6).count(), ev.iter().filter(|&&l| l.abs() <= 1e-6).count())
    };
    let a = count(n);
    let b = count(2 * n);
    if a != b {
        return Err(Error::Truncation(format!("index {a:?} at N = {n} vs {b:?} at N = {}", 2 * n)));
    }
    Ok(a)
}

/// Average of the Morse index over the m-th roots of unity.
pub fn bott_average(params: ReducedParams, m: usize, n: usize) -> Result<f64> {
    let idx: Result<Vec<usize>> = (0..m)
        .into_par_iter()
        .map(|j| hill_morse_index(params, Complex::from_polar(1.0, 2.0 * PI * j as f64 / m as f64), n).map(|r| r.0))
        .collect();
    Ok(idx?.iter().sum::<usize>() as f64 / m as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{flow_sampled, Model};

    fn p(b: f64, e: f64) -> ReducedParams {
        ReducedParams::new(b, e).unwrap()
    }

    #[test]
    fn closed_form_radii() {
        let o = build_euler(p(0.6, 0.6));
        assert!((o.r_min - 1.0 / 3.0).abs() < 1e-14);
        assert!((o.r_max - 4.0 / 3.0).abs() < 1e-14);
        assert!((o.radius(0.0) - o.r_min).abs() < 1e-15);
        assert!((o.radius(PI) - o.r_max).abs() < 1e-14);
        let pr = o.params;
        assert!((o.r_min - pr.r_min()).abs() < 1e-12 && (o.r_max - pr.r_max()).abs() < 1e-12);
    }

    #[test]
    fn period_by_quadrature() {
        for &(b, e) in &[(0.6, 0.6), (0.3, 0.1), (0.8, 0.9)] {
            let o = build_euler(p(b, e));
            // Simpson on ∫ r²/ϖ dθ
            let n = 20000;
            let h = 2.0 * PI / n as f64;
            let mut s = 0.0;
            for i in 0..=n {
                let w = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                let r = o.radius(i as f64 * h);
                s += w * r * r / o.varpi;
            }
            s *= h / 3.0;
            assert!((s - o.period).abs() < 1e-10 * o.period, "{s} {}", o.period);
        }
    }

    #[test]
    fn kepler_orbit_matches_flow() {
        let o = build_euler(p(0.6, 0.6));
        let m = Model::new(o.params);
        let thetas: Vec<f64> = (0..32).map(|i| 2.0 * PI * i as f64 / 32.0).collect();
        let times: Vec<f64> = thetas.iter().map(|&t| o.time_at(t)).collect();
        let states = flow_sampled(&m, &o.start(), &times, Tolerance::tight()).unwrap();
        for (th, s) in thetas.iter().zip(states.iter()) {
            let e = o.state_at(*th);
            assert!((s.r - e.r).abs() < 1e-8 && (s.p_r - e.p_r).abs() < 1e-8);
            assert_eq!(s.z, 0.0);
        }
        assert!((o.time_at(2.0 * PI) - o.period).abs() < 1e-12);
    }

    #[test]
    fn circular_rotation() {
        for i in 1..10 {
            let b = i as f64 / 10.0;
            let rho = rotation_number_euler(p(b, 0.0)).unwrap();
            assert!((rho - 1.0 - (1.0 + 7.0 * b).sqrt()).abs() < 1e-8);
        }
        assert!((rotation_number_euler(p(5.0 / 28.0, 0.0)).unwrap() - 2.5).abs() < 1e-8);
        assert!((rotation_number_euler(p(0.75, 0.0)).unwrap() - 3.5).abs() < 1e-8);
    }

    #[test]
    fn monodromy_is_symplectic() {
        for &(b, e) in &[(0.6, 0.6), (0.1, 0.95), (0.9, 0.3)] {
            let m = monodromy_euler(p(b, e)).unwrap();
            assert!((m.determinant() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn half_period_factorization() {
        for &(b, e) in &[(0.6, 0.6), (0.1, 0.95), (0.9, 0.3), (0.2, 0.0)] {
            let tr = monodromy_euler(p(b, e)).unwrap().trace();
            let (plus, minus) = trace_offsets(p(b, e)).unwrap();
            assert!((plus - 2.0 - tr).abs() < 1e-9 && (minus + 2.0 - tr).abs() < 1e-9, "{b} {e}: {tr} {plus} {minus}");
        }
    }

    #[test]
    fn half_integer_point_is_minus_one_degenerate() {
        let v = stability_classify(p(5.0 / 28.0, 0.0)).unwrap();
        assert_eq!(v.class, StabilityClass::Degenerate);
        assert!((v.trace + 2.0).abs() < 1e-9);
    }

    #[test]
    fn small_eps_anchors() {
        // roots at small ε approach the circular-orbit values
        let r = degeneracy_roots(1e-3, Omega::Minus, Family::Cosine, 512).unwrap();
        assert!((r[0] - 5.0 / 28.0).abs() < 1e-3);
        let r = degeneracy_roots(1e-3, Omega::Plus, Family::Cosine, 512).unwrap();
        assert!((r[0] - 3.0 / 7.0).abs() < 1e-3);
    }

    #[test]
    fn recursion_roots_match_monodromy() {
        let eps = 0.3;
        let bc = degeneracy_roots(eps, Omega::Minus, Family::Cosine, 512).unwrap()[0];
        let bs = degeneracy_roots(eps, Omega::Minus, Family::Sine, 512).unwrap()[0];
        let mid = 0.5 * (bc + bs);
        assert_eq!(stability_classify(p(mid, eps)).unwrap().class, StabilityClass::NegativeHyperbolic);
        for b in [bc, bs] {
            let m = monodromy_euler(p(b, eps)).unwrap();
            assert!((m.trace() + 2.0).abs() < 1e-7, "{b} {}", m.trace());
            let far = if b > mid { b + 1e-3 } else { b - 1e-3 };
            let bm = monodromy_degeneracy(eps, Omega::Minus, mid, far).unwrap();
            assert!((bm - b).abs() < 1e-6);
            assert_eq!(sp2index::nullity(&m, Complex::new(-1.0, 0.0)), 1);
        }
        let b = degeneracy_roots(eps, Omega::Plus, Family::Cosine, 512).unwrap()[0];
        let m = monodromy_euler(p(b, eps)).unwrap();
        assert!((m - Mat2::identity()).amax() < 1e-6);
    }

    #[test]
    fn morse_index_circular() {
        // eigenvalues n² − 1 − 7β: negative for n² < 5.2
        assert_eq!(hill_morse_index(p(0.6, 0.0), Complex::new(1.0, 0.0), 32).unwrap(), (5, 0));
        let path = transverse_path_euler(p(0.6, 0.0), 1).unwrap();
        assert_eq!(sp2index::conley_zehnder(&path).unwrap(), 5);
    }
}
