//! Convexity of the energy surface in the rescaled coordinates
//! r̃ = αr, z̃ = α√(1+2α) z, where V = ϖ²α²/(2r²) − α/r − 4/√(r² + z²).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paramspace::ReducedParams;
use crate::roots;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// (A, B, C) with Δ = Aϖ⁴ + Bϖ² + C.
pub fn coefficients_rz(r: f64, z: f64, alpha: f64) -> (f64, f64, f64) {
    let s = r * r + z * z;
    let s52 = s * s * s.sqrt();
    let s3 = s * s * s;
    let s72 = s3 * s.sqrt();
    let a2 = alpha * alpha;
    let a = 8.0 * (2.0 * z * z - r * r) * a2 * a2 / (s52 * r.powi(6));
    let b = 24.0 * (r * r - 2.0 * z * z) / (s52 * r * r) * (a2 * alpha / r.powi(3) - a2 / (r * r))
        + 48.0 * (2.0 * r * r - 3.0 * z * z) * a2 / (s3 * r.powi(4));
    let c = 4.0 * (r * r - 2.0 * z * z) / (s52 * r * r) * (-3.0 * a2 / (r * r) + 4.0 * alpha / r)
        - 192.0 / s72
        - (96.0 * (r * r - z * z) * alpha - 64.0 * r.powi(3)) / (s3 * r.powi(3));
    (a, b, c)
}

pub fn delta_rz(r: f64, z: f64, alpha: f64, varpi2: f64) -> f64 {
    let (a, b, c) = coefficients_rz(r, z, alpha);
    (a * varpi2 + b) * varpi2 + c
}

/// (a, b, c) of the slope form Δ̃ = (k⁷r⁹/4)Δ, with z² = (k² − 1)r².
pub fn coefficients_rk(r: f64, k: f64, alpha: f64) -> (f64, f64, f64) {
    let q = 2.0 * k * k - 3.0;
    let a2 = alpha * alpha;
    let a = 2.0 * a2 * a2 * k * k * q;
    let b = -6.0 * a2 * k * r * ((alpha * k - r * k + 3.0) * q - 1.0);
    let c = r * r * (alpha * k * q - 4.0) * (12.0 + 3.0 * alpha * k - 4.0 * k * r);
    (a, b, c)
}

pub fn delta_rk(r: f64, k: f64, alpha: f64, varpi2: f64) -> f64 {
    let (a, b, c) = coefficients_rk(r, k, alpha);
    (a * varpi2 + b) * varpi2 + c
}

/// Discriminant factor: b² − 4ac = 4α⁴k²r²I.
pub fn disc_i(r: f64, k: f64, alpha: f64) -> f64 {
    let q = 2.0 * k * k - 3.0;
    let t = (3.0 + alpha * k - r * k) * q - 1.0;
    9.0 * t * t - 2.0 * q * (alpha * k * q - 4.0) * (12.0 + 3.0 * alpha * k - 4.0 * k * r)
}

pub fn f0(r: f64, k: f64, alpha: f64) -> f64 {
    74.0 + 15.0 * alpha * k - 54.0 * k * k - 10.0 * alpha * k.powi(3) - 27.0 * k * r + 18.0 * k.powi(3) * r
}

pub fn f1(r: f64, k: f64, alpha: f64) -> f64 {
    3.0 * alpha + 8.0 * k - alpha * k * k * (3.0 - 2.0 * k * k) + 4.0 * (1.0 - 2.0 * k * k) * r
}

pub fn f2(r: f64, k: f64, alpha: f64) -> f64 {
    let q = 3.0 - 2.0 * k * k;
    -16.0 + 12.0 * k * k - alpha * k * q + 2.0 * q * r * k
}

pub fn f3(k: f64, alpha: f64) -> f64 {
    let k2 = k * k;
    256.0 * k.powi(3) * (k2 - 1.0) + alpha * alpha * k.powi(3) * (2.0 * k2 - 3.0).powi(3) * (1.0 + 2.0 * k2)
        - 2.0 * alpha * (-9.0 + 81.0 * k2 - 54.0 * k2 * k2 - 20.0 * k2.powi(3) + 8.0 * k2.powi(4))
}

pub fn f4(k: f64, alpha: f64) -> f64 {
    let k2 = k * k;
    alpha * alpha * k2 * (k2 - 1.0) * (2.0 * k2 - 5.0).powi(3) + 32.0 * (17.0 - 34.0 * k2 + 16.0 * k2 * k2)
        - 8.0 * alpha * k * (2.0 * k2 - 5.0) * (13.0 - 22.0 * k2 + 8.0 * k2 * k2)
}

pub fn d_poly(k: f64, alpha: f64) -> f64 {
    let k2 = k * k;
    8.0 * (51.0 - 116.0 * k2 + 88.0 * k2 * k2 - 24.0 * k2.powi(3))
        + alpha * k * (2.0 * k2 - 5.0) * (2.0 * k2 - 3.0) * (13.0 - 17.0 * k2 + 6.0 * k2 * k2)
}

/// The curve F₁ = 0 as a graph r = r₁(k).
pub fn r1(k: f64, alpha: f64) -> f64 {
    -(3.0 * alpha + 8.0 * k - alpha * k * k * (3.0 - 2.0 * k * k)) / (4.0 * (1.0 - 2.0 * k * k))
}

pub fn i1(k: f64, alpha: f64) -> f64 {
    let s = 2.0 * k * k - 1.0;
    16.0 * s * s * disc_i(r1(k, alpha), k, alpha)
}

const K2_TIE: f64 = 1e-8;

/// Roots w₊, w₋ of Δ̃ = 0 in ϖ²; w₋ is undefined at k² = 3/2.
pub fn w_branches(r: f64, k: f64, alpha: f64) -> Result<(f64, Option<f64>)> {
    let i = disc_i(r, k, alpha);
    if i < -1e-10 * (1.0 + i.abs()) {
        return Err(Error::Consistency(format!("negative discriminant {i} at (r, k) = ({r}, {k})")));
    }
    let (a, b, c) = coefficients_rk(r, k, alpha);
    let sq = 2.0 * alpha * alpha * k * r * i.max(0.0).sqrt();
    if (k * k - 1.5).abs() < K2_TIE {
        return Ok((-2.0 * c / (b + sq), None));
    }
    if b >= 0.0 {
        let q = -0.5 * (b + sq);
        Ok((c / q, Some(q / a)))
    } else {
        let q = -0.5 * (b - sq);
        Ok((q / a, Some(c / q)))
    }
}

/// w₁,± (k) = w±(r₁(k), k).
pub fn w1(k: f64, alpha: f64) -> Result<(f64, Option<f64>)> {
    w_branches(r1(k, alpha), k, alpha)
}

/// α as a function of the critical slope k̂₁.
pub fn alpha_of_k1(k: f64) -> f64 {
    let k2 = k * k;
    4.0 * (13.0 - 22.0 * k2 + 8.0 * k2 * k2 + (2.0 * k2 - 1.0).powf(1.5)) / (k * (2.0 * k2 - 5.0).powi(2) * (k2 - 1.0))
}

pub fn k1_bounds() -> (f64, f64) {
    ((17.0 + 17f64.sqrt()).sqrt() / 4.0, 2.5f64.sqrt())
}

pub fn k1_of_alpha(alpha: f64) -> Result<f64> {
    let (lo, hi) = k1_bounds();
    let span = hi - lo;
    roots::brent(|k| alpha_of_k1(k) - alpha, lo + 1e-15 * span, hi - 1e-12 * span, 1e-15, 300)
}

/// ϖ̂² = w₁,₊(k̂₁) in closed form.
pub fn varpi_hat2(k: f64, alpha: f64) -> f64 {
    let k2 = k * k;
    (alpha * k * (2.0 * k2 - 5.0) - 8.0) * (8.0 * k + alpha * (3.0 - 3.0 * k2 + 2.0 * k2 * k2))
        / (4.0 * alpha * alpha * k * (5.0 - 12.0 * k2 + 4.0 * k2 * k2))
}

pub fn alpha_of_beta(beta: f64) -> f64 {
    4.0 * beta / (1.0 - beta)
}

pub fn beta_of_alpha(alpha: f64) -> f64 {
    alpha / (alpha + 4.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvRoot {
    pub eps: f64,
    pub k1: f64,
    pub varpi2: f64,
}

/// Interior loss of convexity through the critical slope.
pub fn eps_conv_root(beta: f64) -> Result<ConvRoot> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta} outside (0, 1)")));
    }
    let alpha = alpha_of_beta(beta);
    let k1 = k1_of_alpha(alpha)?;
    let varpi2 = varpi_hat2(k1, alpha);
    let e2 = 1.0 - 2.0 * varpi2 * beta * beta;
    Ok(ConvRoot { eps: e2.max(0.0).sqrt(), k1, varpi2 })
}

pub fn nu_bounds() -> (f64, f64) {
    ((1.0 + 17f64.sqrt()) / 4.0, 2.0)
}

pub fn g_nu(nu: f64) -> f64 {
    2.0 * SQRT2 * (-2.0 - nu + 2.0 * nu * nu) + (2.0 - nu).powi(2) * (1.0 + nu) * (2.0 + nu) * (1.0 + nu * nu).sqrt()
}

fn quartic_nu(nu: f64) -> f64 {
    12.0 + 4.0 * nu - 9.0 * nu * nu - 2.0 * nu.powi(3) + 3.0 * nu.powi(4)
}

/// w₁,₊(k̂₁)/(1 + 4α⁻¹)² along the curve.
pub fn w_nu(nu: f64) -> f64 {
    let g = g_nu(nu);
    nu * nu * quartic_nu(nu) / (g * g)
}

/// w₁,₊(k̂₁) along the curve.
pub fn w1_plus_nu(nu: f64) -> f64 {
    let d = 2.0 + nu - 2.0 * nu * nu;
    nu * nu * quartic_nu(nu) / (8.0 * d * d)
}

pub fn w1_aux_nu(nu: f64) -> f64 {
    let t = 2.0 - nu;
    -3.0 * t * t * t - 3.0 * t.powi(3) * t * nu - (34.0 - 25.0 * nu + 7.0 * nu * nu + 6.0 * nu.powi(3)) * t * nu * nu
}

pub fn w2_aux_nu(nu: f64) -> f64 {
    -4.0 + nu * nu - nu.powi(4) + 2.0 * SQRT2 * (1.0 + nu * nu).sqrt()
}

/// V at (r₁(k̂₁), k̂₁) on the curve.
pub fn v1_nu(nu: f64) -> f64 {
    4.0 * (-4.0 - 2.0 * nu + 3.0 * nu * nu + nu.powi(3) - nu.powi(4)) / quartic_nu(nu)
}

/// (β_conv, e_conv)(ν).
pub fn conv_curve_param(nu: f64) -> (f64, f64) {
    let beta = 2.0 * SQRT2 * (2.0 * nu * nu - nu - 2.0) / g_nu(nu);
    // 1 − 2W with the factor (2 − ν) pulled out, so e vanishes exactly at ν = 2
    let t = 2.0 - nu;
    let q = 6.0 * nu.powi(5) + 8.0 * nu.powi(4) - 34.0 * nu.powi(3) - 28.0 * nu * nu + 24.0 * nu + 16.0;
    let l = (1.0 + nu) * (2.0 + nu);
    let s = (1.0 + nu * nu).sqrt();
    let p = 2.0 * nu * nu - nu - 2.0;
    let num = t * (q + 4.0 * SQRT2 * p * t * l * s + t.powi(3) * l * l * (1.0 + nu * nu));
    let g = g_nu(nu);
    (beta, num.max(0.0).sqrt() / g)
}

/// ε_conv(β) from the ν-parametrization.
pub fn eps_conv_param(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta} outside (0, 1)")));
    }
    let (lo, hi) = nu_bounds();
    let nu = roots::brent(|nu| conv_curve_param(nu).0 - beta, lo, hi, 1e-15, 300)?;
    Ok(conv_curve_param(nu).1)
}

/// Slope extent of the Hill region, 4/(α(√2ϖ − 1)).
pub fn k_max(alpha: f64, varpi2: f64) -> f64 {
    4.0 / (alpha * ((2.0 * varpi2).sqrt() - 1.0))
}

/// (J, r_L, r_R) at slope k, or None outside the Hill region.
pub fn hill_rk(k: f64, alpha: f64, varpi2: f64) -> Option<(f64, f64, f64)> {
    let s = 4.0 + alpha * k;
    let j2 = s * s - 2.0 * varpi2 * alpha * alpha * k * k;
    if j2 < 0.0 {
        return None;
    }
    let j = j2.sqrt();
    Some((j, (s - j) / (2.0 * k), (s + j) / (2.0 * k)))
}

/// Potential in (r, k) form.
pub fn potential_rk(r: f64, k: f64, alpha: f64, varpi2: f64) -> f64 {
    varpi2 * alpha * alpha / (2.0 * r * r) - alpha / r - 4.0 / (k * r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvexityClass {
    StrictlyConvex,
    ConvexNotStrict,
    NonConvex,
}

impl ConvexityClass {
    pub fn name(&self) -> &'static str {
        match self {
            ConvexityClass::StrictlyConvex => "strictly_convex",
            ConvexityClass::ConvexNotStrict => "convex_not_strict",
            ConvexityClass::NonConvex => "non_convex",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub params: ReducedParams,
    pub class: ConvexityClass,
    pub eps_conv: f64,
    /// (r₁(k̂₁), k̂₁) when not convex.
    pub witness: Option<(f64, f64)>,
    pub delta_at_witness: Option<f64>,
}

pub fn classify(params: ReducedParams) -> Result<ConvexityReport> {
    let root = eps_conv_root(params.beta)?;
    let d = params.eps - root.eps;
    let class = if d.abs() < 1e-9 {
        ConvexityClass::ConvexNotStrict
    } else if d < 0.0 {
        ConvexityClass::StrictlyConvex
    } else {
        ConvexityClass::NonConvex
    };
    let (witness, delta_at_witness) = if class == ConvexityClass::NonConvex {
        let alpha = params.alpha();
        let w = (r1(root.k1, alpha), root.k1);
        (Some(w), Some(delta_rk(w.0, w.1, alpha, params.varpi2())))
    } else {
        (None, None)
    };
    Ok(ConvexityReport { params, class, eps_conv: root.eps, witness, delta_at_witness })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaScan {
    pub min: f64,
    pub r: f64,
    pub k: f64,
}

/// Minimum of Δ̃ over the Hill region by a grid in (slope, relative radius)
/// followed by compass refinement from the best node.
pub fn min_delta_scan(params: ReducedParams, grid_n: usize) -> Result<DeltaScan> {
    let alpha = params.alpha();
    let w2 = params.varpi2();
    let kmax = k_max(alpha, w2);
    if !(kmax > 1.0) {
        return Err(Error::Domain("Hill region has no slope extent".into()));
    }
    let eval = |s: f64, t: f64| -> (f64, f64, f64) {
        let s = s.clamp(0.0, 1.0);
        let t = t.clamp(0.0, 1.0);
        let k = 1.0 + (kmax - 1.0) * s;
        match hill_rk(k, alpha, w2) {
            Some((_, rl, rr)) => {
                let r = rl + (rr - rl) * t;
                (delta_rk(r, k, alpha, w2), r, k)
            }
            None => {
                let r = 0.5 * (4.0 + alpha * k) / k;
                (delta_rk(r, k, alpha, w2), r, k)
            }
        }
    };
    let n = grid_n.max(4);
    let rows: Vec<(f64, f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let s = i as f64 / (n - 1) as f64;
            let mut best = (f64::INFINITY, s, 0.0);
            for j in 0..n {
                let t = j as f64 / (n - 1) as f64;
                let v = eval(s, t).0;
                if v < best.0 {
                    best = (v, s, t);
                }
            }
            best
        })
        .collect();
    let mut best = rows.into_iter().fold((f64::INFINITY, 0.0, 0.0), |a, b| if b.0 < a.0 { b } else { a });
    let mut h = 1.0 / (n - 1) as f64;
    while h > 1e-13 {
        let mut moved = false;
        for (ds, dt) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h), (h, h), (-h, -h), (h, -h), (-h, h)] {
            let (s, t) = ((best.1 + ds).clamp(0.0, 1.0), (best.2 + dt).clamp(0.0, 1.0));
            let v = eval(s, t).0;
            if v < best.0 {
                best = (v, s, t);
                moved = true;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    let (min, r, k) = eval(best.1, best.2);
    Ok(DeltaScan { min, r, k })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLoss {
    pub k0: f64,
    pub varpi0_sq: f64,
    pub eps: f64,
}

pub fn k0_bounds() -> (f64, f64) {
    (((11.0 + 17f64.sqrt()) / 8.0).sqrt(), 2.5f64.sqrt())
}

fn b8(k: f64, alpha: f64) -> f64 {
    let k2 = k * k;
    4.0 * (13.0 - 22.0 * k2 + 8.0 * k2 * k2) - alpha * k * (k2 - 1.0) * (2.0 * k2 - 5.0).powi(2)
}

/// Slope and angular momentum at which Δ first vanishes on ∂ℋ.
pub fn boundary_loss_curve(alpha: f64) -> Result<BoundaryLoss> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha}")));
    }
    let (lo, hi) = k0_bounds();
    let k0 = roots::brent(|k| b8(k, alpha), lo, hi, 1e-15, 300)?;
    let k2 = k0 * k0;
    let p = 13.0 - 22.0 * k2 + 8.0 * k2 * k2;
    let varpi0_sq = (2.0 * k2 - 3.0).powi(4) * (2.0 * k2 - 1.0) / (2.0 * p * p);
    let beta = beta_of_alpha(alpha);
    let e2 = 1.0 - 2.0 * varpi0_sq * beta * beta;
    Ok(BoundaryLoss { k0, varpi0_sq, eps: e2.max(0.0).sqrt() })
}

/// W(k) = ((4 + αk)² − J_{L,+}²)/(2α²k²): the boundary threshold at slope k > √(3/2).
pub fn boundary_threshold(k: f64, alpha: f64) -> f64 {
    let k2 = k * k;
    let q = 2.0 * k2 - 3.0;
    let s = 4.0 + alpha * k;
    let jl = 2.0 * (k2 - 1.0) / q * (-1.0 + (1.0 + s * q / (k2 - 1.0)).sqrt());
    (s * s - jl * jl) / (2.0 * alpha * alpha * k2)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Δ from the definition, with closed-form derivatives of the rescaled potential.
    fn delta_direct(r: f64, z: f64, alpha: f64, w2: f64) -> f64 {
        let p = w2 * alpha * alpha;
        let rho2 = r * r + z * z;
        let rho = rho2.sqrt();
        let rho3 = rho2 * rho;
        let rho5 = rho3 * rho2;
        let v = p / (2.0 * r * r) - alpha / r - 4.0 / rho;
        let vr = -p / r.powi(3) + alpha / (r * r) + 4.0 * r / rho3;
        let vz = 4.0 * z / rho3;
        let vrr = 3.0 * p / r.powi(4) - 2.0 * alpha / r.powi(3) + 4.0 * (1.0 / rho3 - 3.0 * r * r / rho5);
        let vrz = -12.0 * r * z / rho5;
        let vzz = 4.0 * (1.0 / rho3 - 3.0 * z * z / rho5);
        -2.0 * (1.0 + v) * (vrr * vzz - vrz * vrz) + vrr * vz * vz + vzz * vr * vr - 2.0 * vrz * vr * vz
    }

    fn pts() -> Vec<(f64, f64, f64, f64)> {
        vec![(1.3, 0.4, 2.0, 0.8), (5.0, 2.0, 6.0, 0.7), (0.7, 0.9, 0.5, 3.0), (12.0, 1.0, 20.0, 0.6)]
    }

    #[test]
    fn delta_forms_agree() {
        for (r, z, alpha, w2) in pts() {
            let d0 = delta_direct(r, z, alpha, w2);
            let d1 = delta_rz(r, z, alpha, w2);
            assert!((d0 - d1).abs() < 1e-9 * d0.abs().max(1e-300), "{d0} {d1}");
            assert_eq!(delta_rz(r, -z, alpha, w2), d1);
            let k = (1.0 + z * z / (r * r)).sqrt();
            let dt = delta_rk(r, k, alpha, w2);
            let scaled = k.powi(7) * r.powi(9) / 4.0 * d1;
            assert!((dt - scaled).abs() < 1e-9 * dt.abs(), "{dt} {scaled}");
        }
    }

    #[test]
    fn boundary_sign_form() {
        for &(alpha, w2) in &[(3.0, 0.9), (6.0, 0.6), (1.0, 3.0)] {
            let kmax = k_max(alpha, w2);
            for i in 0..50 {
                let k = 1.0 + (kmax - 1.0) * (i as f64 + 0.5) / 50.0;
                let (j, rl, _) = hill_rk(k, alpha, w2).unwrap();
                let k2 = k * k;
                let dl = -(2.0 * k2 - 3.0) * j * j - 4.0 * (k2 - 1.0) * j + 4.0 * (4.0 + alpha * k) * (k2 - 1.0);
                let d = delta_rk(rl, k, alpha, w2);
                if dl.abs() > 1e-8 && d.abs() > 1e-8 {
                    assert_eq!(dl > 0.0, d > 0.0, "k = {k}: {dl} {d}");
                }
            }
        }
    }

    #[test]
    fn discriminant_and_branches() {
        for &(r, k, alpha) in &[(1.0, 1.1, 2.0), (3.0, 1.4, 6.0), (0.5, 1.7, 1.0), (8.0, 2.2, 10.0)] {
            let i = disc_i(r, k, alpha);
            assert!(i >= -1e-12);
            let (wp, wm) = w_branches(r, k, alpha).unwrap();
            let (a, b, c) = coefficients_rk(r, k, alpha);
            let scale = a.abs() * wp * wp + b.abs() * wp.abs() + c.abs();
            assert!(delta_rk(r, k, alpha, wp).abs() < 1e-8 * scale);
            let dp = 2.0 * a * wp + b;
            let expect = 2.0 * alpha * alpha * k * r * i.sqrt();
            assert!((dp - expect).abs() < 1e-8 * expect);
            let wm = wm.unwrap();
            let dm = 2.0 * a * wm + b;
            assert!((dm + expect).abs() < 1e-8 * expect);
        }
        // vanishing discriminant
        let k: f64 = 1.5;
        let q = 2.0 * k * k - 3.0;
        let alpha = 4.0 / (k * q);
        let r = 6.0 * (k * k - 1.0) / (k * q);
        assert!(disc_i(r, k, alpha).abs() < 1e-10);
        assert!(f2(r, k, alpha).abs() < 1e-10 && f1(r, k, alpha) < 0.0);
        // k² = 3/2
        let k = 1.5f64.sqrt();
        let (alpha, r) = (3.0, 2.0);
        let (wp, wm) = w_branches(r, k, alpha).unwrap();
        assert!(wm.is_none());
        let expect = (-8.0 * r * r + 6.0 * alpha * r + 8.0 * 6f64.sqrt() * r) / (3.0 * alpha * alpha);
        assert!((wp - expect).abs() < 1e-12);
        // w₊ is continuous across k² = 3/2
        let near = w_branches(r, k + 1e-6, alpha).unwrap().0;
        assert!((near - wp).abs() < 1e-4);
    }

    #[test]
    fn critical_slope_relations() {
        for &alpha in &[0.5, 2.0, 6.0, 40.0] {
            let k = k1_of_alpha(alpha).unwrap();
            assert!(f1(r1(k, alpha), k, alpha).abs() < 1e-10);
            assert!(f4(k, alpha).abs() < 1e-8 * (1.0 + alpha * alpha), "F4 {}", f4(k, alpha));
            assert!(d_poly(k, alpha) < 0.0);
            let (wp, _) = w1(k, alpha).unwrap();
            assert!((wp - varpi_hat2(k, alpha)).abs() < 1e-10 * wp);
            // local maximum of w₁,₊
            let h = 1e-4;
            let (a, _) = w1(k - h, alpha).unwrap();
            let (b, _) = w1(k + h, alpha).unwrap();
            assert!(a < wp && b < wp);
            assert!(((b - a) / (2.0 * h)).abs() < 1e-6);
            // on the ν-curve
            let nu = (2.0 * k * k - 1.0).sqrt();
            let scale = (1.0 + 4.0 / alpha).powi(2);
            assert!((w_nu(nu) - wp / scale).abs() < 1e-10);
            assert!((w1_plus_nu(nu) - wp).abs() < 1e-9 * wp);
            let v = potential_rk(r1(k, alpha), k, alpha, wp);
            assert!((v - v1_nu(nu)).abs() < 1e-10);
            assert!(v < -1.0);
        }
    }

    #[test]
    fn w1_derivative_formula() {
        let alpha = 6.0;
        for &k in &[1.05, 1.3, 1.45, 1.9] {
            let h = 1e-5;
            let (ap, am) = w1(k - h, alpha).unwrap();
            let (bp, bm) = w1(k + h, alpha).unwrap();
            let fd_p = (bp - ap) / (2.0 * h);
            let fd_m = (bm.unwrap() - am.unwrap()) / (2.0 * h);
            let k2 = k * k;
            let sq = i1(k, alpha).sqrt();
            let den = 8.0 * alpha * alpha * k2 * (2.0 * k2 - 1.0).powi(3) * (2.0 * k2 - 3.0).powi(2) * sq;
            let num = |sgn: f64| 3.0 * (k2 - 1.0) * f3(k, alpha) * (sgn * d_poly(k, alpha) + (5.0 - 2.0 * k2) * sq);
            assert!((num(1.0) / den - fd_p).abs() < 1e-5 * (1.0 + fd_p.abs()), "{k}: {} vs {fd_p}", num(1.0) / den);
            assert!((num(-1.0) / den - fd_m).abs() < 1e-5 * (1.0 + fd_m.abs()), "{k}: {} vs {fd_m}", num(-1.0) / den);
        }
    }

    #[test]
    fn slope_derivative_at_radial_critical_point() {
        let alpha = 6.0;
        for &k in &[1.1, 1.4, 1.8] {
            // r with ∂_r w₊ = 0 on this slope
            let dr = |r: f64| {
                let h = 1e-6;
                (w_branches(r + h, k, alpha).unwrap().0 - w_branches(r - h, k, alpha).unwrap().0) / (2.0 * h)
            };
            let brackets = roots::sign_changes(dr, 0.2, 12.0, 400);
            let r = roots::brent(dr, brackets[0].0, brackets[0].1, 1e-12, 200).unwrap();
            let h = 1e-5;
            let fd = (w_branches(r, k + h, alpha).unwrap().0 - w_branches(r, k - h, alpha).unwrap().0) / (2.0 * h);
            let q = 2.0 * k * k - 3.0;
            let i = disc_i(r, k, alpha);
            let formula = 18.0 * r * f1(r, k, alpha) * f2(r, k, alpha)
                / (alpha * alpha * k * q * (i + r * k * q * f0(r, k, alpha)));
            assert!((fd - formula).abs() < 1e-4 * (1.0 + fd.abs()), "{k}: {fd} vs {formula}");
        }
    }

    #[test]
    fn curve_endpoints_and_routes() {
        let (lo, hi) = nu_bounds();
        let (b0, e0) = conv_curve_param(lo);
        assert!(b0.abs() < 1e-12);
        assert!((e0 - (7.0 + 17f64.sqrt()) / 16.0).abs() < 1e-12);
        let (b1, e1) = conv_curve_param(hi);
        assert!((b1 - 1.0).abs() < 1e-12 && e1 < 1e-12);
        assert!((w_nu(lo) - (95.0 - 7.0 * 17f64.sqrt()) / 256.0).abs() < 1e-12);
        assert!((w_nu(hi) - 0.5).abs() < 1e-12);
        for &beta in &[0.1, 0.5, 0.9] {
            let a = eps_conv_root(beta).unwrap().eps;
            let b = eps_conv_param(beta).unwrap();
            assert!((a - b).abs() < 1e-10, "{beta}: {a} {b}");
        }
    }

    #[test]
    fn auxiliary_signs() {
        let (lo, hi) = nu_bounds();
        for i in 1..100 {
            let nu = lo + (hi - lo) * i as f64 / 100.0;
            assert!(g_nu(nu) > 0.0);
            assert!(w1_aux_nu(nu) < 0.0);
            assert!(w2_aux_nu(nu) < 0.0);
        }
    }

    #[test]
    fn curve_derivatives() {
        let (lo, hi) = nu_bounds();
        for i in 1..20 {
            let nu = lo + (hi - lo) * i as f64 / 20.0;
            let h = 1e-6;
            let fd_b = (conv_curve_param(nu + h).0 - conv_curve_param(nu - h).0) / (2.0 * h);
            let fd_w = (w_nu(nu + h) - w_nu(nu - h)) / (2.0 * h);
            let g = g_nu(nu);
            let s = (1.0 + nu * nu).sqrt();
            let db = -2.0 * SQRT2 * nu * w1_aux_nu(nu) / (s * g * g);
            let dw = 2.0 * nu * w1_aux_nu(nu) * w2_aux_nu(nu) / (s * g * g * g);
            assert!((fd_b - db).abs() < 1e-7 * (1.0 + db.abs()), "{nu}: {fd_b} {db}");
            assert!((fd_w - dw).abs() < 1e-7 * (1.0 + dw.abs()), "{nu}: {fd_w} {dw}");
            assert!(db > 0.0 && dw > 0.0);
        }
    }

    #[test]
    fn boundary_loss() {
        for &alpha in &[0.5, 2.0, 6.0, 40.0] {
            let bl = boundary_loss_curve(alpha).unwrap();
            let (lo, hi) = k0_bounds();
            assert!(bl.k0 > lo && bl.k0 < hi);
            // maximum of the boundary threshold over slopes
            let mut best: f64 = 0.0;
            for i in 1..4000 {
                let k = 1.5f64.sqrt() + 1.5 * i as f64 / 4000.0;
                best = best.max(boundary_threshold(k, alpha));
            }
            assert!((best - bl.varpi0_sq).abs() < 1e-6 * bl.varpi0_sq, "{best} {}", bl.varpi0_sq);
            let beta = beta_of_alpha(alpha);
            assert!(bl.eps > eps_conv_root(beta).unwrap().eps);
            // just below ϖ₀ the boundary point at slope k₀ has Δ < 0
            let w2 = bl.varpi0_sq * (1.0 - 1e-6);
            let (_, rl, _) = hill_rk(bl.k0, alpha, w2).unwrap();
            assert!(delta_rk(rl, bl.k0, alpha, w2) < 0.0);
            let w2 = bl.varpi0_sq;
            let (_, rl, _) = hill_rk(bl.k0, alpha, w2).unwrap();
            let k2 = bl.k0 * bl.k0;
            let expect = 2.0 * (2.0 * k2 - 3.0).powi(3) / (bl.k0 * (5.0 - 2.0 * k2).powi(2) * (k2 - 1.0));
            assert!((rl - expect).abs() < 1e-8 * expect);
        }
    }

    #[test]
    fn scan_locates_witness() {
        for &beta in &[0.2, 0.5, 0.8] {
            let root = eps_conv_root(beta).unwrap();
            let p = ReducedParams::new(beta, root.eps + 1e-4).unwrap();
            let rep = classify(p).unwrap();
            assert_eq!(rep.class, ConvexityClass::NonConvex);
            let (wr, wk) = rep.witness.unwrap();
            let scan = min_delta_scan(p, 200).unwrap();
            assert!(scan.min < 0.0);
            let dist = ((scan.r - wr).powi(2) + (scan.k - wk).powi(2)).sqrt();
            eprintln!("{beta}: dist {dist:e} min {:e}", scan.min);
            assert!(dist < 1e-2);
            let q = ReducedParams::new(beta, root.eps - 1e-4).unwrap();
            assert!(min_delta_scan(q, 200).unwrap().min > 0.0);
        }
    }

    #[test]
    fn classify_examples() {
        let r = classify(ReducedParams::new(0.9, 0.05).unwrap()).unwrap();
        assert_eq!(r.class, ConvexityClass::StrictlyConvex);
        let e = eps_conv_root(0.1).unwrap().eps;
        let r = classify(ReducedParams::new(0.1, 0.69).unwrap()).unwrap();
        assert_eq!(r.class == ConvexityClass::NonConvex, 0.69 > e);
        let r = classify(ReducedParams::new(0.5, e.min(0.99)).unwrap());
        assert!(r.is_ok());
        let ec = eps_conv_root(0.5).unwrap().eps;
        let r = classify(ReducedParams::new(0.5, ec).unwrap()).unwrap();
        assert_eq!(r.class, ConvexityClass::ConvexNotStrict);
    }
}
