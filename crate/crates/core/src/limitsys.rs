//! Rescaled coordinates around the Euler segment and the α → ∞ limit system.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Model, State};
use crate::error::{Error, Result};
use crate::ode::{self, Crossing, Tolerance};
use crate::paramspace::ReducedParams;
use crate::roots;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaledState {
    pub p_v: f64,
    pub p_u: f64,
    pub v: f64,
    pub u: f64,
}

/// Centre n and half-width m of the segment [r_min, r_max].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub n: f64,
    pub m: f64,
}

impl Scale {
    pub fn new(params: &ReducedParams) -> Result<Self> {
        let alpha = params.alpha();
        let a = 1.0 + 4.0 / alpha;
        let d = a * a - 2.0 * params.varpi2();
        if !(d > 1e-14 * a * a) {
            return Err(Error::Domain("degenerate rescaling (m = 0)".into()));
        }
        Ok(Scale { n: 0.5 * a, m: 0.5 * d.sqrt() })
    }
}

pub fn rescale(state: &State, params: &ReducedParams) -> Result<RescaledState> {
    let s = Scale::new(params)?;
    Ok(RescaledState { p_v: state.p_r / s.m, p_u: state.p_z / s.m, v: (state.r - s.n) / s.m, u: state.z / s.m })
}

pub fn unscale(x: &RescaledState, params: &ReducedParams) -> Result<State> {
    let s = Scale::new(params)?;
    let r = s.m * x.v + s.n;
    if !(r > 0.0) {
        return Err(Error::Domain(format!("mv + n = {r} must be positive")));
    }
    Ok(State::new(s.m * x.p_v, s.m * x.p_u, r, s.m * x.u))
}

/// K = H/m² + 1/m².
pub fn k_value(x: &RescaledState, params: &ReducedParams) -> Result<f64> {
    let s = Scale::new(params)?;
    let y = unscale(x, params)?.arr();
    Ok((Model::new(*params).hamiltonian(&y) + 1.0) / (s.m * s.m))
}

/// Limit Hamiltonian of the c-family; c = 4 is the principal case.
pub fn k_infinity(x: &RescaledState, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("c = {c} must be positive")));
    }
    Ok(0.5 * (x.p_v * x.p_v + x.p_u * x.p_u) + 4.0 * (4.0 - c) / c + 4.0 * x.v * x.v
        - 8.0 / (c * (0.25 + c * x.u * x.u).sqrt()))
}

pub fn k_values(x: &RescaledState, params: &ReducedParams, c: f64) -> Result<(f64, f64)> {
    Ok((k_value(x, params)?, k_infinity(x, c)?))
}

pub fn u_max(c: f64) -> f64 {
    if c < 4.0 {
        (8.0 - c).sqrt() / (2.0 * (4.0 - c))
    } else {
        f64::INFINITY
    }
}

fn s_of(u0: f64, c: f64) -> f64 {
    1.0 / (0.25 + c * u0 * u0).sqrt()
}

/// Half-integral in the variable s = (1/4 + cu²)^{−1/2}, mapped to [−1, 1];
/// Gauss–Chebyshev with node doubling.
fn t_of_s(s0: f64) -> Result<f64> {
    let f = |w: f64| {
        let s = 0.5 * (2.0 + s0) + 0.5 * (2.0 - s0) * w;
        1.0 / ((2.0 + s).sqrt() * s * s)
    };
    let quad = |n: usize| {
        let mut acc = 0.0;
        for i in 1..=n {
            acc += f(((2 * i - 1) as f64 * PI / (2 * n) as f64).cos());
        }
        0.5 * PI * acc / n as f64
    };
    let mut n = 64;
    let mut prev = quad(n);
    while n < 1 << 22 {
        n *= 2;
        let cur = quad(n);
        if (cur - prev).abs() <= 1e-11 * cur.max(1.0) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Resolution(format!("hitting-time quadrature did not settle at s0 = {s0}")))
}

/// First time u reaches 0 from (p_u, u) = (0, u₀) in the limit system.
pub fn t_infinity(u0: f64, c: f64) -> Result<f64> {
    if !(u0 > 0.0) || !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("u0 = {u0}, c = {c}")));
    }
    if u0 >= u_max(c) {
        return Err(Error::Domain(format!("u0 = {u0} at or above u_max = {}", u_max(c))));
    }
    t_of_s(s_of(u0, c))
}

/// v̂∞(u₀) > 0 on the zero-velocity branch ℓ∞⁺.
pub fn v_hat(u0: f64, c: f64) -> f64 {
    let v2 = 2.0 * s_of(u0, c) / c - (4.0 - c) / c;
    v2.max(0.0).sqrt()
}

/// Limit field (6.6) for the c-family, state (p_v, p_u, v, u).
pub fn limit_field(c: f64) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] + Copy {
    move |_t: f64, y: &[f64; 4]| {
        let q = 0.25 + c * y[3] * y[3];
        [-8.0 * y[2], -8.0 * y[3] / (q * q.sqrt()), y[0], y[1]]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitShot {
    pub t_hit: f64,
    pub p_v: f64,
    pub p_u: f64,
}

/// Integrate the limit system from (0, 0, v₀, u₀) to the first u = 0.
pub fn shoot_limit(u0: f64, v0: f64, c: f64) -> Result<LimitShot> {
    let tmax = 1e4;
    let hit = ode::integrate_to_event(
        limit_field(c),
        0.0,
        [0.0, 0.0, v0, u0],
        tmax,
        Tolerance::tight(),
        |_t, y| y[3],
        Crossing::Falling,
        |_| true,
        |_| {},
    )?;
    Ok(LimitShot { t_hit: hit.t, p_v: hit.y[0], p_u: hit.y[1] })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitFamilyEntry {
    pub c: f64,
    pub k: u32,
    pub u0: f64,
    pub v0: f64,
    pub t_inf: f64,
    pub rho: f64,
}

/// u-symmetric brake orbits of the limit system with quarter period kπ/(2√2).
pub fn limit_family(k_max: u32, c: f64) -> Result<Vec<LimitFamilyEntry>> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("c = {c} must be positive")));
    }
    let s_lo = if c < 4.0 { 0.5 * (4.0 - c) } else { 0.0 };
    let entries: Vec<Result<Option<LimitFamilyEntry>>> = (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let target = k as f64 * PI / (2.0 * 2f64.sqrt());
            let g = |s: f64| t_of_s(s).map(|t| t - target).unwrap_or(f64::NAN);
            // T decreases in s; locate a bracket towards small s
            let mut hi = 1.0f64.max(s_lo);
            if g(hi) > 0.0 {
                return solve_entry(c, k, target, g, hi, 2.0 - 1e-12);
            }
            loop {
                let next = 0.5 * hi + 0.5 * s_lo;
                if next - s_lo < 1e-14 {
                    return Ok(None);
                }
                if g(next) > 0.0 {
                    return solve_entry(c, k, target, g, next, hi);
                }
                hi = next;
            }
        })
        .collect();
    let mut out = Vec::new();
    for e in entries {
        if let Some(e) = e? {
            out.push(e);
        }
    }
    Ok(out)
}

fn solve_entry(
    c: f64,
    k: u32,
    target: f64,
    g: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
) -> Result<Option<LimitFamilyEntry>> {
    let s0 = roots::brent(g, a, b, 1e-15, 300)?;
    if s0 < 0.5 * (4.0 - c) {
        return Ok(None);
    }
    let u0 = (1.0 / (s0 * s0) - 0.25).max(0.0).sqrt() / c.sqrt();
    Ok(Some(LimitFamilyEntry { c, k, u0, v0: v_hat(u0, c), t_inf: target, rho: 1.0 + 2.0 * k as f64 }))
}

/// Window member with 2ϖ² = 1 + α⁻²/2.
pub fn window_params(alpha: f64) -> Result<ReducedParams> {
    let varpi = (0.5 * (1.0 + 0.5 / (alpha * alpha))).sqrt();
    ReducedParams::from_alpha_varpi(alpha, varpi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceGap {
    pub value: f64,
    pub gradient: f64,
}

/// Sup over a (v, u) grid of |K − K∞| and of the gradient difference, at p = 0.
pub fn convergence_gap(alpha: f64, v_box: (f64, f64), u_box: (f64, f64), n: usize) -> Result<ConvergenceGap> {
    let params = window_params(alpha)?;
    let s = Scale::new(&params)?;
    let model = Model::new(params);
    let mut gap = ConvergenceGap { value: 0.0, gradient: 0.0 };
    for i in 0..=n {
        let v = v_box.0 + (v_box.1 - v_box.0) * i as f64 / n as f64;
        for j in 0..=n {
            let u = u_box.0 + (u_box.1 - u_box.0) * j as f64 / n as f64;
            let x = RescaledState { p_v: 0.0, p_u: 0.0, v, u };
            let (k, kinf) = k_values(&x, &params, 4.0)?;
            gap.value = gap.value.max((k - kinf).abs());
            let r = s.m * v + s.n;
            let g = model.grad(r, s.m * u);
            let q = 0.25 + 4.0 * u * u;
            let dv = g[0] / s.m - 8.0 * v;
            let du = g[1] / s.m - 8.0 * u / (q * q.sqrt());
            gap.gradient = gap.gradient.max(dv.hypot(du));
        }
    }
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_matches_segment() {
        let p = ReducedParams::new(0.6, 0.6).unwrap();
        let s = Scale::new(&p).unwrap();
        assert!((s.n - s.m - p.r_min()).abs() < 1e-14);
        assert!((s.n + s.m - p.r_max()).abs() < 1e-14);
        assert!(Scale::new(&ReducedParams::new(0.6, 0.0).unwrap()).is_err());
    }

    #[test]
    fn round_trip_and_energy() {
        let p = ReducedParams::new(0.4, 0.3).unwrap();
        let st = State::new(0.013, -0.2, 1.1, 0.05);
        let back = unscale(&rescale(&st, &p).unwrap(), &p).unwrap();
        for (a, b) in back.arr().iter().zip(st.arr().iter()) {
            assert!((a - b).abs() < 1e-14);
        }
        let hill = crate::paramspace::hill_region(p, 32).unwrap();
        let (r, z) = hill.boundary[3];
        let x = rescale(&State::new(0.0, 0.0, r, z), &p).unwrap();
        assert!(k_value(&x, &p).unwrap().abs() < 1e-10);
    }

    #[test]
    fn k_matches_written_potential() {
        // U(v, u) as a closed expression in n, m, ϖ, α
        let p = ReducedParams::new(0.7, 0.2).unwrap();
        let Scale { n, m } = Scale::new(&p).unwrap();
        let (w2, a) = (p.varpi2(), p.alpha());
        for &(v, u) in &[(0.3, 0.2), (-0.7, 1.1), (0.9, -0.4)] {
            let g = m * v + n;
            let uu = (w2 - 2.0 * g + 2.0 * g * g) / (2.0 * m * m * g * g)
                - 4.0 / a / (m * m * (g * g + (1.0 + 2.0 * a) * m * m * u * u).sqrt());
            let x = RescaledState { p_v: 0.1, p_u: -0.2, v, u };
            let k = k_value(&x, &p).unwrap();
            assert!((k - (0.025 + uu)).abs() < 1e-10 * uu.abs().max(1.0));
        }
    }

    #[test]
    fn k_infinity_cases() {
        let x = RescaledState { p_v: 0.0, p_u: 0.0, v: 0.0, u: 0.0 };
        assert!((k_infinity(&x, 4.0).unwrap() + 4.0).abs() < 1e-15);
        let y = RescaledState { p_v: 0.3, p_u: 0.1, v: 0.2, u: 0.7 };
        let direct = 0.05 + 4.0 * 0.04 - 2.0 / (0.25f64 + 4.0 * 0.49).sqrt();
        assert!((k_infinity(&y, 4.0).unwrap() - direct).abs() < 1e-14);
        assert!(k_infinity(&y, 0.0).is_err());
    }

    #[test]
    fn hitting_time_limits_and_oracle() {
        let t = t_infinity(1e-4, 4.0).unwrap();
        assert!((t - PI / 16.0).abs() < 1e-6);
        let mut prev = 0.0;
        for i in 0..=40 {
            let u0 = 1e-3 * 10f64.powf(4.0 * i as f64 / 40.0);
            let t = t_infinity(u0, 4.0).unwrap();
            assert!(t > prev);
            prev = t;
            let shot = shoot_limit(u0, 0.0, 4.0).unwrap();
            assert!((shot.t_hit - t).abs() < 1e-8, "{u0}: {} vs {t}", shot.t_hit);
        }
    }

    #[test]
    fn families() {
        let fam = limit_family(3, 4.0).unwrap();
        assert_eq!(fam.len(), 3);
        for e in &fam {
            let shot = shoot_limit(e.u0, e.v0, 4.0).unwrap();
            assert!(shot.p_v.abs() < 1e-8);
            assert!((shot.t_hit - e.t_inf).abs() < 1e-8);
            assert_eq!(e.rho, 1.0 + 2.0 * e.k as f64);
            // the start lies on K∞ = 0
            let x = RescaledState { p_v: 0.0, p_u: 0.0, v: e.v0, u: e.u0 };
            assert!(k_infinity(&x, 4.0).unwrap().abs() < 1e-12);
        }
        let short = limit_family(40, 2.0).unwrap();
        assert!(short.len() < 40);
    }

    #[test]
    fn gap_decreases() {
        let g: Vec<f64> =
            [1e2, 1e3, 1e4].iter().map(|&a| convergence_gap(a, (-0.9, 0.9), (-2.0, 2.0), 40).unwrap().value).collect();
        assert!(g[2] < g[1] && g[1] < g[0], "{g:?}");
    }
}
