//! Pages Σ_s of the open book, hitting maps on the disk Υ, the half map ḡ
//! and return map ǧ, fixed points, and symmetric orbit harvesting.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::brake::{self, BoundaryArc, BrakeOrbit, ZHit, BRAKE_TOL};
use crate::dynamics::{self, Model, State};
use crate::error::{Error, Result};
use crate::ode::Tolerance;
use crate::paramspace::ReducedParams;
use crate::roots;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionPoint {
    pub p_r: f64,
    pub r: f64,
}

impl SectionPoint {
    pub fn new(p_r: f64, r: f64) -> Self {
        SectionPoint { p_r, r }
    }

    pub fn of(y: &State) -> Self {
        SectionPoint { p_r: y.p_r, r: y.r }
    }

    /// 𝒩(p_r, r) = (−p_r, r).
    pub fn flipped(&self) -> Self {
        SectionPoint { p_r: -self.p_r, r: self.r }
    }

    pub fn dist(&self, o: &SectionPoint) -> f64 {
        (self.p_r - o.p_r).hypot(self.r - o.r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HitResult {
    pub image: SectionPoint,
    pub time: f64,
    pub winding: f64,
    pub state: State,
}

#[derive(Clone, Debug)]
pub struct Section {
    pub model: Model,
    pub tol: Tolerance,
    t_bound: f64,
}

impl Section {
    pub fn new(params: ReducedParams) -> Result<Self> {
        if !params.is_in_domain() {
            return Err(Error::NotInDomain(format!("({}, {})", params.beta, params.eps)));
        }
        Ok(Section { model: Model::new(params), tol: BRAKE_TOL, t_bound: brake::time_bound(&params) })
    }

    pub fn params(&self) -> ReducedParams {
        self.model.params
    }

    /// 2(−1 − V(r, 0)) − p_r², positive inside Υ.
    pub fn slack(&self, q: &SectionPoint) -> f64 {
        2.0 * (-1.0 - self.model.potential(q.r, 0.0)) - q.p_r * q.p_r
    }

    pub fn contains(&self, q: &SectionPoint) -> bool {
        q.r > 0.0 && self.slack(q) > 0.0
    }

    /// Largest |p_r| over Υ at radius r.
    pub fn pr_extent(&self, r: f64) -> f64 {
        (2.0 * (-1.0 - self.model.potential(r, 0.0))).max(0.0).sqrt()
    }

    /// The point of 𝔐 over q with (p_z, z) on the ray of angle 2πs.
    pub fn lift(&self, q: &SectionPoint, s: f64) -> Result<State> {
        let e = self.slack(q);
        if !(q.r > 0.0) || e < 0.0 {
            return Err(Error::Domain(format!("({}, {}) outside the disk", q.p_r, q.r)));
        }
        if e <= 1e-15 {
            return Err(Error::Domain(format!("({}, {}) on the boundary of the disk", q.p_r, q.r)));
        }
        let (sn, cs) = (2.0 * PI * s).sin_cos();
        if sn.abs() < 1e-15 {
            let lam = e.sqrt();
            return Ok(State::new(q.p_r, lam * cs.signum(), q.r, 0.0));
        }
        let f = |lam: f64| 0.5 * q.p_r * q.p_r + 0.5 * lam * lam * cs * cs + self.model.potential(q.r, lam * sn) + 1.0;
        let mut hi = e.sqrt().max(1e-3);
        while f(hi) < 0.0 {
            hi *= 2.0;
        }
        let lam = roots::brent(f, 0.0, hi, 1e-16 * hi, 200)?;
        Ok(State::new(q.p_r, lam * cs, q.r, lam * sn))
    }

    /// Flow from page s_from to page s_to.
    pub fn hitting_map(&self, q: &SectionPoint, s_from: f64, s_to: f64) -> Result<HitResult> {
        if !(0.0..1.0).contains(&s_from) || s_to < s_from || s_to > 1.0 {
            return Err(Error::InvalidParameter(format!("pages {s_from} -> {s_to}")));
        }
        let y0 = self.lift(q, s_from)?;
        if s_to == s_from {
            return Ok(HitResult { image: *q, time: 0.0, winding: 0.0, state: y0 });
        }
        let turns = s_to - s_from;
        let hit = dynamics::advance_angle(&self.model, 0.0, y0.arr(), turns, 2.0 * self.t_bound, self.tol, |_| {})?;
        let mut st = State::from_arr(&hit.y);
        if (s_to * 2.0).fract() == 0.0 {
            st.z = 0.0;
        }
        Ok(HitResult { image: SectionPoint::of(&st), time: hit.t, winding: 2.0 * PI * turns, state: st })
    }

    pub fn gbar(&self, q: &SectionPoint) -> Result<SectionPoint> {
        Ok(self.hitting_map(q, 0.0, 0.5)?.image)
    }

    pub fn gcheck(&self, q: &SectionPoint) -> Result<SectionPoint> {
        Ok(self.hitting_map(q, 0.0, 1.0)?.image)
    }

    pub fn gbar_iter(&self, q: &SectionPoint, n: usize) -> Result<SectionPoint> {
        let mut x = *q;
        for _ in 0..n {
            x = self.gbar(&x)?;
        }
        Ok(x)
    }

    /// |ḡ(𝒩(ḡ(q))) − 𝒩(q)|.
    pub fn reversibility_residual(&self, q: &SectionPoint) -> Result<f64> {
        let a = self.gbar(q)?;
        let b = self.gbar(&a.flipped())?;
        Ok(b.dist(&q.flipped()))
    }

    /// det Dǧ by central differences.
    pub fn jacobian_det(&self, q: &SectionPoint, h: f64) -> Result<f64> {
        let f = |dp: f64, dr: f64| self.gcheck(&SectionPoint::new(q.p_r + dp, q.r + dr));
        let (a, b) = (f(h, 0.0)?, f(-h, 0.0)?);
        let (c, d) = (f(0.0, h)?, f(0.0, -h)?);
        let j11 = (a.p_r - b.p_r) / (2.0 * h);
        let j21 = (a.r - b.r) / (2.0 * h);
        let j12 = (c.p_r - d.p_r) / (2.0 * h);
        let j22 = (c.r - d.r) / (2.0 * h);
        Ok(j11 * j22 - j12 * j21)
    }

    /// Points of Υ on a jittered grid, kept a relative margin away from ∂Υ.
    pub fn interior_samples(&self, n: usize, margin: f64) -> Vec<SectionPoint> {
        let p = self.params();
        let (lo, hi) = (p.r_min(), p.r_max());
        let mut out = Vec::new();
        let side = (n as f64).sqrt().ceil() as usize;
        for i in 0..side {
            for j in 0..side {
                if out.len() == n {
                    return out;
                }
                let u = (i as f64 + 0.5 + 0.3 * ((7 * j + 3 * i) % 5) as f64 / 5.0 - 0.3) / side as f64;
                let v = (j as f64 + 0.5) / side as f64;
                let r = lo + (hi - lo) * (margin + (1.0 - 2.0 * margin) * u);
                let w = self.pr_extent(r) * (1.0 - margin);
                out.push(SectionPoint::new(w * (2.0 * v - 1.0), r));
            }
        }
        out
    }
}

/// Symmetric fixed point of ḡ on {p_r = 0}.
pub fn fixed_point_on_axis(sec: &Section) -> Result<SectionPoint> {
    let p = sec.params();
    let (lo, hi) = (p.r_min(), p.r_max());
    let f = |r: f64| sec.gbar(&SectionPoint::new(0.0, r)).map(|q| q.p_r).unwrap_or(f64::NAN);
    let n = 64;
    let grid: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let r = lo + (hi - lo) * (1e-3 + (1.0 - 2e-3) * i as f64 / (n - 1) as f64);
            (r, f(r))
        })
        .collect();
    for w in grid.windows(2) {
        if w[0].1.is_finite() && w[1].1.is_finite() && w[0].1.signum() != w[1].1.signum() {
            let r = roots::brent(f, w[0].0, w[1].0, 1e-15, 200)?;
            let q = SectionPoint::new(0.0, r);
            let img = sec.gbar(&q)?;
            if img.dist(&q) < 1e-9 {
                return Ok(q);
            }
        }
    }
    Err(Error::NotFound("no fixed point of the half map on p_r = 0".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationData {
    pub rot_fixed: f64,
    pub rot_boundary: f64,
    pub twist: bool,
}

/// Rot(p) = ρ_z − 1 and Rot(∂Υ) = 1/(ρ_e − 1).
pub fn rotation_data(rho_e: f64, rho_z: f64) -> RotationData {
    let rot_fixed = rho_z - 1.0;
    let rot_boundary = 1.0 / (rho_e - 1.0);
    RotationData { rot_fixed, rot_boundary, twist: (rot_fixed - rot_boundary).abs() > 1e-6 }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitType {
    ZSymmetricBrake,
    TypeIBrake,
    TypeIIBrake,
    ZSymmetricNonBrake,
    Periodic,
}

impl OrbitType {
    pub fn name(&self) -> &'static str {
        match self {
            OrbitType::ZSymmetricBrake => "z_symmetric_brake",
            OrbitType::TypeIBrake => "type_I_brake",
            OrbitType::TypeIIBrake => "type_II_brake",
            OrbitType::ZSymmetricNonBrake => "z_symmetric_non_brake",
            OrbitType::Periodic => "periodic",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    #[serde(rename = "type")]
    pub kind: OrbitType,
    pub period: f64,
    pub rotation_number: f64,
    pub link_euler: i64,
    pub link_zsym: i64,
    pub seed_state: State,
}

/// Window for (p, q)-orbits: q/p strictly between Rot(∂Υ) and Rot(p).
pub fn pq_window(rot: &RotationData, p: i64, q: i64) -> bool {
    let x = q as f64 / p as f64;
    let (a, b) = if rot.rot_boundary < rot.rot_fixed {
        (rot.rot_boundary, rot.rot_fixed)
    } else {
        (rot.rot_fixed, rot.rot_boundary)
    };
    a < x && x < b
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// A symmetric periodic orbit through {p_r = 0} with p returns to the page
/// and q turns about ζ_z.
pub fn find_pq_orbit(
    sec: &Section,
    zsym: &BrakeOrbit,
    fixed: &SectionPoint,
    rot: &RotationData,
    p: i64,
    q: i64,
    grid: usize,
) -> Result<OrbitRecord> {
    if p <= 0 || q <= 0 || gcd(p, q) != 1 {
        return Err(Error::InvalidParameter(format!("(p, q) = ({p}, {q})")));
    }
    if !pq_window(rot, p, q) {
        return Err(Error::NotFound(format!("({p}, {q}) outside the rotation window")));
    }
    let params = sec.params();
    let (lo, hi) = (params.r_min(), params.r_max());
    let half = p as usize;
    let f = |r: f64| sec.gbar_iter(&SectionPoint::new(0.0, r), half).map(|x| x.p_r).unwrap_or(f64::NAN);
    let pts: Vec<(f64, f64)> = (0..grid)
        .into_par_iter()
        .map(|i| {
            let r = lo + (hi - lo) * (1e-3 + (1.0 - 2e-3) * i as f64 / (grid - 1) as f64);
            (r, f(r))
        })
        .collect();
    let curve = brake::ZsymCurve::new(&sec.model, zsym)?;
    for w in pts.windows(2) {
        if !(w[0].1.is_finite() && w[1].1.is_finite() && w[0].1.signum() != w[1].1.signum()) {
            continue;
        }
        let Ok(r) = roots::brent(f, w[0].0, w[1].0, 1e-15, 200) else { continue };
        let seed = SectionPoint::new(0.0, r);
        if seed.dist(fixed) < 1e-6 {
            continue;
        }
        let start = sec.lift(&seed, 0.0)?;
        let Ok(hits) = brake::z_crossings(&sec.model, &start, 2 * p as usize, sec.tol) else { continue };
        let end = hits.last().unwrap();
        if SectionPoint::of(&end.state).dist(&seed) > 1e-7 {
            continue;
        }
        let period = end.t;
        let (le, lz) = brake::count_links(&sec.model, &start, period, Some(&curve))?;
        if le == p && lz == Some(q) {
            let rho = brake::rotation_of(&sec.model, &start, period)?;
            let contacts = brake::brake_contacts(&sec.model, &start, period)?;
            let kind = if contacts.is_empty() { OrbitType::ZSymmetricNonBrake } else { OrbitType::ZSymmetricBrake };
            return Ok(OrbitRecord {
                kind,
                period,
                rotation_number: rho,
                link_euler: le,
                link_zsym: q,
                seed_state: start,
            });
        }
    }
    Err(Error::NotFound(format!("no ({p}, {q}) orbit on the symmetry line")))
}

/// Forward z = 0 crossings from the lower brake point at arc coordinate x:
/// entry m − 1 is the m-th crossing, so ǧⁿ(𝒞₋) is entry 2n and ǧⁿ(𝒞₊) entry 2n + 1.
fn crossing_images(sec: &Section, arc: &BoundaryArc, x: f64, count: usize) -> Option<Vec<ZHit>> {
    let y0 = arc.brake_state_lower(x).ok()?;
    brake::z_crossings(&sec.model, &y0, count, sec.tol).ok()
}

#[derive(Clone, Debug)]
struct Seeds {
    xs: Vec<f64>,
    images: Vec<Vec<ZHit>>,
}

impl Seeds {
    fn point(&self, i: usize, m: usize) -> SectionPoint {
        SectionPoint::of(&self.images[i][m].state)
    }
}

/// Samples of the arc (a, b), refined until consecutive images of every
/// crossing index are closer than `h`.
fn sample_arc(sec: &Section, arc: &BoundaryArc, a: f64, b: f64, count: usize, n0: usize, h: f64, cap: usize) -> Seeds {
    let eval = |x: f64| crossing_images(sec, arc, x, count);
    let mut xs: Vec<f64> = (0..n0).map(|i| a + (b - a) * i as f64 / (n0 - 1) as f64).collect();
    let mut images: Vec<Option<Vec<ZHit>>> = xs.par_iter().map(|&x| eval(x)).collect();
    loop {
        let mut mids = Vec::new();
        for i in 0..xs.len() - 1 {
            let (Some(u), Some(v)) = (&images[i], &images[i + 1]) else { continue };
            if xs[i + 1] - xs[i] < 1e-10 {
                continue;
            }
            let far =
                u.iter().zip(v.iter()).any(|(p, q)| SectionPoint::of(&p.state).dist(&SectionPoint::of(&q.state)) > h);
            if far {
                mids.push(i);
            }
        }
        if mids.is_empty() || xs.len() + mids.len() > cap {
            break;
        }
        let new_x: Vec<f64> = mids.iter().map(|&i| 0.5 * (xs[i] + xs[i + 1])).collect();
        let new_img: Vec<Option<Vec<ZHit>>> = new_x.par_iter().map(|&x| eval(x)).collect();
        let mut nx = Vec::with_capacity(xs.len() + mids.len());
        let mut ni = Vec::with_capacity(xs.len() + mids.len());
        let mut k = 0;
        for i in 0..xs.len() {
            nx.push(xs[i]);
            ni.push(images[i].take());
            if k < mids.len() && mids[k] == i {
                nx.push(new_x[k]);
                ni.push(new_img[k].clone());
                k += 1;
            }
        }
        xs = nx;
        images = ni;
    }
    let (xs, images): (Vec<f64>, Vec<Vec<ZHit>>) =
        xs.into_iter().zip(images).filter_map(|(x, i)| i.map(|v| (x, v))).unzip();
    Seeds { xs, images }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HarvestReport {
    /// (n, #(ǧⁿ(𝒞±) ∩ D)) for n = 1..=n_max.
    pub counts: Vec<(usize, usize)>,
    pub records: Vec<OrbitRecord>,
}

pub struct HarvestConfig {
    pub n_max: usize,
    /// Iterates searched for verified records of each type.
    pub n_records: usize,
    pub samples: usize,
    pub cap: usize,
    pub per_type: usize,
}

impl Default for HarvestConfig {
    fn default() -> Self {
        HarvestConfig { n_max: 20, n_records: 3, samples: 512, cap: 20_000, per_type: 2 }
    }
}

fn segment_cross(a0: SectionPoint, a1: SectionPoint, b0: SectionPoint, b1: SectionPoint) -> Option<(f64, f64)> {
    let (dx, dy) = (a1.p_r - a0.p_r, a1.r - a0.r);
    let (ex, ey) = (b1.p_r - b0.p_r, b1.r - b0.r);
    let den = dx * ey - dy * ex;
    if den.abs() < 1e-300 {
        return None;
    }
    let (fx, fy) = (b0.p_r - a0.p_r, b0.r - a0.r);
    let s = (fx * ey - fy * ex) / den;
    let t = (fx * dy - fy * dx) / den;
    if (-1e-10..=1.0 + 1e-10).contains(&s) && (-1e-10..=1.0 + 1e-10).contains(&t) {
        Some((s, t))
    } else {
        None
    }
}

/// Pairs (x, y) with curve_a(x) ≈ curve_b(y), from polyline crossings.
fn polyline_crossings(a: &Seeds, ma: usize, b: &Seeds, mb: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 0..a.xs.len() - 1 {
        let (a0, a1) = (a.point(i, ma), a.point(i + 1, ma));
        let (lo_p, hi_p) = (a0.p_r.min(a1.p_r), a0.p_r.max(a1.p_r));
        let (lo_r, hi_r) = (a0.r.min(a1.r), a0.r.max(a1.r));
        for j in 0..b.xs.len() - 1 {
            let (b0, b1) = (b.point(j, mb), b.point(j + 1, mb));
            if b0.p_r.max(b1.p_r) < lo_p || b0.p_r.min(b1.p_r) > hi_p || b0.r.max(b1.r) < lo_r || b0.r.min(b1.r) > hi_r
            {
                continue;
            }
            if let Some((s, t)) = segment_cross(a0, a1, b0, b1) {
                out.push((a.xs[i] + s * (a.xs[i + 1] - a.xs[i]), b.xs[j] + t * (b.xs[j + 1] - b.xs[j])));
            }
        }
    }
    out
}

/// Newton on c_ma(x) = c_mb(y) with a finite-difference Jacobian.
fn refine_pair(sec: &Section, arc: &BoundaryArc, ma: usize, mb: usize, x0: f64, y0: f64) -> Option<(f64, f64)> {
    let img = |x: f64, m: usize| crossing_images(sec, arc, x, m + 1).map(|v| SectionPoint::of(&v[m].state));
    let (mut x, mut y) = (x0, y0);
    for _ in 0..30 {
        let a = img(x, ma)?;
        let b = img(y, mb)?;
        let (f0, f1) = (a.p_r - b.p_r, a.r - b.r);
        if f0.hypot(f1) < 1e-11 {
            return Some((x, y));
        }
        let h = 1e-7;
        let ax = img(x + h, ma)?;
        let by = img(y + h, mb)?;
        let (j00, j10) = ((ax.p_r - a.p_r) / h, (ax.r - a.r) / h);
        let (j01, j11) = (-(by.p_r - b.p_r) / h, -(by.r - b.r) / h);
        let det = j00 * j11 - j01 * j10;
        if det.abs() < 1e-300 {
            return None;
        }
        let dx = (f0 * j11 - f1 * j01) / det;
        let dy = (j00 * f1 - j10 * f0) / det;
        let damp = if dx.abs().max(dy.abs()) > 1e-2 { 1e-2 / dx.abs().max(dy.abs()) } else { 1.0 };
        x -= damp * dx;
        y -= damp * dy;
        if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
            return None;
        }
    }
    None
}

/// Brake orbit through the lower brake point at x: the period is twice the
/// time to the next brake contact.
fn brake_record(sec: &Section, arc: &BoundaryArc, x: f64, curve: &brake::ZsymCurve) -> Result<(OrbitRecord, State)> {
    let start = arc.brake_state_lower(x)?;
    let hit = dynamics::advance_to_brake(
        &sec.model,
        0.0,
        start.arr(),
        1e-16,
        200.0 * brake::time_bound(&sec.params()),
        sec.tol,
        |_| {},
    )?;
    let period = 2.0 * hit.t;
    let other = State::from_arr(&hit.y);
    let (kind, rho) = brake::classify_and_rotation(&sec.model, &start, period)?;
    let (le, lz) = brake::count_links(&sec.model, &start, period, Some(curve))?;
    let mirror = (other.r - start.r).abs() < 1e-7 && (other.z + start.z).abs() < 1e-7;
    let t = match kind {
        brake::BrakeType::TypeI if mirror => OrbitType::ZSymmetricBrake,
        brake::BrakeType::TypeI => OrbitType::TypeIBrake,
        brake::BrakeType::TypeII => OrbitType::TypeIIBrake,
        brake::BrakeType::Euler => OrbitType::Periodic,
    };
    let err = brake::closure_error(&sec.model, &start, period)?;
    if err > 1e-6 {
        return Err(Error::Consistency(format!("brake orbit closure error {err}")));
    }
    Ok((
        OrbitRecord {
            kind: t,
            period,
            rotation_number: rho,
            link_euler: le,
            link_zsym: lz.unwrap(),
            seed_state: start,
        },
        other,
    ))
}

/// Intersections of iterated boundary arcs with the symmetry line and with
/// each other, classified into the four symmetric/brake orbit types.
pub fn harvest_symmetric_orbits(
    sec: &Section,
    zsym: &BrakeOrbit,
    fixed: &SectionPoint,
    cfg: &HarvestConfig,
) -> Result<HarvestReport> {
    let params = sec.params();
    let arc = BoundaryArc::new(params)?;
    let curve = brake::ZsymCurve::new(&sec.model, zsym)?;
    let xz = zsym.arc;
    let delta = 1e-4;
    let count = 2 * cfg.n_max + 2;
    let h = 0.02 * (params.r_max() - params.r_min());
    let sub = [
        sample_arc(sec, &arc, delta, xz - delta, count, cfg.samples, h, cfg.cap),
        sample_arc(sec, &arc, xz + delta, 1.0 - delta, count, cfg.samples, h, cfg.cap),
    ];
    let near_p = |q: &SectionPoint| q.dist(fixed) < 1e-4;

    let mut counts = Vec::new();
    for n in 1..=cfg.n_max {
        let mut c = 0;
        for s in &sub {
            for m in [2 * n, 2 * n + 1] {
                for i in 0..s.xs.len() - 1 {
                    let (a, b) = (s.point(i, m), s.point(i + 1, m));
                    if a.p_r.signum() != b.p_r.signum() && !near_p(&a) {
                        c += 1;
                    }
                }
            }
        }
        counts.push((n, c));
    }

    let mut records: Vec<OrbitRecord> = Vec::new();
    let push = |rec: OrbitRecord, records: &mut Vec<OrbitRecord>| {
        let dup =
            records.iter().any(|o| o.kind == rec.kind && (o.period - rec.period).abs() < 1e-6 * o.period.max(1.0));
        let full = records.iter().filter(|o| o.kind == rec.kind).count() >= cfg.per_type;
        if !dup && !full {
            records.push(rec);
        }
    };

    // (i): ǧⁿ(𝒞±) ∩ D
    'outer: for n in 1..=cfg.n_records {
        for s in &sub {
            for m in [2 * n, 2 * n + 1] {
                for i in 0..s.xs.len() - 1 {
                    let (a, b) = (s.point(i, m), s.point(i + 1, m));
                    if a.p_r.signum() == b.p_r.signum() || near_p(&a) {
                        continue;
                    }
                    let f = |x: f64| crossing_images(sec, &arc, x, m + 1).map(|v| v[m].state.p_r).unwrap_or(f64::NAN);
                    let Ok(x) = roots::brent(f, s.xs[i], s.xs[i + 1], 1e-15, 200) else { continue };
                    if let Ok((rec, _)) = brake_record(sec, &arc, x, &curve) {
                        if rec.kind == OrbitType::ZSymmetricBrake {
                            push(rec, &mut records);
                        }
                    }
                    if records.iter().filter(|o| o.kind == OrbitType::ZSymmetricBrake).count() >= cfg.per_type {
                        break 'outer;
                    }
                }
            }
        }
    }

    // (ii) and (iii): ǧⁿ(𝒞_{±,i₀}) ∩ 𝒞_{∓,i₁} and ǧⁿ(𝒞_{±,i₀}) ∩ 𝒞_{±,i₁}, i₀ ≠ i₁
    for (want, pairs) in
        [(OrbitType::TypeIBrake, [(0usize, 1usize), (1, 0)]), (OrbitType::TypeIIBrake, [(0, 0), (1, 1)])]
    {
        'search: for n in 1..=cfg.n_records {
            for (i0, i1) in [(0usize, 1usize), (1, 0)] {
                for &(da, db) in &pairs {
                    let (ma, mb) = (2 * n + da, db);
                    for (x, y) in polyline_crossings(&sub[i0], ma, &sub[i1], mb) {
                        let Some((x, _y)) = refine_pair(sec, &arc, ma, mb, x, y) else { continue };
                        if let Ok((rec, _)) = brake_record(sec, &arc, x, &curve) {
                            if rec.kind == want {
                                push(rec, &mut records);
                            }
                        }
                        if records.iter().filter(|o| o.kind == want).count() >= cfg.per_type {
                            break 'search;
                        }
                    }
                }
            }
        }
    }

    // (iv): ǧⁿ(D_{i₀}) ∩ D_{i₁}
    let (lo, hi) = (params.r_min(), params.r_max());
    let dsegs = [(lo + 1e-3 * (hi - lo), fixed.r - 1e-4), (fixed.r + 1e-4, hi - 1e-3 * (hi - lo))];
    'd: for n in 1..=cfg.n_records {
        for (k, &(a, b)) in dsegs.iter().enumerate() {
            let g = |r: f64| -> Option<SectionPoint> {
                let st = sec.lift(&SectionPoint::new(0.0, r), 0.0).ok()?;
                let hits = brake::z_crossings(&sec.model, &st, 2 * n, sec.tol).ok()?;
                Some(SectionPoint::of(&hits[2 * n - 1].state))
            };
            let m = cfg.samples;
            let rs: Vec<f64> = (0..m).map(|i| a + (b - a) * i as f64 / (m - 1) as f64).collect();
            let imgs: Vec<Option<SectionPoint>> = rs.par_iter().map(|&r| g(r)).collect();
            for i in 0..m - 1 {
                let (Some(u), Some(v)) = (imgs[i], imgs[i + 1]) else { continue };
                if u.p_r.signum() == v.p_r.signum() {
                    continue;
                }
                let other_side = if k == 0 { u.r > fixed.r && v.r > fixed.r } else { u.r < fixed.r && v.r < fixed.r };
                if !other_side {
                    continue;
                }
                let Ok(r) = roots::brent(|r| g(r).map(|q| q.p_r).unwrap_or(f64::NAN), rs[i], rs[i + 1], 1e-15, 200)
                else {
                    continue;
                };
                let seed = SectionPoint::new(0.0, r);
                let Ok(start) = sec.lift(&seed, 0.0) else { continue };
                let Ok(hits) = brake::z_crossings(&sec.model, &start, 4 * n, sec.tol) else { continue };
                let end = hits.last().unwrap();
                if SectionPoint::of(&end.state).dist(&seed) > 1e-7 {
                    continue;
                }
                let period = end.t;
                if !brake::brake_contacts(&sec.model, &start, period)?.is_empty() {
                    continue;
                }
                let rho = brake::rotation_of(&sec.model, &start, period)?;
                let (le, lz) = brake::count_links(&sec.model, &start, period, Some(&curve))?;
                push(
                    OrbitRecord {
                        kind: OrbitType::ZSymmetricNonBrake,
                        period,
                        rotation_number: rho,
                        link_euler: le,
                        link_zsym: lz.unwrap(),
                        seed_state: start,
                    },
                    &mut records,
                );
                if records.iter().filter(|o| o.kind == OrbitType::ZSymmetricNonBrake).count() >= cfg.per_type {
                    break 'd;
                }
            }
        }
    }

    records.sort_by(|a, b| {
        (a.kind as u8, a.period, a.seed_state.r)
            .partial_cmp(&(b.kind as u8, b.period, b.seed_state.r))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(HarvestReport { counts, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sec() -> Section {
        Section::new(ReducedParams::new(0.6, 0.6).unwrap()).unwrap()
    }

    #[test]
    fn lift_and_project() {
        let s = sec();
        let q = SectionPoint::new(0.1, 0.7);
        let y = s.lift(&q, 0.0).unwrap();
        assert_eq!(y.z, 0.0);
        assert!(y.p_z > 0.0);
        assert!((s.model.hamiltonian(&y.arr()) + 1.0).abs() < 1e-12);
        assert_eq!(SectionPoint::of(&y), q);
        let y = s.lift(&q, 0.5).unwrap();
        assert!(y.z == 0.0 && y.p_z < 0.0);
        let y = s.lift(&q, 0.3).unwrap();
        assert!((s.model.hamiltonian(&y.arr()) + 1.0).abs() < 1e-12);
        assert!(((y.z).atan2(y.p_z) - 2.0 * PI * 0.3).abs() < 1e-12);
        let axis = SectionPoint::new(0.0, 0.7);
        let y = s.lift(&axis, 0.0).unwrap();
        assert!((y.p_z - (2.0 * (-1.0 - s.model.potential(0.7, 0.0))).sqrt()).abs() < 1e-15);
        assert!(s.lift(&SectionPoint::new(5.0, 0.7), 0.0).is_err());
    }

    #[test]
    fn identity_page_and_composition() {
        let s = sec();
        let q = SectionPoint::new(0.2, 0.6);
        let h = s.hitting_map(&q, 0.0, 0.0).unwrap();
        assert_eq!(h.image, q);
        assert_eq!(h.time, 0.0);
        let full = s.hitting_map(&q, 0.0, 1.0).unwrap();
        assert!((full.winding - 2.0 * PI).abs() < 1e-15);
        let twice = s.gbar(&s.gbar(&q).unwrap()).unwrap();
        assert!(full.image.dist(&twice) < 1e-8);
        let a = s.hitting_map(&q, 0.0, 0.25).unwrap();
        assert!(a.time > 0.0 && a.time < full.time);
    }

    #[test]
    fn reversible_and_area_preserving() {
        let s = sec();
        for q in s.interior_samples(12, 0.05) {
            let res = s.reversibility_residual(&q).unwrap();
            assert!(res < 1e-7, "{q:?}: {res}");
            let det = s.jacobian_det(&q, 1e-6).unwrap();
            assert!((det - 1.0).abs() < 1e-5, "{q:?}: {det}");
        }
    }

    #[test]
    fn fixed_point_matches_shooting() {
        let s = sec();
        let p = fixed_point_on_axis(&s).unwrap();
        assert!(s.gcheck(&p).unwrap().dist(&p) < 1e-8);
        let o = brake::shoot_z_symmetric(s.params()).unwrap();
        let hit = brake::first_z_crossing(&s.model, &BoundaryArc::new(s.params()).unwrap(), o.arc, BRAKE_TOL).unwrap();
        assert!((hit.state.r - p.r).abs() < 1e-7, "{} {}", hit.state.r, p.r);
    }

    #[test]
    fn circular_boundary_rotation() {
        let beta: f64 = 0.3;
        let rd = rotation_data(1.0 + (1.0 + 7.0 * beta).sqrt(), 5.0);
        assert!((rd.rot_boundary - 1.0 / (1.0 + 7.0 * beta).sqrt()).abs() < 1e-15);
        assert!(rd.twist);
    }
}
