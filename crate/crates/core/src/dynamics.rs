//! Hamiltonian vector field, flows, events and the transverse linearized flow.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, Crossing, DenseStep, EventHit, Tolerance};
use crate::paramspace::{HillRegion, ReducedParams};
use crate::sp2index::{Mat2, Sp2Path};

/// Phase-space point, stored in the order (p_r, p_z, r, z).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub p_r: f64,
    pub p_z: f64,
    pub r: f64,
    pub z: f64,
}

impl State {
    pub fn new(p_r: f64, p_z: f64, r: f64, z: f64) -> Self {
        State { p_r, p_z, r, z }
    }

    pub fn arr(&self) -> [f64; 4] {
        [self.p_r, self.p_z, self.r, self.z]
    }

    pub fn from_arr(y: &[f64; 4]) -> Self {
        State { p_r: y[0], p_z: y[1], r: y[2], z: y[3] }
    }

    /// Time reversal (p ↦ −p).
    pub fn reversed(&self) -> Self {
        State { p_r: -self.p_r, p_z: -self.p_z, ..*self }
    }

    /// Reflection z ↦ −z.
    pub fn mirrored(&self) -> Self {
        State { p_z: -self.p_z, z: -self.z, ..*self }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Model {
    pub params: ReducedParams,
    alpha: f64,
    w2: f64,
    mu: f64,
    c: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelEval {
    pub v: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
    pub h: f64,
    pub field: [f64; 4],
}

impl Model {
    pub fn new(params: ReducedParams) -> Self {
        let alpha = params.alpha();
        Model { params, alpha, w2: params.varpi2(), mu: 4.0 / alpha, c: 1.0 + 2.0 * alpha }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    fn rho2(&self, r: f64, z: f64) -> f64 {
        r * r + self.c * z * z
    }

    pub fn potential(&self, r: f64, z: f64) -> f64 {
        self.w2 / (2.0 * r * r) - 1.0 / r - self.mu / self.rho2(r, z).sqrt()
    }

    #[inline]
    pub fn grad(&self, r: f64, z: f64) -> [f64; 2] {
        let rho2 = self.rho2(r, z);
        let k = self.mu / (rho2 * rho2.sqrt());
        [-self.w2 / (r * r * r) + 1.0 / (r * r) + k * r, k * self.c * z]
    }

    pub fn hessian(&self, r: f64, z: f64) -> [[f64; 2]; 2] {
        let rho2 = self.rho2(r, z);
        let rho3 = rho2 * rho2.sqrt();
        let rho5 = rho3 * rho2;
        let mu = self.mu;
        let c = self.c;
        let vrr = 3.0 * self.w2 / r.powi(4) - 2.0 / (r * r * r) + mu * (1.0 / rho3 - 3.0 * r * r / rho5);
        let vrz = -3.0 * mu * c * r * z / rho5;
        let vzz = mu * c * (1.0 / rho3 - 3.0 * c * z * z / rho5);
        [[vrr, vrz], [vrz, vzz]]
    }

    /// g(r, z) = 4α⁻¹(1+2α)/(r² + (1+2α)z²)^{3/2}; ∂_z V = g z.
    pub fn g_coeff(&self, r: f64, z: f64) -> f64 {
        let rho2 = self.rho2(r, z);
        self.mu * self.c / (rho2 * rho2.sqrt())
    }

    pub fn hamiltonian(&self, y: &[f64; 4]) -> f64 {
        0.5 * (y[0] * y[0] + y[1] * y[1]) + self.potential(y[2], y[3])
    }

    #[inline]
    pub fn field(&self, y: &[f64; 4]) -> [f64; 4] {
        let g = self.grad(y[2], y[3]);
        [-g[0], -g[1], y[0], y[1]]
    }

    /// State followed by the row-major 4×4 fundamental matrix.
    pub fn variational_field(&self, y: &[f64; 20]) -> [f64; 20] {
        let x = [y[0], y[1], y[2], y[3]];
        let f = self.field(&x);
        let h = self.hessian(y[2], y[3]);
        let mut out = [0.0; 20];
        out[..4].copy_from_slice(&f);
        for j in 0..4 {
            let p_r = y[4 + j];
            let p_z = y[8 + j];
            let r = y[12 + j];
            let z = y[16 + j];
            out[4 + j] = -h[0][0] * r - h[0][1] * z;
            out[8 + j] = -h[1][0] * r - h[1][1] * z;
            out[12 + j] = p_r;
            out[16 + j] = p_z;
        }
        out
    }

    /// Symplectically normalized frame X̂₁, X̂₂ and the Hamiltonian field.
    pub fn frame(&self, y: &[f64; 4]) -> Result<([f64; 4], [f64; 4], [f64; 4])> {
        let [vr, vz] = self.grad(y[2], y[3]);
        let (pr, pz) = (y[0], y[1]);
        let n = vr * vr + vz * vz + pr * pr + pz * pz;
        if !(n > 1e-24) {
            return Err(Error::Frame(format!("|grad V|^2 + |p|^2 = {n}")));
        }
        let s = 1.0 / n.sqrt();
        let x1 = [vz * s, -vr * s, pz * s, -pr * s];
        let x2 = [-pz * s, pr * s, vz * s, -vr * s];
        Ok((x1, x2, self.field(y)))
    }

    /// Lower bound for the angular speed of (p_z, z): min over ℋ of min(1, g).
    pub fn eta_min(&self, hill: &HillRegion) -> f64 {
        let rho = hill.max_rho();
        let g = self.mu * self.c / (rho * rho * rho);
        g.min(1.0)
    }
}

/// ω(u, v) = u_p·v_q − u_q·v_p.
#[inline]
pub fn omega(u: &[f64; 4], v: &[f64; 4]) -> f64 {
    u[0] * v[2] + u[1] * v[3] - u[2] * v[0] - u[3] * v[1]
}

pub fn evaluate_model(state: &State, params: &ReducedParams) -> Result<ModelEval> {
    if !(state.r > 0.0) {
        return Err(Error::Domain(format!("r = {} must be positive", state.r)));
    }
    let m = Model::new(*params);
    let y = state.arr();
    Ok(ModelEval {
        v: m.potential(state.r, state.z),
        grad: m.grad(state.r, state.z),
        hess: m.hessian(state.r, state.z),
        h: m.hamiltonian(&y),
        field: m.field(&y),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Terminal {
    None,
    ZCrossing,
    AngleTarget,
    BoundaryContact,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<(f64, State)>,
    pub max_drift: f64,
    pub terminal: Terminal,
}

impl Trajectory {
    pub fn last(&self) -> (f64, State) {
        *self.samples.last().unwrap()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Event {
    /// z = 0 with the given sign of ż.
    ZCrossing(Crossing),
    /// The angle of p_z + i z reaches 2πs (mod 2π).
    Angle(f64),
    /// |p| = 0.
    BrakeContact,
}

struct Recorder<'a> {
    model: &'a Model,
    h0: f64,
    drift: f64,
    samples: Vec<(f64, State)>,
}

impl<'a> Recorder<'a> {
    fn new(model: &'a Model, t0: f64, y0: &[f64; 4]) -> Self {
        Recorder { model, h0: model.hamiltonian(y0), drift: 0.0, samples: vec![(t0, State::from_arr(y0))] }
    }

    fn push(&mut self, d: &DenseStep<4>) {
        self.drift = self.drift.max((self.model.hamiltonian(&d.y1) - self.h0).abs());
        self.samples.push((d.t1(), State::from_arr(&d.y1)));
    }

    fn finish(mut self, t: f64, y: &[f64; 4], terminal: Terminal) -> Trajectory {
        if let Some(last) = self.samples.last_mut() {
            if last.0 == t {
                last.1 = State::from_arr(y);
            } else {
                self.samples.push((t, State::from_arr(y)));
            }
        }
        self.drift = self.drift.max((self.model.hamiltonian(y) - self.h0).abs());
        Trajectory { samples: self.samples, max_drift: self.drift, terminal }
    }
}

pub fn flow(model: &Model, start: &State, duration: f64, tol: Tolerance) -> Result<Trajectory> {
    let y0 = start.arr();
    let mut rec = Recorder::new(model, 0.0, &y0);
    let f = |_t: f64, y: &[f64; 4]| model.field(y);
    let y = ode::integrate(f, 0.0, y0, duration, tol, |d| rec.push(d))?;
    Ok(rec.finish(duration, &y, Terminal::None))
}

/// States at the requested times (ascending, from t = 0).
pub fn flow_sampled(model: &Model, start: &State, times: &[f64], tol: Tolerance) -> Result<Vec<State>> {
    let t_end = times.iter().cloned().fold(0.0, f64::max);
    let f = |_t: f64, y: &[f64; 4]| model.field(y);
    let mut out = vec![None; times.len()];
    for (i, &t) in times.iter().enumerate() {
        if t == 0.0 {
            out[i] = Some(*start);
        }
    }
    ode::integrate(f, 0.0, start.arr(), t_end, tol, |d| {
        for (i, &t) in times.iter().enumerate() {
            if out[i].is_none() && t > d.t0 && t <= d.t1() {
                let y = if t == d.t1() { d.y1 } else { d.eval(t) };
                out[i] = Some(State::from_arr(&y));
            }
        }
    })?;
    Ok(out.into_iter().map(|s| s.unwrap()).collect())
}

fn ray_event(theta: f64) -> (impl Fn(f64, &[f64; 4]) -> f64 + Copy, impl Fn(&[f64; 4]) -> bool + Copy) {
    let (s, c) = theta.sin_cos();
    (move |_t: f64, y: &[f64; 4]| -s * y[1] + c * y[3], move |y: &[f64; 4]| c * y[1] + s * y[3] > 0.0)
}

/// Advance until the angle of p_z + i z has increased by `turns` ∈ (0, 1]
/// from its value at `y0`; the sweep is split into legs of at most half a turn.
pub fn advance_angle(
    model: &Model,
    t0: f64,
    y0: [f64; 4],
    turns: f64,
    t_max: f64,
    tol: Tolerance,
    mut on_step: impl FnMut(&DenseStep<4>),
) -> Result<EventHit<4>> {
    let f = |_t: f64, y: &[f64; 4]| model.field(y);
    let a0 = y0[3].atan2(y0[1]);
    let legs = if turns > 0.5 { 2 } else { 1 };
    let mut hit = EventHit { t: t0, y: y0 };
    for leg in 1..=legs {
        let target = a0 + 2.0 * std::f64::consts::PI * turns * leg as f64 / legs as f64;
        let (g, acc) = ray_event(target);
        hit = ode::integrate_to_event(f, hit.t, hit.y, t_max, tol, g, Crossing::Rising, acc, &mut on_step)?;
    }
    Ok(hit)
}

/// Advance to the next z = 0 crossing in direction `dir` with |p_z| > 1e−10.
pub fn advance_to_z(
    model: &Model,
    t0: f64,
    y0: [f64; 4],
    dir: Crossing,
    t_max: f64,
    tol: Tolerance,
    on_step: impl FnMut(&DenseStep<4>),
) -> Result<EventHit<4>> {
    let f = |_t: f64, y: &[f64; 4]| model.field(y);
    ode::integrate_to_event(f, t0, y0, t_max, tol, |_t, y| y[3], dir, |y| y[1].abs() > 1e-10, on_step)
}

/// Advance to the next minimum of |p| with |p|² below `thresh`.
pub fn advance_to_brake(
    model: &Model,
    t0: f64,
    y0: [f64; 4],
    thresh: f64,
    t_max: f64,
    tol: Tolerance,
    on_step: impl FnMut(&DenseStep<4>),
) -> Result<EventHit<4>> {
    let f = |_t: f64, y: &[f64; 4]| model.field(y);
    let g = move |_t: f64, y: &[f64; 4]| {
        let gv = model.grad(y[2], y[3]);
        -(y[0] * gv[0] + y[1] * gv[1])
    };
    ode::integrate_to_event(f, t0, y0, t_max, tol, g, Crossing::Rising, |y| y[0] * y[0] + y[1] * y[1] < thresh, on_step)
}

pub fn flow_to_event(model: &Model, start: &State, event: Event, max_time: f64, tol: Tolerance) -> Result<Trajectory> {
    let y0 = start.arr();
    let mut rec = Recorder::new(model, 0.0, &y0);
    let (hit, term) = match event {
        Event::ZCrossing(dir) => {
            (advance_to_z(model, 0.0, y0, dir, max_time, tol, |d| rec.push(d))?, Terminal::ZCrossing)
        }
        Event::Angle(s) => {
            let a0 = y0[3].atan2(y0[1]);
            let mut turns = (2.0 * std::f64::consts::PI * s - a0) / (2.0 * std::f64::consts::PI);
            turns -= turns.floor();
            if turns < 1e-12 {
                turns = 1.0;
            }
            (advance_angle(model, 0.0, y0, turns, max_time, tol, |d| rec.push(d))?, Terminal::AngleTarget)
        }
        Event::BrakeContact => {
            (advance_to_brake(model, 0.0, y0, 1e-6, max_time, tol, |d| rec.push(d))?, Terminal::BoundaryContact)
        }
    };
    Ok(rec.finish(hit.t, &hit.y, term))
}

fn var_init(y0: &[f64; 4]) -> [f64; 20] {
    let mut y = [0.0; 20];
    y[..4].copy_from_slice(y0);
    for i in 0..4 {
        y[4 + 4 * i + i] = 1.0;
    }
    y
}

fn var_split(y: &[f64; 20]) -> ([f64; 4], Matrix4<f64>) {
    let x = [y[0], y[1], y[2], y[3]];
    let m = Matrix4::from_row_slice(&y[4..20]);
    (x, m)
}

/// Linearized flow along `start` for `duration`, with the matrix at every step.
pub fn variational_flow(
    model: &Model,
    start: &State,
    duration: f64,
    tol: Tolerance,
) -> Result<(Trajectory, Vec<(f64, Matrix4<f64>)>)> {
    let y0 = start.arr();
    let mut rec = Recorder::new(model, 0.0, &y0);
    let mut mats = vec![(0.0, Matrix4::identity())];
    let f = |_t: f64, y: &[f64; 20]| model.variational_field(y);
    let y = ode::integrate(f, 0.0, var_init(&y0), duration, tol, |d| {
        let (x, m) = var_split(&d.y1);
        rec.push(&DenseStep4::from(d, x));
        mats.push((d.t1(), m));
    })?;
    let (x, _) = var_split(&y);
    Ok((rec.finish(duration, &x, Terminal::None), mats))
}

// Recorder only needs the end state of a step.
struct DenseStep4;
impl DenseStep4 {
    fn from(d: &DenseStep<20>, x: [f64; 4]) -> DenseStep<4> {
        ode::end_only(d.t0, d.t1(), x)
    }
}

fn transverse_matrix(model: &Model, x0f: &([f64; 4], [f64; 4]), y: &[f64; 20]) -> Result<Mat2> {
    let (x, phi) = var_split(y);
    let (x1, x2, xh) = model.frame(&x)?;
    let mut cols = [[0.0; 2]; 2];
    for (i, v0) in [x0f.0, x0f.1].iter().enumerate() {
        let v = phi * nalgebra::Vector4::from_column_slice(v0);
        let xi = [v[0], v[1], v[2], v[3]];
        let a = omega(&xi, &x2);
        let b = omega(&x1, &xi);
        let mut rest = [0.0; 4];
        for k in 0..4 {
            rest[k] = xi[k] - a * x1[k] - b * x2[k];
        }
        let hn: f64 = xh.iter().map(|u| u * u).sum();
        let c = rest.iter().zip(xh.iter()).map(|(u, w)| u * w).sum::<f64>() / hn;
        let res: f64 = (0..4).map(|k| (rest[k] - c * xh[k]).powi(2)).sum::<f64>().sqrt();
        let scale: f64 = xi.iter().map(|u| u * u).sum::<f64>().sqrt().max(1.0);
        if res > 1e-7 * scale {
            return Err(Error::Frame(format!("projection residual {res}")));
        }
        cols[i] = [a, b];
    }
    Ok(Mat2::new(cols[0][0], cols[1][0], cols[0][1], cols[1][1]))
}

/// Linearized flow along a periodic orbit, written in the frame {X̂₁, X̂₂}
/// modulo the flow direction.
pub fn transverse_path(model: &Model, start: &State, period: f64, tol: Tolerance) -> Result<Sp2Path> {
    let y0 = start.arr();
    let (x1, x2, _) = model.frame(&y0)?;
    let basis = (x1, x2);
    let f = |_t: f64, y: &[f64; 20]| model.variational_field(y);
    let mut times = vec![0.0];
    let mut mats = vec![Mat2::identity()];
    let mut err = None;
    ode::integrate(f, 0.0, var_init(&y0), period, tol, |d| {
        if err.is_some() {
            return;
        }
        if let Err(e) = sample_step(d, &mut times, &mut mats, |y| transverse_matrix(model, &basis, y)) {
            err = Some(e);
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Sp2Path::new(times, mats)
}

/// Append nodes from one dense step, subdividing until consecutive matrices
/// are closer than 0.25 in Frobenius norm.
pub fn sample_step<const N: usize>(
    d: &DenseStep<N>,
    times: &mut Vec<f64>,
    mats: &mut Vec<Mat2>,
    to_mat: impl Fn(&[f64; N]) -> Result<Mat2>,
) -> Result<()> {
    let mut n = 4;
    loop {
        let mut ts = Vec::with_capacity(n);
        let mut ms = Vec::with_capacity(n);
        let mut prev = *mats.last().unwrap();
        let mut ok = true;
        for j in 1..=n {
            let t = if j == n { d.t1() } else { d.t0 + (d.t1() - d.t0) * j as f64 / n as f64 };
            let y = if j == n { d.y1 } else { d.eval(t) };
            let m = to_mat(&y)?;
            if (m - prev).norm() >= 0.25 {
                ok = false;
                break;
            }
            prev = m;
            ts.push(t);
            ms.push(m);
        }
        if ok {
            times.extend(ts);
            mats.extend(ms);
            return Ok(());
        }
        if n >= 4096 {
            return Err(Error::Resolution("cannot resolve transverse path within one step".into()));
        }
        n *= 4;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> Model {
        Model::new(ReducedParams::new(0.6, 0.6).unwrap())
    }

    fn fd_grad(m: &Model, r: f64, z: f64) -> [f64; 2] {
        let h = 1e-6;
        [
            (m.potential(r + h, z) - m.potential(r - h, z)) / (2.0 * h),
            (m.potential(r, z + h) - m.potential(r, z - h)) / (2.0 * h),
        ]
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let m = reference();
        for &(r, z) in &[(0.5, 0.1), (1.0, -0.05), (0.8, 0.0), (1.2, 0.02)] {
            let g = m.grad(r, z);
            let fd = fd_grad(&m, r, z);
            assert!((g[0] - fd[0]).abs() < 1e-7 && (g[1] - fd[1]).abs() < 1e-7);
            let h = m.hessian(r, z);
            let e = 1e-5;
            let gr = m.grad(r + e, z);
            let gl = m.grad(r - e, z);
            let gu = m.grad(r, z + e);
            let gd = m.grad(r, z - e);
            assert!((h[0][0] - (gr[0] - gl[0]) / (2.0 * e)).abs() < 1e-5);
            assert!((h[0][1] - (gu[0] - gd[0]) / (2.0 * e)).abs() < 1e-5);
            assert!((h[1][1] - (gu[1] - gd[1]) / (2.0 * e)).abs() < 1e-5);
        }
    }

    #[test]
    fn plane_z_zero_is_invariant_and_vzz_coefficient() {
        let p = ReducedParams::new(0.6, 0.6).unwrap();
        let m = Model::new(p);
        for &r in &[0.4, 0.7, 1.3] {
            assert_eq!(m.grad(r, 0.0)[1], 0.0);
            let vzz = m.hessian(r, 0.0)[1][1];
            let expect = (7.0 + 1.0 / p.beta) / (r * r * r);
            assert!((vzz - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn brake_point_field() {
        let p = ReducedParams::new(0.6, 0.6).unwrap();
        let hill = crate::paramspace::hill_region(p, 64).unwrap();
        let (r, z) = hill.boundary[5];
        let e = evaluate_model(&State::new(0.0, 0.0, r, z), &p).unwrap();
        assert_eq!(e.field[2], 0.0);
        assert_eq!(e.field[3], 0.0);
        assert!(e.field[0].abs() + e.field[1].abs() > 0.0);
        assert!((e.h + 1.0).abs() < 1e-10);
        assert!(evaluate_model(&State::new(0.0, 0.0, -1.0, 0.0), &p).is_err());
    }

    #[test]
    fn energy_and_reversibility() {
        let m = reference();
        let s = State::new(0.1, 0.3, 0.8, 0.0);
        let v = m.potential(s.r, s.z);
        let pz = (2.0 * (-1.0 - v) - s.p_r * s.p_r).sqrt();
        let s = State::new(0.1, pz, 0.8, 0.0);
        let tr = flow(&m, &s, 20.0, Tolerance::default()).unwrap();
        assert!(tr.max_drift < 1e-10, "{}", tr.max_drift);
        let (_, end) = tr.last();
        let back = flow(&m, &end.reversed(), 20.0, Tolerance::default()).unwrap().last().1.reversed();
        for (a, b) in back.arr().iter().zip(s.arr().iter()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn z_crossing_event() {
        let m = reference();
        let p = m.params;
        let hill = crate::paramspace::hill_region(p, 64).unwrap();
        let (r, z) = hill.boundary[10];
        let tr = flow_to_event(
            &m,
            &State::new(0.0, 0.0, r, z),
            Event::ZCrossing(Crossing::Falling),
            100.0,
            Tolerance::tight(),
        )
        .unwrap();
        let (t, s) = tr.last();
        assert!(t > 0.0);
        assert!(s.z.abs() < 1e-11);
        assert!(s.p_z < 0.0);
        assert!(tr.samples[tr.samples.len() - 2].1.z > 0.0);
    }

    #[test]
    fn eta_min_positive() {
        let p = ReducedParams::new(0.6, 0.6).unwrap();
        let hill = crate::paramspace::hill_region(p, 256).unwrap();
        let eta = Model::new(p).eta_min(&hill);
        assert!(eta > 0.0 && eta <= 1.0);
    }

    #[test]
    fn variational_cocycle_and_symplectic() {
        let m = reference();
        let s = State::new(0.1, 0.5, 0.8, 0.05);
        let v = m.potential(s.r, s.z);
        let pz = (2.0 * (-1.0 - v) - s.p_r * s.p_r).sqrt();
        let s = State::new(0.1, pz, 0.8, 0.05);
        let (_, full) = variational_flow(&m, &s, 3.0, Tolerance::tight()).unwrap();
        let (tr1, a) = variational_flow(&m, &s, 1.2, Tolerance::tight()).unwrap();
        let (_, b) = variational_flow(&m, &tr1.last().1, 1.8, Tolerance::tight()).unwrap();
        let comp = b.last().unwrap().1 * a.last().unwrap().1;
        let diff = (comp - full.last().unwrap().1).amax();
        assert!(diff < 1e-8, "{diff}");
        let j = Matrix4::new(0., 0., 1., 0., 0., 0., 0., 1., -1., 0., 0., 0., 0., -1., 0., 0.);
        let phi = full.last().unwrap().1;
        assert!((phi.transpose() * j * phi - j).amax() < 1e-9);
    }
}
