//! Index theory for paths in Sp(2).

use std::f64::consts::PI;

use nalgebra::{Complex, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat2 = Matrix2<f64>;

pub fn rotation(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    Mat2::new(c, -s, s, c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NormalForm {
    /// R(θ), θ ∈ (0, π) ∪ (π, 2π).
    Elliptic(f64),
    PosHyperbolic(f64),
    NegHyperbolic(f64),
    ShearAtOne(i8),
    ShearAtMinusOne(i8),
}

const TIE: f64 = 1e-9;

pub fn check_symplectic(m: &Mat2) -> Result<()> {
    let d = m.determinant();
    if (d - 1.0).abs() > 1e-6 {
        return Err(Error::NotSymplectic(d));
    }
    Ok(())
}

/// Symplectic normal form. The elliptic angle is placed in (0, π) when the
/// lower-left entry is positive; that sign is a conjugation invariant.
pub fn normal_form(m: &Mat2) -> Result<NormalForm> {
    check_symplectic(m)?;
    let tr = m.trace();
    let shear_sign = |nu: f64| -> i8 {
        if (m - Mat2::identity() * nu).amax() < TIE {
            0
        } else if m[(1, 0)] - m[(0, 1)] > 0.0 {
            -1
        } else {
            1
        }
    };
    if (tr - 2.0).abs() < TIE {
        return Ok(NormalForm::ShearAtOne(shear_sign(1.0)));
    }
    if (tr + 2.0).abs() < TIE {
        return Ok(NormalForm::ShearAtMinusOne(shear_sign(-1.0)));
    }
    if tr.abs() < 2.0 {
        let t = (tr / 2.0).acos();
        let theta = if m[(1, 0)] > 0.0 { t } else { 2.0 * PI - t };
        return Ok(NormalForm::Elliptic(theta));
    }
    let disc = (tr * tr / 4.0 - 1.0).sqrt();
    if tr > 2.0 {
        Ok(NormalForm::PosHyperbolic(tr / 2.0 + disc))
    } else {
        Ok(NormalForm::NegHyperbolic(tr / 2.0 - disc))
    }
}

/// dim ker(M − ωI) over ℂ.
pub fn nullity(m: &Mat2, omega: Complex<f64>) -> usize {
    let a = m.map(|x| Complex::new(x, 0.0)) - Matrix2::<Complex<f64>>::identity() * omega;
    let sv = a.singular_values();
    sv.iter().filter(|s| **s < 1e-8).count()
}

/// A sampled path of symplectic 2×2 matrices starting at the identity.
#[derive(Clone, Debug)]
pub struct Sp2Path {
    pub times: Vec<f64>,
    pub mats: Vec<Mat2>,
}

impl Sp2Path {
    pub fn new(times: Vec<f64>, mats: Vec<Mat2>) -> Result<Self> {
        if times.len() != mats.len() || times.len() < 2 {
            return Err(Error::Resolution("path needs at least two nodes".into()));
        }
        if (mats[0] - Mat2::identity()).amax() > 1e-9 {
            return Err(Error::Resolution("path does not start at the identity".into()));
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Resolution("times not strictly increasing".into()));
            }
        }
        for w in mats.windows(2) {
            let d = (w[1] - w[0]).norm();
            if d >= 0.5 {
                return Err(Error::Resolution(format!("node spacing {d} exceeds 0.5")));
            }
        }
        Ok(Sp2Path { times, mats })
    }

    /// Sample `f` on [0, t_end], doubling the node count until the spacing
    /// requirement holds.
    pub fn from_fn(t_end: f64, mut n: usize, f: impl Fn(f64) -> Mat2) -> Result<Self> {
        loop {
            let times: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
            let mats: Vec<Mat2> = times.iter().map(|&t| f(t)).collect();
            let ok = mats.windows(2).all(|w| (w[1] - w[0]).norm() < 0.5);
            if ok {
                return Sp2Path::new(times, mats);
            }
            if n > 1 << 22 {
                return Err(Error::Resolution("cannot resolve path".into()));
            }
            n *= 2;
        }
    }

    pub fn end(&self) -> &Mat2 {
        self.mats.last().unwrap()
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap() - self.times[0]
    }

    /// Net argument change of γ(t)v over the path, in turns.
    pub fn winding_of(&self, v: [f64; 2]) -> Result<f64> {
        let mut total = 0.0;
        let mut prev = v[1].atan2(v[0]);
        for m in &self.mats[1..] {
            let w = m * nalgebra::Vector2::new(v[0], v[1]);
            let a = w[1].atan2(w[0]);
            let mut d = a - prev;
            d -= 2.0 * PI * (d / (2.0 * PI)).round();
            if d.abs() > PI / 2.0 {
                return Err(Error::Resolution(format!("angle jump {d} between nodes")));
            }
            total += d;
            prev = a;
        }
        Ok(total / (2.0 * PI))
    }

    /// Winding of the m-fold iterate γ^m for direction `v`, summed one lap at a time.
    fn iterated_winding(&self, v: [f64; 2], m: usize) -> Result<f64> {
        let end = self.end();
        let mut u = nalgebra::Vector2::new(v[0], v[1]);
        let mut total = 0.0;
        for _ in 0..m {
            total += self.winding_of([u[0], u[1]])?;
            u = end * u;
            u /= u.norm();
        }
        Ok(total)
    }
}

fn refine_extremum(f: &dyn Fn(f64) -> Result<f64>, phi: f64, h: f64, maximize: bool) -> Result<f64> {
    // golden section on [phi − h, phi + h]
    let sgn = if maximize { -1.0 } else { 1.0 };
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (phi - h, phi + h);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = sgn * f(c)?;
    let mut fd = sgn * f(d)?;
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = sgn * f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = sgn * f(d)?;
        }
    }
    Ok(sgn * fc.min(fd))
}

fn interval_of(f: &dyn Fn(f64) -> Result<f64>, n_probe: usize) -> Result<(f64, f64)> {
    let n = n_probe.max(16);
    let mut vals = Vec::with_capacity(n);
    for k in 0..n {
        vals.push(f(PI * k as f64 / n as f64)?);
    }
    let (imin, _) =
        vals.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &x)| if x < acc.1 { (i, x) } else { acc });
    let (imax, _) =
        vals.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc });
    let h = PI / n as f64;
    let lo = refine_extremum(f, PI * imin as f64 / n as f64, h, false)?.min(vals[imin]);
    let hi = refine_extremum(f, PI * imax as f64 / n as f64, h, true)?.max(vals[imax]);
    Ok((lo, hi))
}

/// The closed interval I_γ of argument variations, in turns.
pub fn winding_interval(path: &Sp2Path, n_probe: usize) -> Result<(f64, f64)> {
    let f = |phi: f64| path.winding_of([phi.cos(), phi.sin()]);
    let (lo, hi) = interval_of(&f, n_probe)?;
    if hi - lo >= 0.5 + 1e-6 {
        return Err(Error::Resolution(format!("winding interval length {}", hi - lo)));
    }
    Ok((lo, hi))
}

const CZ_SHIFT: f64 = 1e-6;

/// Index from a winding interval; the flag marks endpoints within 1e−9 of an integer.
pub fn cz_from_interval(lo: f64, hi: f64) -> (i64, bool) {
    let degenerate = [lo, hi].iter().any(|x| (x - x.round()).abs() < 1e-9);
    let (a, b) = (lo - CZ_SHIFT, hi - CZ_SHIFT);
    let k = b.floor();
    if k >= a {
        (2 * k as i64, degenerate)
    } else {
        (2 * k as i64 + 1, degenerate)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CzIndex {
    pub value: i64,
    pub degenerate: bool,
}

pub fn conley_zehnder_flagged(path: &Sp2Path) -> Result<CzIndex> {
    let (lo, hi) = winding_interval(path, 64)?;
    let (value, degenerate) = cz_from_interval(lo, hi);
    Ok(CzIndex { value, degenerate })
}

pub fn conley_zehnder(path: &Sp2Path) -> Result<i64> {
    Ok(conley_zehnder_flagged(path)?.value)
}

/// Mean index from the index of the path and the normal form of its endpoint.
pub fn mean_index_from(i1: i64, end: &NormalForm) -> f64 {
    let i1 = i1 as f64;
    match *end {
        NormalForm::Elliptic(theta) => i1 - 1.0 + theta / PI,
        NormalForm::ShearAtOne(a) if a >= 0 => i1 + 1.0,
        _ => i1,
    }
}

/// (î, ρ) with ρ = î/2.
pub fn mean_index_and_rotation(path: &Sp2Path) -> Result<(f64, f64)> {
    let i1 = conley_zehnder(path)?;
    let nf = normal_form(path.end())?;
    let mi = mean_index_from(i1, &nf);
    Ok((mi, mi / 2.0))
}

/// CZ(γ^m)/m, the long-iteration estimate of the mean index.
pub fn mean_index_by_iteration(path: &Sp2Path, m: usize) -> Result<f64> {
    let f = |phi: f64| path.iterated_winding([phi.cos(), phi.sin()], m);
    let (lo, hi) = interval_of(&f, 32)?;
    let (cz, _) = cz_from_interval(lo, hi);
    Ok(cz as f64 / m as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rigid(theta0: f64) -> Sp2Path {
        Sp2Path::from_fn(1.0, 64, |t| rotation(theta0 * t)).unwrap()
    }

    #[test]
    fn normal_form_examples() {
        match normal_form(&rotation(PI / 2.0)).unwrap() {
            NormalForm::Elliptic(t) => assert!((t - PI / 2.0).abs() < 1e-14),
            n => panic!("{n:?}"),
        }
        match normal_form(&rotation(-PI / 3.0)).unwrap() {
            NormalForm::Elliptic(t) => assert!((t - 5.0 * PI / 3.0).abs() < 1e-14),
            n => panic!("{n:?}"),
        }
        assert_eq!(normal_form(&Mat2::new(2.0, 0.0, 0.0, 0.5)).unwrap(), NormalForm::PosHyperbolic(2.0));
        assert_eq!(normal_form(&Mat2::new(-2.0, 0.0, 0.0, -0.5)).unwrap(), NormalForm::NegHyperbolic(-2.0));
        assert_eq!(normal_form(&(-Mat2::identity())).unwrap(), NormalForm::ShearAtMinusOne(0));
        assert_eq!(normal_form(&Mat2::new(1.0, 1.0, 0.0, 1.0)).unwrap(), NormalForm::ShearAtOne(1));
        assert_eq!(normal_form(&Mat2::new(1.0, -1.0, 0.0, 1.0)).unwrap(), NormalForm::ShearAtOne(-1));
        assert_eq!(normal_form(&Mat2::new(-1.0, 1.0, 0.0, -1.0)).unwrap(), NormalForm::ShearAtMinusOne(1));
        assert!(normal_form(&Mat2::new(2.0, 0.0, 0.0, 2.0)).is_err());
    }

    #[test]
    fn nullity_examples() {
        assert_eq!(nullity(&Mat2::identity(), Complex::new(1.0, 0.0)), 2);
        assert_eq!(nullity(&rotation(PI / 2.0), Complex::new(0.0, 1.0)), 1);
        assert_eq!(nullity(&rotation(PI / 2.0), Complex::new(0.0, -1.0)), 1);
        let hyp = Mat2::new(2.0, 0.0, 0.0, 0.5);
        for k in 0..16 {
            let a = 2.0 * PI * k as f64 / 16.0;
            assert_eq!(nullity(&hyp, Complex::new(a.cos(), a.sin())), 0);
        }
        assert_eq!(nullity(&Mat2::new(1.0, 1.0, 0.0, 1.0), Complex::new(1.0, 0.0)), 1);
    }

    #[test]
    fn rigid_rotations() {
        let (lo, hi) = winding_interval(&rigid(PI), 32).unwrap();
        assert!((lo - 0.5).abs() < 1e-12 && (hi - 0.5).abs() < 1e-12);
        assert_eq!(conley_zehnder(&rigid(PI)).unwrap(), 1);
        assert_eq!(conley_zehnder(&rigid(3.0 * PI)).unwrap(), 3);
        assert_eq!(conley_zehnder(&rigid(2.0 * PI)).unwrap(), 1);
        assert_eq!(conley_zehnder(&rigid(4.0 * PI)).unwrap(), 3);
        assert_eq!(conley_zehnder(&rigid(-PI / 2.0)).unwrap(), -1);
        for &th in &[0.3, PI, 2.0 * PI, 4.9, 7.0, 12.0] {
            let (mi, rho) = mean_index_and_rotation(&rigid(th)).unwrap();
            assert!((mi - th / PI).abs() < 1e-9, "theta0 {th}: {mi}");
            assert!((rho - th / (2.0 * PI)).abs() < 1e-9);
        }
    }

    #[test]
    fn shear_endpoint_cases() {
        // γ(t) = R(2πt)·N(t) with N(t) = [[1, −t],[0, 1]] ends at N₁(1, −1)
        let p = Sp2Path::from_fn(1.0, 256, |t| rotation(2.0 * PI * t) * Mat2::new(1.0, -t, 0.0, 1.0)).unwrap();
        let (mi, _) = mean_index_and_rotation(&p).unwrap();
        let long = mean_index_by_iteration(&p, 64).unwrap();
        assert!((mi - long).abs() < 2.0 / 64.0, "{mi} vs {long}");
        let q = Sp2Path::from_fn(1.0, 256, |t| rotation(2.0 * PI * t) * Mat2::new(1.0, t, 0.0, 1.0)).unwrap();
        let (mi, _) = mean_index_and_rotation(&q).unwrap();
        let long = mean_index_by_iteration(&q, 64).unwrap();
        assert!((mi - long).abs() < 2.0 / 64.0, "{mi} vs {long}");
    }

    #[test]
    fn hyperbolic_path() {
        // R(πt) followed by a squeeze: ends negative hyperbolic
        let p = Sp2Path::from_fn(1.0, 256, |t| rotation(PI * t) * Mat2::new((t).exp(), 0.0, 0.0, (-t).exp())).unwrap();
        assert!(normal_form(p.end()).map(|n| matches!(n, NormalForm::NegHyperbolic(_))).unwrap());
        let (mi, _) = mean_index_and_rotation(&p).unwrap();
        let long = mean_index_by_iteration(&p, 64).unwrap();
        assert!((mi - long).abs() < 2.0 / 64.0, "{mi} vs {long}");
        assert_eq!(mi, 1.0);
    }

    #[test]
    fn resolution_is_enforced() {
        let times = vec![0.0, 1.0];
        let mats = vec![Mat2::identity(), rotation(2.0)];
        assert!(Sp2Path::new(times, mats).is_err());
    }

    proptest! {
        #[test]
        fn interval_is_short_and_conjugation_invariant(
            a in -2.0f64..2.0, b in -2.0f64..2.0, th in 0.1f64..6.0
        ) {
            let p = Sp2Path::from_fn(1.0, 128, |t| {
                rotation(th * t) * Mat2::new((a * t).exp(), 0.0, 0.0, (-a * t).exp()) * Mat2::new(1.0, b * t, 0.0, 1.0)
            })
            .unwrap();
            let (lo, hi) = winding_interval(&p, 32).unwrap();
            prop_assert!(hi - lo < 0.5);
            let (mi, _) = mean_index_and_rotation(&p).unwrap();
            let long = mean_index_by_iteration(&p, 64).unwrap();
            prop_assert!((mi - long).abs() <= 2.0 / 64.0 + 1e-12, "{} vs {}", mi, long);
            let m = rotation(th);
            let q = Mat2::new(1.0, a, 0.0, 1.0) * Mat2::new(1.0, 0.0, b, 1.0);
            let conj = q.try_inverse().unwrap() * m * q;
            let (n1, n2) = (normal_form(&m).unwrap(), normal_form(&conj).unwrap());
            if let (NormalForm::Elliptic(x), NormalForm::Elliptic(y)) = (n1, n2) {
                prop_assert!((x - y).abs() < 1e-8);
            }
        }
    }
}
