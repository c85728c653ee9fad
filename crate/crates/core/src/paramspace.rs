//! Parameters, energy-surface classes and the Hill region.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::bisect;

/// Angular momentum ϖ, mass ratio α and energy h.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub varpi: f64,
    pub alpha: f64,
    pub h: f64,
}

/// The pair (β, ε) at energy −1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub beta: f64,
    pub eps: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SurfaceClass {
    SphereLike,
    Empty,
    /// The surface is the single rest point (p_r, p_z, r, z) = (0, 0, r, 0).
    SinglePoint {
        r: f64,
    },
    UnboundedZ,
}

impl PhysicalParams {
    pub fn new(varpi: f64, alpha: f64, h: f64) -> Result<Self> {
        if !(varpi > 0.0) || !(alpha > 0.0) || !(h < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need varpi > 0, alpha > 0, h < 0; got ({varpi}, {alpha}, {h})"
            )));
        }
        Ok(PhysicalParams { varpi, alpha, h })
    }

    pub fn beta(&self) -> f64 {
        self.alpha / (self.alpha + 4.0)
    }

    pub fn to_reduced(&self) -> Result<ReducedParams> {
        if (self.h + 1.0).abs() > 1e-14 {
            return Err(Error::InvalidParameter(format!("energy must be -1, got {}", self.h)));
        }
        let beta = self.beta();
        let w2 = self.varpi * self.varpi;
        let e2 = (-2.0 * w2 * beta).mul_add(beta, 1.0);
        if e2 < 0.0 {
            return Err(Error::NotInDomain(format!("2 varpi^2 beta^2 = {} > 1", 1.0 - e2)));
        }
        Ok(ReducedParams { beta, eps: e2.sqrt() })
    }
}

pub fn classify_surface(p: &PhysicalParams) -> Result<SurfaceClass> {
    PhysicalParams::new(p.varpi, p.alpha, p.h)?;
    let x = 2.0 * p.varpi * p.varpi * p.h.abs();
    let upper = (1.0 + 4.0 / p.alpha).powi(2);
    let tie = 1e-12;
    if (x - upper).abs() <= tie * upper {
        return Ok(SurfaceClass::SinglePoint { r: p.varpi * p.varpi / (1.0 + 4.0 / p.alpha) });
    }
    if x > upper {
        return Ok(SurfaceClass::Empty);
    }
    if x <= 1.0 + tie {
        return Ok(SurfaceClass::UnboundedZ);
    }
    Ok(SurfaceClass::SphereLike)
}

impl ReducedParams {
    /// Accepts β ∈ (0, 1) and ε ∈ [0, 1); membership in 𝒟 is checked separately.
    pub fn new(beta: f64, eps: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) || !(0.0..1.0).contains(&eps) {
            return Err(Error::InvalidParameter(format!("(beta, eps) = ({beta}, {eps})")));
        }
        Ok(ReducedParams { beta, eps })
    }

    /// Like `new`, but rejects points outside 𝒟.
    pub fn in_domain(beta: f64, eps: f64) -> Result<Self> {
        let p = Self::new(beta, eps)?;
        if !p.is_in_domain() {
            return Err(Error::NotInDomain(format!("(beta, eps) = ({beta}, {eps})")));
        }
        Ok(p)
    }

    pub fn from_alpha_varpi(alpha: f64, varpi: f64) -> Result<Self> {
        PhysicalParams::new(varpi, alpha, -1.0)?.to_reduced()
    }

    pub fn is_in_domain(&self) -> bool {
        self.beta > 0.0 && self.eps > 0.0 && self.beta * self.beta + self.eps * self.eps < 1.0
    }

    pub fn alpha(&self) -> f64 {
        4.0 * self.beta / (1.0 - self.beta)
    }

    pub fn varpi2(&self) -> f64 {
        (1.0 - self.eps * self.eps) / (2.0 * self.beta * self.beta)
    }

    pub fn varpi(&self) -> f64 {
        self.varpi2().sqrt()
    }

    pub fn to_physical(&self) -> PhysicalParams {
        PhysicalParams { varpi: self.varpi(), alpha: self.alpha(), h: -1.0 }
    }

    /// Minimum of V on the plane z = 0.
    pub fn r0(&self) -> f64 {
        self.varpi2() * self.beta
    }

    pub fn r_min(&self) -> f64 {
        (1.0 - self.eps) / (2.0 * self.beta)
    }

    pub fn r_max(&self) -> f64 {
        (1.0 + self.eps) / (2.0 * self.beta)
    }

    pub fn potential(&self, r: f64, z: f64) -> f64 {
        let a = self.alpha();
        let rho = (r * r + (1.0 + 2.0 * a) * z * z).sqrt();
        self.varpi2() / (2.0 * r * r) - 1.0 / r - 4.0 / (a * rho)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HillRegion {
    pub params: ReducedParams,
    pub r_min: f64,
    pub r_max: f64,
    /// Counterclockwise, starting at (r_max, 0); not closed.
    pub boundary: Vec<(f64, f64)>,
    pub kmax: f64,
}

impl HillRegion {
    fn rescaled(&self) -> (f64, f64) {
        (self.params.alpha(), self.params.varpi())
    }

    fn j(&self, k: f64) -> f64 {
        let (a, w) = self.rescaled();
        ((4.0 + a * k).powi(2) - 2.0 * w * w * a * a * k * k).max(0.0).sqrt()
    }

    /// Left boundary radius at slope k, in the rescaled convexity coordinates.
    pub fn r_l(&self, k: f64) -> f64 {
        let a = self.params.alpha();
        (4.0 + a * k - self.j(k)) / (2.0 * k)
    }

    pub fn r_r(&self, k: f64) -> f64 {
        let a = self.params.alpha();
        (4.0 + a * k + self.j(k)) / (2.0 * k)
    }

    pub fn max_residual(&self) -> f64 {
        self.boundary.iter().map(|&(r, z)| (self.params.potential(r, z) + 1.0).abs()).fold(0.0, f64::max)
    }

    /// Largest value of r² + (1+2α)z² on the boundary.
    pub fn max_rho(&self) -> f64 {
        let c = 1.0 + 2.0 * self.params.alpha();
        self.boundary.iter().map(|&(r, z)| (r * r + c * z * z).sqrt()).fold(0.0, f64::max)
    }

    pub fn contains(&self, r: f64, z: f64) -> bool {
        r > 0.0 && self.params.potential(r, z) <= -1.0
    }
}

/// Boundary of {V ≤ −1} by bisection along rays from the minimum of V.
pub fn hill_region(params: ReducedParams, n_samples: usize) -> Result<HillRegion> {
    if !params.is_in_domain() {
        return Err(Error::NotInDomain(format!("({}, {}) is not sphere-like", params.beta, params.eps)));
    }
    let n = n_samples.max(8);
    let r0 = params.r0();
    let zs = 1.0 / (1.0 + 2.0 * params.alpha()).sqrt();
    let f = |r: f64, z: f64| params.potential(r, z) + 1.0;
    let mut boundary = Vec::with_capacity(n);
    for j in 0..n {
        let phi = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
        let (dr, dz) = (phi.cos(), phi.sin() * zs);
        // outer bracket: stop short of r = 0 on leftward rays
        let mut hi = if dr < 0.0 { 0.999_999 * r0 / -dr } else { 1.0 };
        if dr >= 0.0 {
            while f(r0 + hi * dr, hi * dz) < 0.0 {
                hi *= 2.0;
            }
        }
        let s = bisect(|s| f(r0 + s * dr, s * dz), 0.0, hi, 1e-16 * hi)?;
        let z = if j == 0 || 2 * j == n { 0.0 } else { s * dz };
        boundary.push((r0 + s * dr, z));
    }
    // mirror exactly so the polyline is symmetric to the bit
    for j in (n / 2 + 1)..n {
        let (r, z) = boundary[n - j];
        boundary[j] = (r, -z);
    }
    let (a, w) = (params.alpha(), params.varpi());
    let kmax = 4.0 / (a * (std::f64::consts::SQRT_2 * w - 1.0));
    let hr = HillRegion { params, r_min: params.r_min(), r_max: params.r_max(), boundary, kmax };
    let res = hr.max_residual();
    if res > 1e-10 {
        return Err(Error::Consistency(format!("boundary residual {res}")));
    }
    Ok(hr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_point_converts() {
        let p = ReducedParams::new(0.6, 0.6).unwrap();
        assert!((p.alpha() - 6.0).abs() < 1e-14);
        assert!((p.varpi2() - 8.0 / 9.0).abs() < 1e-15);
        assert!((p.r_min() - 1.0 / 3.0).abs() < 1e-15);
        assert!((p.r_max() - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(PhysicalParams::new(1.0, 4.0, -1.0).unwrap().beta(), 0.5);
    }

    #[test]
    fn surface_classes() {
        let sphere = PhysicalParams::new(1.0, 4.0, -1.0).unwrap();
        assert_eq!(classify_surface(&sphere).unwrap(), SurfaceClass::SphereLike);
        let alpha = 6.0;
        let w = (1.0 + 4.0 / alpha) / 2f64.sqrt();
        match classify_surface(&PhysicalParams::new(w, alpha, -1.0).unwrap()).unwrap() {
            SurfaceClass::SinglePoint { r } => assert!((r - w * w * 0.6).abs() < 1e-14),
            c => panic!("{c:?}"),
        }
        let unb = PhysicalParams::new(0.5, 6.0, -1.0).unwrap();
        assert_eq!(classify_surface(&unb).unwrap(), SurfaceClass::UnboundedZ);
        let edge = PhysicalParams::new(0.5f64.sqrt(), 6.0, -1.0).unwrap();
        assert_eq!(classify_surface(&edge).unwrap(), SurfaceClass::UnboundedZ);
        let empty = PhysicalParams::new(2.0, 6.0, -1.0).unwrap();
        assert_eq!(classify_surface(&empty).unwrap(), SurfaceClass::Empty);
        assert!(PhysicalParams::new(1.0, -1.0, -1.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn endpoints_match_root_finding() {
        let p = ReducedParams::new(0.6, 0.6).unwrap();
        let f = |r: f64| p.potential(r, 0.0) + 1.0;
        let lo = bisect(f, 0.05, p.r0(), 1e-15).unwrap();
        let hi = bisect(f, p.r0(), 10.0, 1e-15).unwrap();
        assert!((lo - 1.0 / 3.0).abs() < 1e-13);
        assert!((hi - 4.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn boundary_is_symmetric_and_on_level_set() {
        let p = ReducedParams::new(0.6, 0.6).unwrap();
        let h = hill_region(p, 256).unwrap();
        assert!(h.max_residual() < 1e-10);
        assert!((h.boundary[0].0 - 4.0 / 3.0).abs() < 1e-12);
        assert!((h.boundary[128].0 - 1.0 / 3.0).abs() < 1e-12);
        for j in 1..256 {
            let (r1, z1) = h.boundary[j];
            let (r2, z2) = h.boundary[256 - j];
            assert_eq!((r1, z1), (r2, -z2));
        }
        assert!(h.boundary[10].1 > 0.0);
    }

    #[test]
    fn rk_coordinates_at_k_one_and_kmax() {
        let p = ReducedParams::new(0.6, 0.6).unwrap();
        let h = hill_region(p, 64).unwrap();
        let a = p.alpha();
        assert!((h.r_l(1.0) - a * p.r_min()).abs() < 1e-12);
        assert!((h.r_r(1.0) - a * p.r_max()).abs() < 1e-12);
        assert!((h.r_l(h.kmax) - h.r_r(h.kmax)).abs() < 1e-6);
        let mut k = 1.0;
        while k < h.kmax {
            assert!(h.r_l(k) <= h.r_r(k));
            k += 0.01;
        }
    }

    #[test]
    fn outside_domain_is_rejected() {
        assert!(hill_region(ReducedParams::new(0.8, 0.7).unwrap(), 32).is_err());
        assert!(ReducedParams::in_domain(0.5, 0.0).is_err());
        assert!(PhysicalParams::new(2.0, 6.0, -1.0).unwrap().to_reduced().is_err());
    }

    proptest! {
        #[test]
        // ε carries a conditioning factor 1/ε through the square root, so the
        // 1e-14 round trip is asserted away from the ε = 0 edge
        fn round_trip(beta in 0.01f64..0.99, t in 0.0f64..0.99) {
            let top = 0.99 * (1.0 - beta * beta).sqrt();
            let eps = 0.05 + t * (top - 0.05).max(0.0);
            let p = ReducedParams::in_domain(beta, eps).unwrap();
            let q = p.to_physical().to_reduced().unwrap();
            prop_assert!((q.beta - beta).abs() < 1e-14);
            prop_assert!((q.eps - eps).abs() < 1e-14);
            prop_assert_eq!(classify_surface(&p.to_physical()).unwrap(), SurfaceClass::SphereLike);
            let h = p.r_min() * p.r_max();
            prop_assert!((h - p.varpi2() / 2.0).abs() < 1e-12 * h.max(1.0));
            prop_assert!((p.r_min() - p.varpi2() * beta / (1.0 + eps)).abs() < 1e-12 * p.r_min());
            prop_assert!((p.r_max() - p.varpi2() * beta / (1.0 - eps)).abs() < 1e-12 * p.r_max());
        }
    }
}
