//! Floating-point construction of the polynomial Liapunov family `Phi_n`,
//! its derivatives, and the matrices that enter the dissipation identity
//! `d/dt ∫Phi(u) = -∫<D²Phi(u) M(u) ∂u, ∂u>`.
//!
//! Everything here is a pure function of its inputs.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Highest polynomial order supported in floating point.
pub const MAX_ORDER: usize = 64;

/// The two physical constants of the thin-film Muskat system: the density
/// ratio `R` and the viscosity ratio `mu`. Both are strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    r: f64,
    mu: f64,
}

impl PhysParams {
    pub fn new(r: f64, mu: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::domain(format!(
                "R must be positive and finite, got {r}"
            )));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::domain(format!(
                "mu must be positive and finite, got {mu}"
            )));
        }
        Ok(Self { r, mu })
    }

    #[inline]
    pub fn r(&self) -> f64 {
        self.r
    }

    #[inline]
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `R * max(1, mu)`, the combination controlling `nu_n` and the
    /// small-density-ratio regime.
    #[inline]
    pub fn r_max(&self) -> f64 {
        self.r * self.mu.max(1.0)
    }
}

/// A point `X = (X1, X2)` of the state plane, or a direction `xi`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x1: f64,
    pub x2: f64,
}

impl Vec2 {
    #[inline]
    pub const fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn positive_part(self) -> Vec2 {
        Vec2::new(self.x1.max(0.0), self.x2.max(0.0))
    }

    #[inline]
    pub fn in_cone(self) -> bool {
        self.x1 >= 0.0 && self.x2 >= 0.0
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x1 + o.x1, self.x2 + o.x2)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x1 - o.x1, self.x2 - o.x2)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        Vec2::new(self * v.x1, self * v.x2)
    }
}

/// A real 2×2 matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Matrix2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl Matrix2 {
    #[inline]
    pub const fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub const ZERO: Matrix2 = Matrix2::new(0.0, 0.0, 0.0, 0.0);
    pub const IDENTITY: Matrix2 = Matrix2::new(1.0, 0.0, 0.0, 1.0);

    #[inline]
    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    #[inline]
    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.m11 * v.x1 + self.m12 * v.x2,
            self.m21 * v.x1 + self.m22 * v.x2,
        )
    }

    /// `<A xi, xi>`
    #[inline]
    pub fn quad_form(&self, xi: Vec2) -> f64 {
        self.apply(xi).dot(xi)
    }

    #[inline]
    pub fn scale(&self, s: f64) -> Matrix2 {
        Matrix2::new(s * self.m11, s * self.m12, s * self.m21, s * self.m22)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.m11
            .abs()
            .max(self.m12.abs())
            .max(self.m21.abs())
            .max(self.m22.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.m11.is_finite() && self.m12.is_finite() && self.m21.is_finite() && self.m22.is_finite()
    }

    /// Eigenvalues `(min, max)` of the symmetric part `(A + Aᵀ)/2`.
    pub fn sym_eigenvalues(&self) -> (f64, f64) {
        let off = 0.5 * (self.m12 + self.m21);
        let mean = 0.5 * (self.m11 + self.m22);
        let half_diff = 0.5 * (self.m11 - self.m22);
        let rad = half_diff.hypot(off);
        (mean - rad, mean + rad)
    }

    /// Inverse, or `None` when the determinant vanishes relative to the
    /// entry scale.
    pub fn inverse(&self) -> Option<Matrix2> {
        let det = self.det();
        let scale = self.max_abs();
        if det == 0.0 || det.abs() <= f64::EPSILON * scale * scale * 1e-6 {
            return None;
        }
        let inv = 1.0 / det;
        Some(Matrix2::new(
            self.m22 * inv,
            -self.m12 * inv,
            -self.m21 * inv,
            self.m11 * inv,
        ))
    }
}

impl Add for Matrix2 {
    type Output = Matrix2;
    fn add(self, o: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.m11 + o.m11,
            self.m12 + o.m12,
            self.m21 + o.m21,
            self.m22 + o.m22,
        )
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;
    fn sub(self, o: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.m11 - o.m11,
            self.m12 - o.m12,
            self.m21 - o.m21,
            self.m22 - o.m22,
        )
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, o: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.m11 * o.m11 + self.m12 * o.m21,
            self.m11 * o.m12 + self.m12 * o.m22,
            self.m21 * o.m11 + self.m22 * o.m21,
            self.m21 * o.m12 + self.m22 * o.m22,
        )
    }
}

/// `alpha_{k,n} = R (k + mu (n - k - 1))`.
pub fn alpha(k: usize, n: usize, p: &PhysParams) -> Result<f64> {
    if n < 2 || k >= n {
        return Err(Error::domain(format!(
            "alpha needs 0 <= k <= n-1 and n >= 2, got k = {k}, n = {n}"
        )));
    }
    Ok(alpha_unchecked(k, n, p))
}

#[inline]
fn alpha_unchecked(k: usize, n: usize, p: &PhysParams) -> f64 {
    p.r * (k as f64 + p.mu * (n - k - 1) as f64)
}

fn check_order(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::domain(format!(
            "polynomial order must be >= 2, got {n}"
        )));
    }
    if n > MAX_ORDER {
        return Err(Error::domain(format!(
            "polynomial order {n} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    Ok(())
}

fn finish_coeffs(n: usize, p: &PhysParams, coeffs: Vec<f64>) -> Result<LiapunovPoly> {
    if coeffs.iter().any(|c| !c.is_finite() || *c <= 0.0) {
        return Err(Error::Overflow {
            order: n,
            r: p.r,
            mu: p.mu,
        });
    }
    Ok(LiapunovPoly::Homogeneous { coeffs })
}

/// Coefficients from the closed product formula
/// `a_j = C(n, j) prod_{k<j} (k + alpha_k) / alpha_k`.
pub fn build_coeffs(n: usize, p: &PhysParams) -> Result<LiapunovPoly> {
    check_order(n)?;
    let mut coeffs = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let mut binom = 1.0;
        for i in 0..j {
            binom = binom * (n - i) as f64 / (i + 1) as f64;
        }
        let prod: f64 = (0..j)
            .map(|k| {
                let a = alpha_unchecked(k, n, p);
                (k as f64 + a) / a
            })
            .product();
        coeffs.push(binom * prod);
    }
    finish_coeffs(n, p, coeffs)
}

/// Coefficients from the two-term recursion
/// `a_{j+1} = (n-j)(j+alpha_j) / ((j+1) alpha_j) * a_j`, `a_0 = 1`.
///
/// This is the path used by the solver.
pub fn build_coeffs_recursive(n: usize, p: &PhysParams) -> Result<LiapunovPoly> {
    check_order(n)?;
    let mut coeffs = Vec::with_capacity(n + 1);
    let mut a = 1.0;
    coeffs.push(a);
    for j in 0..n {
        let al = alpha_unchecked(j, n, p);
        a *= ((n - j) as f64 * (j as f64 + al)) / ((j + 1) as f64 * al);
        coeffs.push(a);
    }
    finish_coeffs(n, p, coeffs)
}

/// `L(r) = r ln r - r + 1`, extended by continuity with `L(0) = 1`.
#[inline]
pub fn entropy_l(r: f64) -> f64 {
    if r == 0.0 {
        1.0
    } else {
        r * r.ln() - r + 1.0
    }
}

/// A member of the Liapunov family.
///
/// Order 1 is the entropy `L(X1) + L(X2)/mu`; orders `n >= 2` are the
/// homogeneous polynomials `sum_j a_j X1^j X2^(n-j)` with `a_0 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum LiapunovPoly {
    Entropy { mu: f64 },
    Homogeneous { coeffs: Vec<f64> },
}

impl LiapunovPoly {
    /// Builds `Phi_n` for any `n >= 1`.
    pub fn new(n: usize, p: &PhysParams) -> Result<Self> {
        match n {
            0 => Err(Error::domain("Liapunov order must be >= 1")),
            1 => Ok(LiapunovPoly::Entropy { mu: p.mu }),
            _ => build_coeffs_recursive(n, p),
        }
    }

    pub fn order(&self) -> usize {
        match self {
            LiapunovPoly::Entropy { .. } => 1,
            LiapunovPoly::Homogeneous { coeffs } => coeffs.len() - 1,
        }
    }

    pub fn coeffs(&self) -> Option<&[f64]> {
        match self {
            LiapunovPoly::Entropy { .. } => None,
            LiapunovPoly::Homogeneous { coeffs } => Some(coeffs),
        }
    }
}

/// `sum_{j=0}^{deg} c(j) X1^j X2^(deg-j)`.
fn homogeneous_sum(deg: usize, x: Vec2, c: impl Fn(usize) -> f64) -> f64 {
    let mut pow2 = Vec::with_capacity(deg + 1);
    let mut acc = 1.0;
    for _ in 0..=deg {
        pow2.push(acc);
        acc *= x.x2;
    }
    let mut p1 = 1.0;
    let mut sum = 0.0;
    for j in 0..=deg {
        sum += c(j) * p1 * pow2[deg - j];
        p1 *= x.x1;
    }
    sum
}

fn entropy_domain(x: Vec2, strict: bool) -> Result<()> {
    let ok = if strict {
        x.x1 > 0.0 && x.x2 > 0.0
    } else {
        x.in_cone()
    };
    if ok {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "entropy is defined on the {} cone only, got ({}, {})",
            if strict { "open" } else { "closed" },
            x.x1,
            x.x2
        )))
    }
}

pub fn phi_eval(poly: &LiapunovPoly, x: Vec2) -> Result<f64> {
    match poly {
        LiapunovPoly::Entropy { mu } => {
            entropy_domain(x, false)?;
            Ok(entropy_l(x.x1) + entropy_l(x.x2) / mu)
        }
        LiapunovPoly::Homogeneous { coeffs } => {
            Ok(homogeneous_sum(coeffs.len() - 1, x, |j| coeffs[j]))
        }
    }
}

/// Gradient `(∂₁Phi, ∂₂Phi)`. The entropy gradient requires `X` in the open cone.
pub fn phi_grad(poly: &LiapunovPoly, x: Vec2) -> Result<Vec2> {
    match poly {
        LiapunovPoly::Entropy { mu } => {
            entropy_domain(x, true)?;
            Ok(Vec2::new(x.x1.ln(), x.x2.ln() / mu))
        }
        LiapunovPoly::Homogeneous { coeffs } => {
            let n = coeffs.len() - 1;
            let d1 = homogeneous_sum(n - 1, x, |j| (j + 1) as f64 * coeffs[j + 1]);
            let d2 = homogeneous_sum(n - 1, x, |j| (n - j) as f64 * coeffs[j]);
            Ok(Vec2::new(d1, d2))
        }
    }
}

pub fn phi_hessian(poly: &LiapunovPoly, x: Vec2) -> Result<Matrix2> {
    match poly {
        LiapunovPoly::Entropy { mu } => {
            entropy_domain(x, true)?;
            Ok(Matrix2::new(1.0 / x.x1, 0.0, 0.0, 1.0 / (mu * x.x2)))
        }
        LiapunovPoly::Homogeneous { coeffs } => {
            let n = coeffs.len() - 1;
            let h11 = homogeneous_sum(n - 2, x, |j| ((j + 1) * (j + 2)) as f64 * coeffs[j + 2]);
            let h12 = homogeneous_sum(n - 2, x, |j| ((j + 1) * (n - j - 1)) as f64 * coeffs[j + 1]);
            let h22 = homogeneous_sum(n - 2, x, |j| ((n - j) * (n - j - 1)) as f64 * coeffs[j]);
            Ok(Matrix2::new(h11, h12, h12, h22))
        }
    }
}

/// The mobility matrix `M(X)`; rows `((1+R)X1, R X1)` and `(mu R X2, mu R X2)`.
pub fn mobility(p: &PhysParams, x: Vec2) -> Matrix2 {
    let (r, mu) = (p.r, p.mu);
    Matrix2::new((1.0 + r) * x.x1, r * x.x1, mu * r * x.x2, mu * r * x.x2)
}

/// `M_eps(X) = eps I + M(X_+)`.
pub fn mobility_reg(p: &PhysParams, eps: f64, x: Vec2) -> Result<Matrix2> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain(format!(
            "epsilon must be positive, got {eps}"
        )));
    }
    Ok(Matrix2::IDENTITY.scale(eps) + mobility(p, x.positive_part()))
}

/// The constant symmetrizer `S = ((1+R, R), (R, R))`.
pub fn s_matrix(p: &PhysParams) -> Matrix2 {
    Matrix2::new(1.0 + p.r, p.r, p.r, p.r)
}

pub fn sm_product(p: &PhysParams, x: Vec2) -> Matrix2 {
    s_matrix(p) * mobility(p, x)
}

/// `S_n(X) = D²Phi_n(X) M(X)`.
pub fn hessian_mobility_product(poly: &LiapunovPoly, p: &PhysParams, x: Vec2) -> Result<Matrix2> {
    Ok(phi_hessian(poly, x)? * mobility(p, x))
}

/// `nu_n = exp{(n-1)[(1+r) ln(1 + 1/r) - 1]} - 1` with `r = R max(1, mu)`.
pub fn nu_lower(n: usize, p: &PhysParams) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("nu_n needs n >= 2, got {n}")));
    }
    let rm = p.r_max();
    let c = (1.0 + rm) * (1.0 / rm).ln_1p() - 1.0;
    Ok(((n - 1) as f64 * c).exp_m1())
}

/// Outcome of the two-sided sandwich
/// `nu_n X1^n + (X1+X2)^n <= Phi_n(X) <= ((1+R)X1 + R X2)^n / R^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub lower_bound: f64,
    pub value: f64,
    pub upper_bound: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

const BOUND_SLACK: f64 = 1e-10;

pub fn check_bounds(poly: &LiapunovPoly, p: &PhysParams, x: Vec2) -> Result<BoundCheck> {
    if !x.in_cone() {
        return Err(Error::domain(format!(
            "bounds hold on the closed cone only, got ({}, {})",
            x.x1, x.x2
        )));
    }
    let n = poly.order();
    if n < 2 {
        return Err(Error::domain("bounds apply to polynomial orders n >= 2"));
    }
    let ni = n as i32;
    let value = phi_eval(poly, x)?;
    let lower = nu_lower(n, p)? * x.x1.powi(ni) + (x.x1 + x.x2).powi(ni);
    let upper = ((1.0 + p.r) * x.x1 / p.r + x.x2).powi(ni);
    Ok(BoundCheck {
        lower_bound: lower,
        value,
        upper_bound: upper,
        lower_ok: lower <= value * (1.0 + BOUND_SLACK) + f64::MIN_POSITIVE,
        upper_ok: value <= upper * (1.0 + BOUND_SLACK) + f64::MIN_POSITIVE,
    })
}

/// Pointwise energy density `½[X1² + R(X1+X2)²]` and entropy density
/// `L(X1) + L(X2)/mu`.
pub fn scalar_functionals(p: &PhysParams, x: Vec2) -> Result<(f64, f64)> {
    entropy_domain(x, false)?;
    let s = x.x1 + x.x2;
    let energy = 0.5 * (x.x1 * x.x1 + p.r * s * s);
    let entropy = entropy_l(x.x1) + entropy_l(x.x2) / p.mu;
    Ok((energy, entropy))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(r: f64, mu: f64) -> PhysParams {
        PhysParams::new(r, mu).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn params_reject_non_positive() {
        assert!(PhysParams::new(0.0, 1.0).is_err());
        assert!(PhysParams::new(1.0, -2.0).is_err());
        assert!(PhysParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha(0, 2, &pp(1.0, 1.0)).unwrap(), 1.0);
        let p = pp(0.7, 3.0);
        for n in 2..10 {
            assert!((alpha(n - 1, n, &p).unwrap() - 0.7 * (n - 1) as f64).abs() < 1e-14);
        }
        for k in 0..3 {
            assert_eq!(alpha(k, 3, &pp(1.0, 1.0)).unwrap(), 2.0);
        }
        assert!(alpha(3, 3, &p).is_err());
    }

    #[test]
    fn coeffs_order_two() {
        for &r in &[0.1, 1.0, 3.5] {
            let poly = build_coeffs(2, &pp(r, 2.0)).unwrap();
            let c = poly.coeffs().unwrap();
            assert_eq!(c[0], 1.0);
            assert!(rel(c[1], 2.0) < 1e-15);
            assert!(rel(c[2], (1.0 + r) / r) < 1e-15);
        }
    }

    #[test]
    fn coeffs_order_three_unit_params() {
        let p = pp(1.0, 1.0);
        for poly in [
            build_coeffs(3, &p).unwrap(),
            build_coeffs_recursive(3, &p).unwrap(),
        ] {
            assert_eq!(poly.coeffs().unwrap(), &[1.0, 3.0, 4.5, 3.0]);
        }
        assert_eq!(
            build_coeffs_recursive(2, &p).unwrap().coeffs().unwrap(),
            &[1.0, 2.0, 2.0]
        );
    }

    #[test]
    fn order_limits() {
        let p = pp(1.0, 1.0);
        assert!(build_coeffs(1, &p).is_err());
        assert!(build_coeffs_recursive(MAX_ORDER + 1, &p).is_err());
        assert!(build_coeffs_recursive(MAX_ORDER, &p).is_ok());
        // ((1+R)/R)^64 with R = 1e-6 leaves the double range.
        assert!(matches!(
            build_coeffs_recursive(64, &pp(1e-6, 1.0)),
            Err(Error::Overflow { .. })
        ));
    }

    #[test]
    fn eval_examples() {
        let p = pp(1.0, 1.0);
        for n in 2..8 {
            let poly = LiapunovPoly::new(n, &p).unwrap();
            assert_eq!(phi_eval(&poly, Vec2::new(0.0, 0.0)).unwrap(), 0.0);
        }
        let phi2 = LiapunovPoly::new(2, &p).unwrap();
        assert_eq!(phi_eval(&phi2, Vec2::new(1.0, 1.0)).unwrap(), 5.0);
        let phi1 = LiapunovPoly::new(1, &p).unwrap();
        assert_eq!(phi_eval(&phi1, Vec2::new(1.0, 1.0)).unwrap(), 0.0);
        assert!(phi_eval(&phi1, Vec2::new(-0.1, 1.0)).is_err());
        assert_eq!(phi_eval(&phi1, Vec2::new(0.0, 0.0)).unwrap(), 2.0);
    }

    #[test]
    fn grad_examples() {
        let p = pp(1.0, 1.0);
        for n in 3..8 {
            let poly = LiapunovPoly::new(n, &p).unwrap();
            assert_eq!(phi_grad(&poly, Vec2::default()).unwrap(), Vec2::default());
        }
        let phi2 = LiapunovPoly::new(2, &p).unwrap();
        assert_eq!(
            phi_grad(&phi2, Vec2::new(1.0, 0.0)).unwrap(),
            Vec2::new(4.0, 2.0)
        );
    }

    #[test]
    fn grad_matches_central_differences() {
        let p = pp(2.0, 0.5);
        let poly = LiapunovPoly::new(5, &p).unwrap();
        let x = Vec2::new(0.3, 1.7);
        let g = phi_grad(&poly, x).unwrap();
        let h = 1e-6;
        let f = |y: Vec2| phi_eval(&poly, y).unwrap();
        let d1 = (f(Vec2::new(x.x1 + h, x.x2)) - f(Vec2::new(x.x1 - h, x.x2))) / (2.0 * h);
        let d2 = (f(Vec2::new(x.x1, x.x2 + h)) - f(Vec2::new(x.x1, x.x2 - h))) / (2.0 * h);
        assert!(rel(g.x1, d1) < 1e-7, "{} vs {}", g.x1, d1);
        assert!(rel(g.x2, d2) < 1e-7, "{} vs {}", g.x2, d2);
    }

    #[test]
    fn hessian_examples() {
        let p = pp(1.0, 1.0);
        let phi2 = LiapunovPoly::new(2, &p).unwrap();
        for x in [Vec2::new(0.0, 0.0), Vec2::new(3.0, -1.0)] {
            assert_eq!(
                phi_hessian(&phi2, x).unwrap(),
                Matrix2::new(4.0, 2.0, 2.0, 2.0)
            );
        }
        let phi4 = LiapunovPoly::new(4, &p).unwrap();
        let x = Vec2::new(1.1, 0.4);
        let hs = phi_hessian(&phi4, x).unwrap();
        let h = 1e-6;
        let g = |y: Vec2| phi_grad(&phi4, y).unwrap();
        let c1 = (g(Vec2::new(x.x1 + h, x.x2)) - g(Vec2::new(x.x1 - h, x.x2))).x1 / (2.0 * h);
        let c12 = (g(Vec2::new(x.x1, x.x2 + h)) - g(Vec2::new(x.x1, x.x2 - h))).x1 / (2.0 * h);
        let c2 = (g(Vec2::new(x.x1, x.x2 + h)) - g(Vec2::new(x.x1, x.x2 - h))).x2 / (2.0 * h);
        assert!(rel(hs.m11, c1) < 1e-6);
        assert!(rel(hs.m12, c12) < 1e-6);
        assert!(rel(hs.m22, c2) < 1e-6);
        assert!(hs.trace() >= 0.0);
    }

    #[test]
    fn mobility_examples() {
        let p = pp(1.0, 1.0);
        assert_eq!(mobility(&p, Vec2::default()), Matrix2::ZERO);
        assert_eq!(
            mobility(&p, Vec2::new(1.0, 1.0)),
            Matrix2::new(2.0, 1.0, 1.0, 1.0)
        );
        let q = pp(0.3, 2.5);
        let m = mobility(&q, Vec2::new(0.7, 1.9));
        assert_eq!(m.m21, m.m22);
    }

    #[test]
    fn regularized_mobility_examples() {
        let p = pp(0.4, 1.5);
        let eps = 1e-3;
        assert_eq!(
            mobility_reg(&p, eps, Vec2::new(-1.0, -1.0)).unwrap(),
            Matrix2::IDENTITY.scale(eps)
        );
        let x = Vec2::new(0.2, 3.0);
        assert_eq!(
            mobility_reg(&p, eps, x).unwrap(),
            Matrix2::IDENTITY.scale(eps) + mobility(&p, x)
        );
        let m = mobility_reg(&p, eps, Vec2::new(-0.5, 2.0)).unwrap();
        assert_eq!(m.m12, 0.0);
        assert!(m.m11 >= m.m12);
        let m = mobility_reg(&p, eps, Vec2::new(2.0, -0.5)).unwrap();
        assert_eq!(m.m21, 0.0);
        assert!(m.m22 >= m.m21);
        assert!(mobility_reg(&p, 0.0, x).is_err());
    }

    #[test]
    fn symmetrizer_examples() {
        let p = pp(1.0, 1.0);
        let s = s_matrix(&p);
        assert_eq!(s, Matrix2::new(2.0, 1.0, 1.0, 1.0));
        let xi = Vec2::new(1.0, -1.0);
        assert_eq!(s.quad_form(xi), 1.0);
        assert!(s.quad_form(xi) >= (1.0 / 3.0) * xi.norm_sq());
        for &r in &[0.1, 1.0, 7.0] {
            let p = pp(r, 0.3);
            let half_hess = phi_hessian(&LiapunovPoly::new(2, &p).unwrap(), Vec2::default())
                .unwrap()
                .scale(r / 2.0);
            let s = s_matrix(&p);
            assert!((half_hess - s).max_abs() < 1e-14 * s.max_abs());
        }
    }

    #[test]
    fn sm_product_examples() {
        let p = pp(0.8, 1.7);
        assert_eq!(sm_product(&p, Vec2::default()), Matrix2::ZERO);
        let x = Vec2::new(0.6, 2.2);
        let sm = sm_product(&p, x);
        let expected = (1.0 + 0.8) * 0.8 * x.x1 + 1.7 * 0.8 * 0.8 * x.x2;
        assert!(rel(sm.m12, expected) < 1e-15);
        assert!(rel(sm.m21, expected) < 1e-15);
    }

    #[test]
    fn hessian_mobility_product_order_two() {
        let p = pp(1.0, 1.0);
        let phi2 = LiapunovPoly::new(2, &p).unwrap();
        let x = Vec2::new(0.25, 1.5);
        let s2 = hessian_mobility_product(&phi2, &p, x).unwrap();
        let (a, b) = (x.x1, x.x2);
        assert_eq!(
            s2,
            Matrix2::new(
                8.0 * a + 2.0 * b,
                4.0 * a + 2.0 * b,
                4.0 * a + 2.0 * b,
                2.0 * a + 2.0 * b
            )
        );
        assert_eq!(
            hessian_mobility_product(&phi2, &p, Vec2::default()).unwrap(),
            Matrix2::ZERO
        );
    }

    #[test]
    fn hessian_mobility_det_factorizes() {
        let p = pp(0.6, 2.3);
        for n in 2..12 {
            let poly = LiapunovPoly::new(n, &p).unwrap();
            for x in [
                Vec2::new(0.3, 0.9),
                Vec2::new(2.0, 0.1),
                Vec2::new(1.0, 1.0),
            ] {
                let lhs = hessian_mobility_product(&poly, &p, x).unwrap().det();
                let rhs = p.mu() * p.r() * x.x1 * x.x2 * phi_hessian(&poly, x).unwrap().det();
                assert!(rel(lhs, rhs) < 1e-9, "n={n}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn nu_examples() {
        let nu2 = nu_lower(2, &pp(1.0, 1.0)).unwrap();
        assert!((nu2 - (4.0 / std::f64::consts::E - 1.0)).abs() < 1e-15);
        assert!((nu2 - 0.47152).abs() < 1e-5);
        for &(r, mu) in &[(0.01, 0.5), (1.0, 3.0), (50.0, 0.2)] {
            for n in 2..40 {
                assert!(nu_lower(n, &pp(r, mu)).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn bounds_examples() {
        let p = pp(0.5, 2.0);
        for n in 2..10 {
            let poly = LiapunovPoly::new(n, &p).unwrap();
            let at0 = check_bounds(&poly, &p, Vec2::default()).unwrap();
            assert!(at0.holds());
            assert_eq!(
                (at0.lower_bound, at0.value, at0.upper_bound),
                (0.0, 0.0, 0.0)
            );
            let axis = check_bounds(&poly, &p, Vec2::new(0.0, 1.0)).unwrap();
            assert!(axis.holds());
            assert_eq!(axis.value, 1.0);
            assert_eq!(axis.lower_bound, 1.0);
            assert_eq!(axis.upper_bound, 1.0);
        }
        let poly = LiapunovPoly::new(3, &p).unwrap();
        assert!(check_bounds(&poly, &p, Vec2::new(-1.0, 0.0)).is_err());
    }

    #[test]
    fn scalar_functional_examples() {
        let p = pp(1.0, 1.0);
        let (e, h) = scalar_functionals(&p, Vec2::new(1.0, 1.0)).unwrap();
        assert_eq!(e, 2.5);
        assert_eq!(h, 0.0);
        let q = pp(2.5, 0.4);
        let phi2 = LiapunovPoly::new(2, &q).unwrap();
        let x = Vec2::new(0.7, 1.3);
        let (e, _) = scalar_functionals(&q, x).unwrap();
        assert!(rel(e, 0.5 * q.r() * phi_eval(&phi2, x).unwrap()) < 1e-14);
        assert!(scalar_functionals(&q, Vec2::new(0.0, -1e-3)).is_err());
    }

    #[test]
    fn sym_eigenvalues_of_diagonal() {
        let (lo, hi) = Matrix2::new(3.0, 0.0, 0.0, -1.0).sym_eigenvalues();
        assert_eq!((lo, hi), (-1.0, 3.0));
    }
}
