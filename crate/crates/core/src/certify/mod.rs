//! Exact rational certification of the algebraic identities behind the
//! polynomial Liapunov family: the coefficient recursion, symmetry of
//! `S_n = D²Phi_n M`, the closed form and antisymmetry of the determinant
//! coefficients `A_{j,k}`, and the determinant lower bound.
//!
//! Parameters `(R, mu)` are fixed rationals; every comparison is exact.

mod bivar;

use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub use bivar::BivarPoly;

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = num_rational::BigRational;

/// Parses `p/q`, an integer, or a finite decimal such as `0.125`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::domain(format!("cannot parse `{s}` as a rational"));
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{int}{frac}");
        let num = BigInt::from_str(&digits).map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Rational::new(num, den));
    }
    let r = Rational::from_str(s).map_err(|_| bad())?;
    Ok(r)
}

fn small(n: usize) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Exact counterpart of [`crate::liapunov::PhysParams`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatParams {
    r: Rational,
    mu: Rational,
}

impl RatParams {
    pub fn new(r: Rational, mu: Rational) -> Result<Self> {
        if !r.is_positive() || !mu.is_positive() {
            return Err(Error::domain(format!(
                "R and mu must be positive, got {r}, {mu}"
            )));
        }
        Ok(Self { r, mu })
    }

    pub fn parse(r: &str, mu: &str) -> Result<Self> {
        Self::new(parse_rational(r)?, parse_rational(mu)?)
    }

    pub fn r(&self) -> &Rational {
        &self.r
    }

    pub fn mu(&self) -> &Rational {
        &self.mu
    }

    fn alpha(&self, k: usize, n: usize) -> Rational {
        &self.r * (small(k) + &self.mu * small(n - k - 1))
    }
}

/// Exact coefficients `a_{0,n}, ..., a_{n,n}` via the recursion.
pub fn rat_coeffs(n: usize, rp: &RatParams) -> Result<Vec<Rational>> {
    if n < 2 {
        return Err(Error::domain(format!(
            "polynomial order must be >= 2, got {n}"
        )));
    }
    let mut out = Vec::with_capacity(n + 1);
    let mut a = Rational::one();
    out.push(a.clone());
    for j in 0..n {
        let al = rp.alpha(j, n);
        let ratio = (small(j) + &al) * small(n - j) / (al * small(j + 1));
        a *= ratio;
        out.push(a.clone());
    }
    Ok(out)
}

/// Exact coefficients via the binomial product formula.
pub fn rat_coeffs_product(n: usize, rp: &RatParams) -> Result<Vec<Rational>> {
    if n < 2 {
        return Err(Error::domain(format!(
            "polynomial order must be >= 2, got {n}"
        )));
    }
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let mut binom = Rational::one();
        for i in 0..j {
            binom = binom * small(n - i) / small(i + 1);
        }
        let mut prod = Rational::one();
        for k in 0..j {
            let al = rp.alpha(k, n);
            prod = prod * (small(k) + &al) / al;
        }
        out.push(binom * prod);
    }
    Ok(out)
}

/// Precomputed coefficients and `alpha` values for one `(n, R, mu)` cell.
#[derive(Debug, Clone)]
pub struct Cell {
    n: usize,
    rp: RatParams,
    coeffs: Vec<Rational>,
    alphas: Vec<Rational>,
}

impl Cell {
    pub fn new(n: usize, rp: &RatParams) -> Result<Self> {
        let coeffs = rat_coeffs(n, rp)?;
        let alphas = (0..n).map(|k| rp.alpha(k, n)).collect();
        Ok(Self {
            n,
            rp: rp.clone(),
            coeffs,
            alphas,
        })
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    fn check_jk(&self, j: usize, k: usize) -> Result<()> {
        if j > self.n - 2 || k > self.n - 2 {
            return Err(Error::domain(format!(
                "A_(j,k) needs 0 <= j, k <= n-2 = {}, got ({j}, {k})",
                self.n - 2
            )));
        }
        Ok(())
    }

    /// `(j+2)(n-k) a_{j+2} a_k - (n-j-1)(k+1) a_{j+1} a_{k+1}`
    pub fn a_jk_definition(&self, j: usize, k: usize) -> Result<Rational> {
        self.check_jk(j, k)?;
        let (n, a) = (self.n, &self.coeffs);
        Ok(small((j + 2) * (n - k)) * &a[j + 2] * &a[k]
            - small((n - j - 1) * (k + 1)) * &a[j + 1] * &a[k + 1])
    }

    /// `mu R (n-1) (n-j-1)(n-k)(j+1-k) / (alpha_{j+1} alpha_k) a_{j+1} a_k`
    pub fn a_jk_closed(&self, j: usize, k: usize) -> Result<Rational> {
        self.check_jk(j, k)?;
        let n = self.n;
        let signed = BigInt::from(j as i64 + 1 - k as i64);
        let factor = &self.rp.mu
            * &self.rp.r
            * small((n - 1) * (n - j - 1) * (n - k))
            * Rational::from_integer(signed);
        Ok(
            factor / (&self.alphas[j + 1] * &self.alphas[k])
                * &self.coeffs[j + 1]
                * &self.coeffs[k],
        )
    }

    /// Hessian entries `(∂₁², ∂₁∂₂, ∂₂²)` of `Phi_n` as exact polynomials.
    pub fn hessian(&self) -> (BivarPoly, BivarPoly, BivarPoly) {
        let (n, a) = (self.n, &self.coeffs);
        let mut h11 = BivarPoly::zero();
        let mut h12 = BivarPoly::zero();
        let mut h22 = BivarPoly::zero();
        for j in 0..=n - 2 {
            let (e1, e2) = (j as u32, (n - j - 2) as u32);
            h11.add_term(e1, e2, small((j + 1) * (j + 2)) * &a[j + 2]);
            h12.add_term(e1, e2, small((j + 1) * (n - j - 1)) * &a[j + 1]);
            h22.add_term(e1, e2, small((n - j) * (n - j - 1)) * &a[j]);
        }
        (h11, h12, h22)
    }

    /// `det D²Phi_n` as an exact polynomial.
    pub fn hessian_det(&self) -> BivarPoly {
        let (h11, h12, h22) = self.hessian();
        &(&h11 * &h22) - &(&h12 * &h12)
    }

    /// Entries of `S_n(X) = D²Phi_n(X) M(X)`.
    pub fn expand_sn(&self) -> PolyMatrix2 {
        let (h11, h12, h22) = self.hessian();
        let (r, mu) = (&self.rp.r, &self.rp.mu);
        let m11 = BivarPoly::monomial(Rational::one() + r, 1, 0);
        let m12 = BivarPoly::monomial(r.clone(), 1, 0);
        let m2x = BivarPoly::monomial(mu * r, 0, 1);
        PolyMatrix2 {
            e11: &(&h11 * &m11) + &(&h12 * &m2x),
            e12: &(&h11 * &m12) + &(&h12 * &m2x),
            e21: &(&h12 * &m11) + &(&h22 * &m2x),
            e22: &(&h12 * &m12) + &(&h22 * &m2x),
        }
    }

    /// Right-hand side of the determinant lower bound at `x`. For `n = 2`
    /// the two monomials `X1^0` and `X2^0` coincide and are counted once.
    pub fn det_bound(&self, x1: &Rational, x2: &Rational) -> Result<Rational> {
        let n = self.n;
        let c = small(n - 1);
        if n == 2 {
            return Ok(c * self.a_jk_definition(0, 0)?);
        }
        let e = (2 * n - 4) as u32;
        Ok(&c * self.a_jk_definition(n - 2, n - 2)? * bivar::pow(x1, e)
            + &c * self.a_jk_definition(0, 0)? * bivar::pow(x2, e))
    }
}

/// A 2×2 matrix of exact bivariate polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix2 {
    pub e11: BivarPoly,
    pub e12: BivarPoly,
    pub e21: BivarPoly,
    pub e22: BivarPoly,
}

impl PolyMatrix2 {
    pub fn entries(&self) -> [&BivarPoly; 4] {
        [&self.e11, &self.e12, &self.e21, &self.e22]
    }
}

/// Returns the definition value and the closed-form value of `A_{j,k}`.
pub fn a_jk(j: usize, k: usize, n: usize, rp: &RatParams) -> Result<(Rational, Rational)> {
    let cell = Cell::new(n, rp)?;
    Ok((cell.a_jk_definition(j, k)?, cell.a_jk_closed(j, k)?))
}

pub fn expand_sn(n: usize, rp: &RatParams) -> Result<PolyMatrix2> {
    Ok(Cell::new(n, rp)?.expand_sn())
}

pub fn verify_symmetry(n: usize, rp: &RatParams) -> Result<bool> {
    let sn = expand_sn(n, rp)?;
    Ok(sn.e12 == sn.e21)
}

/// Definition and closed form of `A_{j,k}` agree for every index pair.
pub fn verify_a_identity(n: usize, rp: &RatParams) -> Result<bool> {
    let cell = Cell::new(n, rp)?;
    for j in 0..=n - 2 {
        for k in 0..=n - 2 {
            if cell.a_jk_definition(j, k)? != cell.a_jk_closed(j, k)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `A_{k-1,j+1} = -A_{j,k}` for `0 <= j <= n-3`, `1 <= k <= n-2`.
pub fn verify_antisymmetry(n: usize, rp: &RatParams) -> Result<bool> {
    if n < 3 {
        return Err(Error::domain(format!("antisymmetry needs n >= 3, got {n}")));
    }
    let cell = Cell::new(n, rp)?;
    for j in 0..=n - 3 {
        for k in 1..=n - 2 {
            let lhs = cell.a_jk_definition(k - 1, j + 1)?;
            let rhs = -cell.a_jk_definition(j, k)?;
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Checks `det D²Phi_n(X) >= (n-1) A_{n-2,n-2} X1^(2n-4) + (n-1) A_{0,0} X2^(2n-4)`
/// exactly at each sample point of the closed cone.
pub fn verify_det_lower_bound(
    n: usize,
    rp: &RatParams,
    samples: &[(Rational, Rational)],
) -> Result<bool> {
    if let Some((x1, x2)) = samples
        .iter()
        .find(|(a, b)| a.is_negative() || b.is_negative())
    {
        return Err(Error::domain(format!(
            "determinant bound samples must lie in the closed cone, got ({x1}, {x2})"
        )));
    }
    let cell = Cell::new(n, rp)?;
    let det = cell.hessian_det();
    for (x1, x2) in samples {
        if det.eval(x1, x2) < cell.det_bound(x1, x2)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Deterministic rational sample points on the lattice `(i/4, j/4)` of
/// `[0, 5]²`. The origin and the two unit axis points always come first.
pub fn lattice_samples(count: usize, seed: u64) -> Vec<(Rational, Rational)> {
    let q = |num: i64| Rational::new(BigInt::from(num), BigInt::from(4));
    let mut out: Vec<(Rational, Rational)> = [(0, 0), (4, 0), (0, 4)]
        .into_iter()
        .map(|(a, b)| (q(a), q(b)))
        .take(count)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < count {
        out.push((q(rng.gen_range(0..=20)), q(rng.gen_range(0..=20))));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Certification outcome for one `(n, R, mu)` cell.
#[derive(Debug, Clone, Serialize)]
pub struct CellReport {
    pub n: usize,
    #[serde(rename = "R")]
    pub r: String,
    pub mu: String,
    pub symmetry: Verdict,
    pub antisymmetry: Verdict,
    pub a_identity: Verdict,
    pub det_bound: Verdict,
    pub wall_time_s: f64,
}

impl CellReport {
    pub fn passed(&self) -> bool {
        [
            self.symmetry,
            self.antisymmetry,
            self.a_identity,
            self.det_bound,
        ]
        .iter()
        .all(|v| *v != Verdict::Fail)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifyReport {
    pub n_max: usize,
    pub det_samples: usize,
    pub seed: u64,
    pub all_pass: bool,
    pub cells: Vec<CellReport>,
}

pub fn certify_cell(
    n: usize,
    rp: &RatParams,
    samples: &[(Rational, Rational)],
) -> Result<CellReport> {
    let start = Instant::now();
    let symmetry = Verdict::from_bool(verify_symmetry(n, rp)?);
    let antisymmetry = if n >= 3 {
        Verdict::from_bool(verify_antisymmetry(n, rp)?)
    } else {
        Verdict::NotApplicable
    };
    let a_identity = Verdict::from_bool(verify_a_identity(n, rp)?);
    let det_bound = Verdict::from_bool(verify_det_lower_bound(n, rp, samples)?);
    Ok(CellReport {
        n,
        r: rp.r.to_string(),
        mu: rp.mu.to_string(),
        symmetry,
        antisymmetry,
        a_identity,
        det_bound,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Certifies every cell of `{2..=n_max} × params`, in parallel. Cells are
/// reported in `(params, n)` order regardless of scheduling.
pub fn certify_grid(
    n_max: usize,
    params: &[RatParams],
    det_samples: usize,
    seed: u64,
) -> Result<CertifyReport> {
    if n_max < 2 {
        return Err(Error::domain(format!("n_max must be >= 2, got {n_max}")));
    }
    let samples = lattice_samples(det_samples, seed);
    let jobs: Vec<(usize, &RatParams)> = params
        .iter()
        .flat_map(|rp| (2..=n_max).map(move |n| (n, rp)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|(n, rp)| certify_cell(*n, rp, &samples))
        .collect::<Result<Vec<_>>>()?;
    Ok(CertifyReport {
        n_max,
        det_samples,
        seed,
        all_pass: cells.iter().all(CellReport::passed),
        cells,
    })
}
