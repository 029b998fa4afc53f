//! Uniform 1D grid, lumped P1 mass, element-averaged weighted stiffness
//! with natural (homogeneous Neumann) boundaries, and nodal quadrature.

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    m: usize,
    h: f64,
}

impl Grid {
    pub fn new(a: f64, b: f64, m: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::domain(format!(
                "grid needs a < b, got a = {a}, b = {b}"
            )));
        }
        if m < 2 {
            return Err(Error::domain(format!(
                "grid needs at least 2 nodes, got {m}"
            )));
        }
        Ok(Self {
            a,
            b,
            m,
            h: (b - a) / (m - 1) as f64,
        })
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Node count.
    #[inline]
    pub fn len(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Mesh width.
    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.m {
            self.b
        } else {
            self.a + i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.m).map(|i| self.node(i))
    }

    /// Lumped mass weight of node `i`.
    #[inline]
    pub fn mass_weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.m {
            0.5 * self.h
        } else {
            self.h
        }
    }

    fn check_len(&self, what: &str, len: usize) -> Result<()> {
        if len != self.m {
            return Err(Error::domain(format!(
                "{what} has {len} values but the grid has {} nodes",
                self.m
            )));
        }
        Ok(())
    }
}

pub fn build_grid(a: f64, b: f64, m: usize) -> Result<Grid> {
    Grid::new(a, b, m)
}

/// Nodal values of a scalar field on a [`Grid`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodalField(Vec<f64>);

impl NodalField {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(m: usize) -> Self {
        Self(vec![0.0; m])
    }

    pub fn constant(m: usize, c: f64) -> Self {
        Self(vec![c; m])
    }

    pub fn from_fn(g: &Grid, f: impl Fn(f64) -> f64) -> Self {
        Self(g.nodes().map(f).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn linf(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

impl Deref for NodalField {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for NodalField {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for NodalField {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Tridiagonal matrix; `sub[i]` sits at `(i+1, i)`, `sup[i]` at `(i, i+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagMatrix {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl TridiagMatrix {
    pub fn zeros(m: usize) -> Self {
        Self {
            sub: vec![0.0; m - 1],
            diag: vec![0.0; m],
            sup: vec![0.0; m - 1],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let m = self.len();
        (0..m)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.sub[i - 1] * v[i - 1];
                }
                if i + 1 < m {
                    s += self.sup[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        let mut s = self.diag[i];
        if i > 0 {
            s += self.sub[i - 1];
        }
        if i < self.sup.len() {
            s += self.sup[i];
        }
        s
    }
}

/// Lumped mass matrix `diag(h/2, h, ..., h, h/2)`.
pub fn assemble_mass(g: &Grid) -> TridiagMatrix {
    let mut mat = TridiagMatrix::zeros(g.len());
    for (i, d) in mat.diag.iter_mut().enumerate() {
        *d = g.mass_weight(i);
    }
    mat
}

/// Stiffness of `∫ w ∂u ∂v` with `w` averaged per element. Rows sum to zero.
pub fn assemble_weighted_stiffness(g: &Grid, w: &[f64]) -> Result<TridiagMatrix> {
    g.check_len("weight", w.len())?;
    let mut k = TridiagMatrix::zeros(g.len());
    let inv_h = 1.0 / g.h();
    for e in 0..g.len() - 1 {
        let c = 0.5 * (w[e] + w[e + 1]) * inv_h;
        k.diag[e] += c;
        k.diag[e + 1] += c;
        k.sup[e] -= c;
        k.sub[e] -= c;
    }
    Ok(k)
}

/// Trapezoidal rule, identical to the lumped-mass weighted sum.
pub fn integrate_nodal(g: &Grid, v: &[f64]) -> Result<f64> {
    g.check_len("field", v.len())?;
    Ok(integrate_unchecked(g, v))
}

pub(crate) fn integrate_unchecked(g: &Grid, v: &[f64]) -> f64 {
    let m = v.len();
    let interior: f64 = v[1..m - 1].iter().sum();
    g.h() * (interior + 0.5 * (v[0] + v[m - 1]))
}

/// `∫ |∂v|²` for the piecewise-linear interpolant of `v`.
pub fn gradient_sq_norm(g: &Grid, v: &[f64]) -> Result<f64> {
    g.check_len("field", v.len())?;
    let inv_h = 1.0 / g.h();
    Ok(v.windows(2).map(|w| (w[1] - w[0]).powi(2) * inv_h).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_examples() {
        let g = build_grid(0.0, 1.0, 11).unwrap();
        assert!((g.h() - 0.1).abs() < 1e-16);
        assert_eq!(g.node(0), 0.0);
        assert_eq!(g.node(10), 1.0);
        let g = build_grid(-1.0, 1.0, 3).unwrap();
        assert_eq!(g.nodes().collect::<Vec<_>>(), vec![-1.0, 0.0, 1.0]);
        assert!(build_grid(0.0, 1.0, 1).is_err());
        assert!(build_grid(1.0, 1.0, 5).is_err());
        assert!(build_grid(2.0, 1.0, 5).is_err());
    }

    #[test]
    fn mass_examples() {
        let g = build_grid(0.0, 1.0, 3).unwrap();
        assert_eq!(assemble_mass(&g).diag, vec![0.25, 0.5, 0.25]);
        let g = build_grid(-0.3, 2.9, 97).unwrap();
        let mass = assemble_mass(&g);
        let total: f64 = mass.diag.iter().sum();
        assert!((total - 3.2).abs() < 1e-14);
        let c = 1.7;
        let mv = mass.mul_vec(&vec![c; g.len()]);
        assert!((mv.iter().sum::<f64>() - c * 3.2).abs() < 1e-13);
    }

    #[test]
    fn stiffness_examples() {
        let g = build_grid(0.0, 2.0, 3).unwrap();
        let k = assemble_weighted_stiffness(&g, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(k.diag, vec![1.0, 2.0, 1.0]);
        assert_eq!(k.sub, vec![-1.0, -1.0]);
        assert_eq!(k.sup, vec![-1.0, -1.0]);
        let k0 = assemble_weighted_stiffness(&g, &[0.0; 3]).unwrap();
        assert_eq!(k0, TridiagMatrix::zeros(3));
        assert!(assemble_weighted_stiffness(&g, &[1.0; 4]).is_err());
    }

    #[test]
    fn quadrature_examples() {
        let g = build_grid(0.0, 1.0, 11).unwrap();
        assert!((integrate_nodal(&g, &[1.0; 11]).unwrap() - 1.0).abs() < 1e-15);
        let x: Vec<f64> = g.nodes().collect();
        assert!((integrate_nodal(&g, &x).unwrap() - 0.5).abs() < 1e-15);
        let g = build_grid(0.0, 1.0, 101).unwrap();
        let x2: Vec<f64> = g.nodes().map(|x| x * x).collect();
        assert!((integrate_nodal(&g, &x2).unwrap() - 1.0 / 3.0).abs() < 2e-5);
        assert!(integrate_nodal(&g, &[1.0; 3]).is_err());
    }

    #[test]
    fn gradient_examples() {
        let g = build_grid(0.0, 1.0, 17).unwrap();
        assert_eq!(gradient_sq_norm(&g, &[3.0; 17]).unwrap(), 0.0);
        let x: Vec<f64> = g.nodes().collect();
        assert!((gradient_sq_norm(&g, &x).unwrap() - 1.0).abs() < 1e-13);
        let x2: Vec<f64> = g.nodes().map(|x| 2.0 * x).collect();
        assert!((gradient_sq_norm(&g, &x2).unwrap() - 4.0).abs() < 1e-13);
    }

    #[test]
    fn gradient_refinement_is_second_order() {
        // v = sin on (0, pi): ∫ cos² = pi/2.
        let err = |m: usize| {
            let g = build_grid(0.0, std::f64::consts::PI, m).unwrap();
            let v: Vec<f64> = g.nodes().map(f64::sin).collect();
            (gradient_sq_norm(&g, &v).unwrap() - std::f64::consts::FRAC_PI_2).abs()
        };
        let (e1, e2, e3) = (err(41), err(81), err(161));
        let rate1 = (e1 / e2).log2();
        let rate2 = (e2 / e3).log2();
        assert!(rate1 > 1.9 && rate2 > 1.9, "rates {rate1}, {rate2}");
    }

    proptest! {
        #[test]
        fn stiffness_symmetric_conservative_psd(
            w in proptest::collection::vec(0.0f64..10.0, 2..40),
            v in proptest::collection::vec(-5.0f64..5.0, 40),
        ) {
            let m = w.len();
            let g = build_grid(0.0, 1.0, m).unwrap();
            let k = assemble_weighted_stiffness(&g, &w).unwrap();
            prop_assert_eq!(&k.sub, &k.sup);
            for i in 0..m {
                let scale = k.diag[i].abs() + 1.0;
                prop_assert!(k.row_sum(i).abs() <= 1e-12 * scale);
            }
            let kv = k.mul_vec(&v[..m]);
            let q: f64 = kv.iter().zip(&v[..m]).map(|(a, b)| a * b).sum();
            prop_assert!(q >= -1e-9);
        }

        #[test]
        fn integration_linear_and_exact_on_affine(
            m in 2usize..60,
            s in -3.0f64..3.0,
            c in -3.0f64..3.0,
            a in -2.0f64..0.0,
            len in 0.1f64..4.0,
        ) {
            let g = build_grid(a, a + len, m).unwrap();
            let v: Vec<f64> = g.nodes().map(|x| s * x + c).collect();
            let exact = s * 0.5 * ((a + len).powi(2) - a * a) + c * len;
            prop_assert!((integrate_nodal(&g, &v).unwrap() - exact).abs() < 1e-11);
            let w: Vec<f64> = v.iter().map(|x| 2.5 * x).collect();
            let lhs = integrate_nodal(&g, &w).unwrap();
            prop_assert!((lhs - 2.5 * integrate_nodal(&g, &v).unwrap()).abs() < 1e-11);
        }
    }
}
