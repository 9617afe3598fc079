//! The `Λu`-module structure of equivariant cohomology and its localization
//! `IL = IH_{S¹} ⊗_{Λu} ℚ(u)`, which is `ℤ₂`-graded.
//!
//! Localization is read off from the truncated module: above the top degree
//! the Gysin sequence makes `u` an isomorphism, so the eventual even and odd
//! dimensions are the ranks over the fraction field. An independent route
//! goes through the localized Gysin sequence, whose connecting map is the
//! polynomial matrix `eub + (±ι)·u`; its rank over `ℚ(u)` comes from
//! fraction-free elimination.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::equivariant::{Equivariant, EquivariantGysin};
use crate::error::{Error, Result};
use crate::model::{Model, Perversity};
use crate::perverse::PerverseData;
use crate::ratla::{q, sign, Matrix, Rational};

/// Graded pieces `H^n` for `n ≤ nu` with `u : H^n → H^{n+2}`.
#[derive(Clone, Debug)]
pub struct LambdaUModule {
    pub dims: Vec<usize>,
    pub u_maps: Vec<Matrix>,
    /// Least `n` such that `u` is an isomorphism in every degree of
    /// `[n, nu]`.
    pub stable_from: Option<usize>,
}

impl LambdaUModule {
    pub fn from_equivariant(eq: &Equivariant) -> Self {
        let nu = eq.nu;
        let dims = eq.dims();
        let iso = |n: usize| {
            let m = &eq.u_maps[n];
            m.rows() == m.cols() && m.rank() == m.cols()
        };
        let mut stable_from = None;
        for n in (0..=nu).rev() {
            if iso(n) {
                stable_from = Some(n);
            } else {
                break;
            }
        }
        LambdaUModule { dims, u_maps: eq.u_maps.clone(), stable_from }
    }

    pub fn nu(&self) -> usize {
        self.dims.len() - 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LocalizedModule {
    pub even_rank: usize,
    pub odd_rank: usize,
    pub stable_from: usize,
}

impl LocalizedModule {
    pub fn ranks(&self) -> (usize, usize) {
        (self.even_rank, self.odd_rank)
    }
}

/// Even and odd ranks of `IL` from the stable window of the module. The
/// window must contain two steps of each parity.
pub fn localize(module: &LambdaUModule) -> Result<LocalizedModule> {
    let nu = module.nu();
    let n0 = module.stable_from.ok_or_else(|| Error::TruncationTooSmall {
        nu,
        reason: "u is not an isomorphism in the top degree".into(),
    })?;
    if nu < n0 + 3 {
        return Err(Error::TruncationTooSmall { nu, reason: format!("u is an isomorphism only from degree {n0}") });
    }
    let even = if n0 % 2 == 0 { n0 } else { n0 + 1 };
    let odd = if n0 % 2 == 1 { n0 } else { n0 + 1 };
    Ok(LocalizedModule { even_rank: module.dims[even], odd_rank: module.dims[odd], stable_from: n0 })
}

// ---------------------------------------------------------------------------
// Polynomials in u

/// A polynomial in `u` with rational coefficients, lowest degree first and
/// without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly(Vec<Rational>);

impl Poly {
    pub fn new(mut c: Vec<Rational>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        Poly(c)
    }

    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::new(vec![c])
    }

    /// `a + b·u`
    pub fn linear(a: Rational, b: Rational) -> Self {
        Poly::new(vec![a, b])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.0.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly::new((0..n).map(|i| self.0.get(i).cloned().unwrap_or_default() + o.0.get(i).cloned().unwrap_or_default()).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly::new((0..n).map(|i| self.0.get(i).cloned().unwrap_or_default() - o.0.get(i).cloned().unwrap_or_default()).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Exact division; `None` when `o` does not divide `self`.
    pub fn div_exact(&self, o: &Poly) -> Option<Poly> {
        let dd = o.degree()?;
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let mut rem = self.0.clone();
        let n = self.degree()?;
        if n < dd {
            return None;
        }
        let lead = &o.0[dd];
        let mut quo = vec![Rational::zero(); n - dd + 1];
        for i in (0..=n - dd).rev() {
            let c = &rem[i + dd] / lead;
            for (j, oc) in o.0.iter().enumerate() {
                rem[i + j] -= &c * oc;
            }
            quo[i] = c;
        }
        rem.iter().all(Zero::is_zero).then(|| Poly::new(quo))
    }
}

/// A matrix over `ℚ[u]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Poly>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        PolyMatrix { rows, cols, data: vec![Poly::zero(); rows * cols] }
    }

    /// `a + b·u` from two rational matrices of the same shape.
    pub fn linear(a: &Matrix, b: &Matrix) -> Self {
        assert_eq!(a.shape(), b.shape());
        let (rows, cols) = a.shape();
        let data = (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c))).map(|(r, c)| Poly::linear(a[(r, c)].clone(), b[(r, c)].clone())).collect();
        PolyMatrix { rows, cols, data }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> &Poly {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, p: Poly) {
        self.data[r * self.cols + c] = p;
    }

    pub fn eval(&self, x: &Rational) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(r, c)] = self.get(r, c).eval(x);
            }
        }
        m
    }

    /// Rank over `ℚ(u)` by Bareiss elimination in `ℚ[u]`. A handful of
    /// random evaluations first give a lower bound; when it is already the
    /// largest possible rank elimination is skipped.
    pub fn rank(&self) -> usize {
        let full = self.rows.min(self.cols);
        if full == 0 {
            return 0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let lower = (0..3).map(|_| self.eval(&q(rng.gen_range(-1000..=1000))).rank()).max().unwrap_or(0);
        if lower == full {
            return full;
        }
        self.bareiss_rank()
    }

    pub fn bareiss_rank(&self) -> usize {
        let mut a: Vec<Vec<Poly>> = (0..self.rows).map(|r| (0..self.cols).map(|c| self.get(r, c).clone()).collect()).collect();
        let mut prev = Poly::constant(Rational::one());
        let mut rank = 0;
        let mut col = 0;
        while rank < self.rows && col < self.cols {
            let Some(piv) = (rank..self.rows).find(|&r| !a[r][col].is_zero()) else {
                col += 1;
                continue;
            };
            a.swap(rank, piv);
            for r in rank + 1..self.rows {
                for c in col + 1..self.cols {
                    let num = a[rank][col].mul(&a[r][c]).sub(&a[r][col].mul(&a[rank][c]));
                    a[r][c] = num.div_exact(&prev).expect("Bareiss quotients are exact");
                }
                a[r][col] = Poly::zero();
            }
            prev = a[rank][col].clone();
            rank += 1;
            col += 1;
        }
        rank
    }
}

// ---------------------------------------------------------------------------
// Localized Gysin sequence

#[derive(Clone, Debug, Serialize)]
pub struct LocalizedGysin {
    /// `dim H(Ω_p)` in even and odd degrees.
    pub base: [usize; 2],
    /// `dim H(G_p)` placed one degree up, even and odd.
    pub gysin: [usize; 2],
    /// Rank over `ℚ(u)` of `δ_ε : GT_ε → IHB_{ε+1}`.
    pub delta_rank: [usize; 2],
    /// The dimension of `IL` that exactness forces.
    pub forced: [usize; 2],
    pub localized: [usize; 2],
    /// Rank of the ordinary connecting map in a stable degree of each parity.
    pub stable_connecting_rank: [usize; 2],
    pub pass: bool,
}

/// `δ_ε` as a matrix over `ℚ[u]`. Columns are `H^k(G_p)` with `k + 1 ≡ ε`,
/// rows `H^{k'}(Ω_p)` with `k' ≡ ε + 1`.
pub fn localized_delta(data: &PerverseData, eps: usize) -> PolyMatrix {
    let top = data.top();
    let gk: Vec<i32> = (0..=top).filter(|k| ((k + 1) as usize) % 2 == eps).collect();
    let bk: Vec<i32> = (0..=top + 2).filter(|k| (*k as usize) % 2 == (eps + 1) % 2).collect();
    let col_off = |k: i32| -> usize { gk.iter().take_while(|&&x| x < k).map(|&x| data.h_gysin.dim(x)).sum() };
    let row_off = |k: i32| -> Option<usize> {
        bk.contains(&k).then(|| bk.iter().take_while(|&&x| x < k).map(|&x| data.h_omega.dim(x)).sum())
    };
    let rows: usize = bk.iter().map(|&k| data.h_omega.dim(k)).sum();
    let cols: usize = gk.iter().map(|&k| data.h_gysin.dim(k)).sum();
    let mut a = Matrix::zeros(rows, cols);
    let mut b = Matrix::zeros(rows, cols);
    for &k in &gk {
        if data.h_gysin.dim(k) == 0 {
            continue;
        }
        let c0 = col_off(k);
        if let Some(r0) = row_off(k + 2) {
            if data.h_omega.dim(k + 2) > 0 {
                a.set_block(r0, c0, &data.eub_at(k));
            }
        }
        if let Some(r0) = row_off(k) {
            if data.h_omega.dim(k) > 0 {
                b.set_block(r0, c0, &data.incl_star(k).scale(&sign(k as i64)));
            }
        }
    }
    PolyMatrix::linear(&a, &b)
}

pub fn localized_gysin(data: &PerverseData, il: &LocalizedModule, eg: &EquivariantGysin, nu: usize) -> Result<LocalizedGysin> {
    let top = data.top();
    let par = |dimf: &dyn Fn(i32) -> usize, shift: i32, eps: usize| -> usize {
        (0..=top + 2).filter(|k| ((k + shift) as usize) % 2 == eps).map(dimf).sum()
    };
    let base = [0, 1].map(|e| par(&|k| data.h_omega.dim(k), 0, e));
    let gysin = [0, 1].map(|e| par(&|k| data.h_gysin.dim(k), 1, e));
    let delta_rank = [0, 1].map(|e| localized_delta(data, e).rank());
    let forced = [0, 1].map(|e| (base[e] - delta_rank[1 - e]) + (gysin[e] - delta_rank[e]));
    let localized = [il.even_rank, il.odd_rank];
    let stable = |n: i32| -> usize { eg.les.connecting_at(n).rank() };
    let n_hi = nu as i32;
    if n_hi - 1 < top + 2 {
        return Err(Error::TruncationTooSmall { nu, reason: "no stable degree below the truncation".into() });
    }
    let mut stable_connecting_rank = [0; 2];
    for n in [n_hi - 1, n_hi] {
        stable_connecting_rank[(n as usize) % 2] = stable(n);
    }
    let pass = forced == localized && stable_connecting_rank == delta_rank;
    Ok(LocalizedGysin { base, gysin, delta_rank, forced, localized, stable_connecting_rank, pass })
}

impl LocalizedGysin {
    pub fn into_result(self) -> Result<Self> {
        if self.forced != self.localized {
            return Err(Error::NotExact {
                degree: 0,
                reason: format!("localized Gysin sequence forces IL = {:?} but the module gives {:?}", self.forced, self.localized),
            });
        }
        if self.stable_connecting_rank != self.delta_rank {
            return Err(Error::Mismatch {
                location: "localized connecting map".into(),
                engine: format!("{:?}", self.stable_connecting_rank),
                formula: format!("{:?}", self.delta_rank),
            });
        }
        Ok(self)
    }
}

// ---------------------------------------------------------------------------
// Cone formula

#[derive(Clone, Debug, Serialize)]
pub struct ConeCheck {
    pub apex_value: i64,
    pub predicted: [usize; 2],
    pub computed: [usize; 2],
    pub pass: bool,
}

/// `IL = (IH^{m−1}(L/S¹)/ker eub ⊕ IH^m(L/S¹)) ⊗ ℚ(u)` with `m = p(apex)`.
pub fn cone_formula(model: &Model, p: &Perversity) -> Result<[usize; 2]> {
    let cone = model.cone.as_ref().ok_or_else(|| Error::NotAConeModel(format!("model `{}` carries no cone data", model.name)))?;
    let m = p.get(&cone.apex).ok_or_else(|| Error::UnknownStratum(cone.apex.clone()))?;
    let mut out = [0usize; 2];
    if m >= 1 {
        let k = (m - 1) as usize;
        if let Some(e) = cone.link_eub.get(k) {
            out[k % 2] += e.rank();
        }
    }
    if m >= 0 {
        let k = m as usize;
        out[k % 2] += cone.link_dims.get(k).copied().unwrap_or(0);
    }
    Ok(out)
}

pub fn cone_formula_check(model: &Model, p: &Perversity, il: &LocalizedModule) -> Result<ConeCheck> {
    let predicted = cone_formula(model, p)?;
    let cone = model.cone.as_ref().ok_or_else(|| Error::NotAConeModel(format!("model `{}` carries no cone data", model.name)))?;
    let computed = [il.even_rank, il.odd_rank];
    Ok(ConeCheck { apex_value: p.get(&cone.apex).unwrap_or(0), predicted, computed, pass: predicted == computed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivariant::{default_nu, equivariant_gysin};
    use crate::fixtures::{cone2, hopf, rot};
    use proptest::prelude::*;

    fn il(model: &Model, p: &str) -> (PerverseData, Equivariant, LocalizedModule) {
        let p = Perversity::parse(p).unwrap();
        let data = PerverseData::build(model, &p).unwrap();
        let eq = Equivariant::build(model, &p, &data, default_nu(model)).unwrap();
        let l = localize(&LambdaUModule::from_equivariant(&eq)).unwrap();
        (data, eq, l)
    }

    #[test]
    fn free_actions_localize_to_zero() {
        assert_eq!(il(&hopf(), "").2.ranks(), (0, 0));
        assert_eq!(il(&rot(), "").2.ranks(), (0, 0));
    }

    #[test]
    fn cone2_localization() {
        for (p, want) in [(0, (1, 0)), (1, (1, 0)), (2, (1, 0)), (3, (0, 0)), (4, (0, 0))] {
            let m = cone2();
            let s = format!("apex={p}");
            let (data, eq, l) = il(&m, &s);
            assert_eq!(l.ranks(), want, "p = {p}");
            let c = cone_formula_check(&m, &Perversity::parse(&s).unwrap(), &l).unwrap();
            assert!(c.pass, "{c:?}");
            let eg = equivariant_gysin(&m, &data, &eq).unwrap();
            assert!(localized_gysin(&data, &l, &eg, eq.nu).unwrap().pass);
        }
    }

    #[test]
    fn hopf_delta_has_full_rank() {
        let (data, _, _) = il(&hopf(), "");
        let d = localized_delta(&data, 1);
        assert_eq!(d.shape(), (2, 2));
        assert_eq!(d.rank(), 2);
        assert_eq!(d.bareiss_rank(), 2);
    }

    #[test]
    fn not_a_cone() {
        assert!(matches!(cone_formula(&hopf(), &Perversity::default()), Err(Error::NotAConeModel(_))));
    }

    #[test]
    fn short_truncation_is_reported() {
        let (_, eq, _) = il(&cone2(), "apex=2");
        let mut m = LambdaUModule::from_equivariant(&eq);
        m.dims.truncate(4);
        m.u_maps.truncate(4);
        m.stable_from = Some(3);
        assert!(matches!(localize(&m), Err(Error::TruncationTooSmall { .. })));
    }

    #[test]
    fn poly_division() {
        let a = Poly::new(vec![q(1), q(1)]);
        let b = Poly::new(vec![q(-1), q(1)]);
        let ab = a.mul(&b);
        assert_eq!(ab.div_exact(&a), Some(b.clone()));
        assert_eq!(a.div_exact(&b), None);
    }

    proptest! {
        #[test]
        fn bareiss_agrees_with_generic_evaluation(entries in proptest::collection::vec((-3i64..=3, -3i64..=3), 12)) {
            let a = Matrix::from_i64(3, 4, &entries.iter().map(|e| e.0).collect::<Vec<_>>());
            let b = Matrix::from_i64(3, 4, &entries.iter().map(|e| e.1).collect::<Vec<_>>());
            let pm = PolyMatrix::linear(&a, &b);
            let generic = pm.eval(&q(7919)).rank().max(pm.eval(&q(-104729)).rank());
            prop_assert_eq!(pm.bareiss_rank(), generic);
        }
    }
}
