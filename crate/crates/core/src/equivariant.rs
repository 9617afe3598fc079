//! The invariant-forms complex of pairs `(α, β)`, the equivariant complex
//! obtained by adjoining a degree-two generator `u`, and the two Gysin
//! sequences.
//!
//! A pair `(α, β)` of total degree `k` has `α ∈ F_p^k`, `β ∈ Ω_{p−x̄}^{k−1}`
//! and `dα + (−1)^{k−1}Eβ ∈ F_p^{k+1}`; its differential is
//! `D(α, β) = (dα + (−1)^{k−1}Eβ, dβ)`. On `Eq1 ⊗ Λu` the differential is
//! `∇ = D ⊗ 1 + T ⊗ u` with `T(α, β) = (−1)^{k−1}(β, 0)`.

use crate::error::{Error, Result};
use crate::homalg::{check_exact, ChainMap, Cohomology, Complex, ExactnessReport, Les, LongExactSequence, ShortExact};
use crate::model::{Model, Perversity};
use crate::perverse::PerverseData;
use crate::ratla::{sign, unit_vec, zero_vec, Matrix, Rational, Subspace, Vector};

/// `(−1)^{|β|}` for a pair of total degree `k`. Every sign in `D`, `∇` and
/// the connecting maps goes through here.
pub fn beta_sign(k: i32) -> Rational {
    sign(k as i64 - 1)
}

/// Default truncation bound for the `u`-direction.
pub fn default_nu(model: &Model) -> usize {
    model.top_degree + 6
}

/// Ambient differential of the pair complex in degree `k`.
pub fn pair_differential(model: &Model, k: i32) -> Matrix {
    let (a0, a1) = (model.dim(k), model.dim(k - 1));
    let (b0, b1) = (model.dim(k + 1), model.dim(k));
    let mut m = Matrix::zeros(b0 + b1, a0 + a1);
    m.set_block(0, 0, &model.d(k));
    m.set_block(0, a0, &model.e(k - 1).scale(&beta_sign(k)));
    m.set_block(b0, a0, &model.d(k - 1));
    m
}

/// The pair complex `Eq1_p` in degrees `0..=N+1`.
#[derive(Clone, Debug)]
pub struct Eq1 {
    pub spaces: Vec<Subspace>,
    pub complex: Complex,
}

impl Eq1 {
    pub fn dim(&self, k: i32) -> usize {
        self.complex.dim(k)
    }

    pub fn embed(&self, k: i32, c: &[Rational]) -> Vector {
        self.spaces[k as usize].from_coords(c)
    }

    pub fn coords(&self, k: i32, v: &[Rational]) -> Option<Vector> {
        if k < 0 || k as usize >= self.spaces.len() {
            return crate::ratla::is_zero_vec(v).then(Vec::new);
        }
        self.spaces[k as usize].coords(v)
    }

    /// `T` in coordinates: `Eq1^k → Eq1^{k−1}`.
    pub fn t_matrix(&self, model: &Model, k: i32) -> Result<Matrix> {
        let rows = self.dim(k - 1);
        let cols: Vec<Vector> = (0..self.dim(k))
            .map(|i| {
                let v = self.embed(k, &unit_vec(self.dim(k), i));
                let beta = &v[model.dim(k)..];
                let mut w = zero_vec(model.dim(k - 1) + model.dim(k - 2));
                for (x, b) in w.iter_mut().zip(beta) {
                    *x = b * beta_sign(k);
                }
                self.coords(k - 1, &w).ok_or_else(|| Error::Internal(format!("T leaves the pair complex in degree {k}")))
            })
            .collect::<Result<_>>()?;
        Ok(Matrix::from_cols(&cols, rows))
    }
}

pub fn build_eq1(model: &Model, p: &Perversity, data: &PerverseData) -> Result<Eq1> {
    let n = model.top_degree as i32;
    let mut spaces = Vec::new();
    for k in 0..=n + 1 {
        let alpha = model.f_p(p, k)?;
        let beta = data.omega_minus.space(k - 1).cloned().unwrap_or_else(|| Subspace::zero(model.dim(k - 1)));
        let v = alpha.direct_sum(&beta);
        let mut m = Matrix::zeros(model.dim(k + 1), model.dim(k) + model.dim(k - 1));
        m.set_block(0, 0, &model.d(k));
        m.set_block(0, model.dim(k), &model.e(k - 1).scale(&beta_sign(k)));
        let target = model.f_p(p, k + 1)?;
        spaces.push(v.intersect(&target.preimage(&m))?);
    }
    let complex = Complex::from_subspaces(0, &spaces, |k| pair_differential(model, k))?;
    Ok(Eq1 { spaces, complex })
}

/// The Gysin short exact sequence `0 → Ω_p → Eq1_p → G_p[−1] → 0`, all on
/// degrees `0..=N+1`.
pub struct GysinSes {
    pub omega: Complex,
    pub gysin_shifted: Complex,
    /// `π(α) = (α, 0)`
    pub pi: ChainMap,
    /// `∮(α, β) = β`
    pub oint: ChainMap,
}

pub fn gysin_ses(model: &Model, data: &PerverseData, eq1: &Eq1) -> Result<GysinSes> {
    let hi = model.top_degree as i32 + 1;
    let omega = data.omega.complex.padded(0, hi)?;
    let gysin_shifted = data.gysin.complex.shift(1).padded(0, hi)?;
    let mut pi = Vec::new();
    let mut oint = Vec::new();
    for k in 0..=hi {
        let cols: Vec<Vector> = (0..omega.dim(k))
            .map(|i| {
                let a = data.omega.embed(k, &unit_vec(omega.dim(k), i));
                let v = crate::ratla::concat_vec(&a, &zero_vec(model.dim(k - 1)));
                eq1.coords(k, &v).ok_or_else(|| Error::Internal(format!("Ω_p ⊄ pair complex in degree {k}")))
            })
            .collect::<Result<_>>()?;
        pi.push(Matrix::from_cols(&cols, eq1.dim(k)));
        let cols: Vec<Vector> = (0..eq1.dim(k))
            .map(|i| {
                let v = eq1.embed(k, &unit_vec(eq1.dim(k), i));
                let beta = v[model.dim(k)..].to_vec();
                data.gysin
                    .coords(k - 1, &beta)
                    .ok_or_else(|| Error::Internal(format!("second component outside the Gysin term in degree {k}")))
            })
            .collect::<Result<_>>()?;
        oint.push(Matrix::from_cols(&cols, gysin_shifted.dim(k)));
    }
    let pi = ChainMap::new(&omega, &eq1.complex, pi)?;
    let oint = ChainMap::new(&eq1.complex, &gysin_shifted, oint)?;
    Ok(GysinSes { omega, gysin_shifted, pi, oint })
}

#[derive(Clone, Debug)]
pub struct GysinLes {
    pub les: Les,
    pub exactness: ExactnessReport,
    /// The connecting map equals the Euler map in every degree.
    pub connecting_is_eub: bool,
    pub ih_x: Vec<usize>,
}

/// The Gysin long exact sequence of one perversity.
pub fn gysin_les(model: &Model, data: &PerverseData, eq1: &Eq1) -> Result<GysinLes> {
    let s = gysin_ses(model, data, eq1)?;
    let ses = ShortExact { a: &s.omega, b: &eq1.complex, c: &s.gysin_shifted, i: &s.pi, s: &s.oint };
    let les = ses.les(["IH(B)", "IH(X)", "H(G)[-1]"], true)?;
    let exactness = check_exact(&les.sequence);
    let hi = model.top_degree as i32 + 1;
    let connecting_is_eub = (0..=hi).all(|k| les.connecting_at(k) == &data.eub_at(k - 1));
    let ih_x = les.hb.dims();
    Ok(GysinLes { les, exactness, connecting_is_eub, ih_x })
}

/// `X ⊗ Λu` truncated to total degrees `0..=top`; block `(j, m)` of degree
/// `n = m + 2j` holds `X^m ⊗ u^j`.
#[derive(Clone, Debug)]
pub struct UComplex {
    pub top: i32,
    /// Per total degree: `(j, m, offset, dim)`.
    pub layout: Vec<Vec<(usize, i32, usize, usize)>>,
    pub complex: Complex,
}

impl UComplex {
    /// `t(m)` is the `u`-coefficient `X^m → X^{m−1}` of the differential.
    pub fn build(base: &Complex, t: Option<&dyn Fn(i32) -> Result<Matrix>>, top: i32) -> Result<Self> {
        let layout: Vec<Vec<(usize, i32, usize, usize)>> = (0..=top)
            .map(|n| {
                let mut off = 0;
                let mut blocks = Vec::new();
                let mut j = 0usize;
                while 2 * j as i32 <= n {
                    let m = n - 2 * j as i32;
                    if m >= base.lo() && m <= base.hi() {
                        let dim = base.dim(m);
                        blocks.push((j, m, off, dim));
                        off += dim;
                    }
                    j += 1;
                }
                blocks
            })
            .collect();
        let total = |n: i32| -> usize {
            if n < 0 || n > top {
                0
            } else {
                layout[n as usize].iter().map(|b| b.3).sum()
            }
        };
        let mut ds = Vec::new();
        for n in 0..=top {
            let rows = if n < top { total(n + 1) } else { 0 };
            let mut d = Matrix::zeros(rows, total(n));
            if n < top {
                for &(j, m, off, dim) in &layout[n as usize] {
                    if dim == 0 {
                        continue;
                    }
                    if let Some(&(_, _, toff, _)) = layout[(n + 1) as usize].iter().find(|b| b.0 == j) {
                        d.set_block(toff, off, &base.d(m));
                    }
                    if let Some(t) = t {
                        if let Some(&(_, _, toff, tdim)) = layout[(n + 1) as usize].iter().find(|b| b.0 == j + 1) {
                            let tm = t(m)?;
                            if tm.shape() != (tdim, dim) {
                                return Err(Error::Internal(format!("u-coefficient has the wrong shape at {m}")));
                            }
                            d.set_block(toff, off, &tm);
                        }
                    }
                }
            }
            ds.push(d);
        }
        let complex = Complex::new(0, (0..=top).map(total).collect(), ds)?;
        Ok(UComplex { top, layout, complex })
    }

    pub fn block(&self, n: i32, j: usize) -> Option<(i32, usize, usize)> {
        if n < 0 || n > self.top {
            return None;
        }
        self.layout[n as usize].iter().find(|b| b.0 == j).map(|&(_, m, off, dim)| (m, off, dim))
    }

    pub fn place(&self, n: i32, j: usize, v: &[Rational]) -> Vector {
        let mut out = zero_vec(self.complex.dim(n));
        if let Some((_, off, dim)) = self.block(n, j) {
            assert_eq!(dim, v.len());
            out[off..off + dim].clone_from_slice(v);
        }
        out
    }

    pub fn extract(&self, n: i32, j: usize, v: &[Rational]) -> Vector {
        match self.block(n, j) {
            Some((_, off, dim)) => v[off..off + dim].to_vec(),
            None => Vec::new(),
        }
    }

    /// Multiplication by `u` on chains: `C^n → C^{n+2}`.
    pub fn u_chain(&self, n: i32) -> Matrix {
        let mut m = Matrix::zeros(self.complex.dim(n + 2), self.complex.dim(n));
        if n + 2 > self.top {
            return m;
        }
        for &(j, _, off, dim) in &self.layout[n as usize] {
            if let Some((_, toff, tdim)) = self.block(n + 2, j + 1) {
                debug_assert_eq!(dim, tdim);
                m.set_block(toff, off, &Matrix::identity(dim));
            }
        }
        m
    }

    /// `f ⊗ 1` for a chain map between the bases.
    pub fn tensor_map(&self, target: &UComplex, f: &ChainMap) -> Result<ChainMap> {
        let mut maps = Vec::new();
        for n in 0..=self.top {
            let mut m = Matrix::zeros(target.complex.dim(n), self.complex.dim(n));
            for &(j, deg, off, dim) in &self.layout[n as usize] {
                if let Some((_, toff, _)) = target.block(n, j) {
                    if dim > 0 {
                        let fm = f.at(deg).ok_or_else(|| Error::Internal(format!("chain map missing degree {deg}")))?;
                        m.set_block(toff, off, fm);
                    }
                }
            }
            maps.push(m);
        }
        ChainMap::new(&self.complex, &target.complex, maps)
    }

    /// Cohomology rebased so that `H^n` has the basis `{h ⊗ u^j}` coming from
    /// a basis of the cohomology of the base, for `n ≤ through`.
    pub fn product_cohomology(&self, base_h: &Cohomology, through: i32) -> Result<Cohomology> {
        let mut h = self.complex.cohomology()?;
        for n in 0..=through.min(self.top) {
            let mut reps = Vec::new();
            for &(j, m, _, _) in &self.layout[n as usize] {
                for i in 0..base_h.dim(m) {
                    let z = base_h.lift(m, &unit_vec(base_h.dim(m), i));
                    reps.push(self.place(n, j, &z));
                }
            }
            h = h.rebased(n, reps)?;
        }
        Ok(h)
    }
}

/// Equivariant cohomology of one perversity, truncated at `nu`.
#[derive(Clone, Debug)]
pub struct Equivariant {
    pub nu: usize,
    pub eq1: Eq1,
    pub uc: UComplex,
    pub h: Cohomology,
    /// `u_maps[n] : H^n → H^{n+2}` for `n = 0..=nu`.
    pub u_maps: Vec<Matrix>,
}

impl Equivariant {
    pub fn build(model: &Model, p: &Perversity, data: &PerverseData, nu: usize) -> Result<Self> {
        let eq1 = build_eq1(model, p, data)?;
        Self::from_eq1(model, eq1, nu)
    }

    pub fn from_eq1(model: &Model, eq1: Eq1, nu: usize) -> Result<Self> {
        let top = nu as i32 + 3;
        let t = |m: i32| eq1.t_matrix(model, m);
        let uc = UComplex::build(&eq1.complex, Some(&t), top)?;
        let h = uc.complex.cohomology()?;
        let u_maps = (0..=nu as i32)
            .map(|n| {
                let u = uc.u_chain(n);
                let cols: Vec<Vector> = (0..h.dim(n))
                    .map(|i| {
                        let z = h.lift(n, &unit_vec(h.dim(n), i));
                        h.class_of(n + 2, &u.apply(&z)).ok_or_else(|| Error::Internal("u does not preserve cocycles".into()))
                    })
                    .collect::<Result<_>>()?;
                Ok(Matrix::from_cols(&cols, h.dim(n + 2)))
            })
            .collect::<Result<_>>()?;
        Ok(Equivariant { nu, eq1, uc, h, u_maps })
    }

    /// `dim H^n` for `n = 0..=nu`.
    pub fn dims(&self) -> Vec<usize> {
        (0..=self.nu as i32).map(|n| self.h.dim(n)).collect()
    }

    pub fn u_ranks(&self) -> Vec<usize> {
        self.u_maps.iter().map(Matrix::rank).collect()
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct DecompositionCell {
    pub degree: i32,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct EquivariantGysin {
    pub les: Les,
    pub exactness: ExactnessReport,
    pub decomposition: Vec<DecompositionCell>,
    pub u_linear: bool,
    pub maps_commute_with_u: bool,
}

impl EquivariantGysin {
    pub fn decomposition_ok(&self) -> bool {
        self.decomposition.iter().all(|c| c.pass)
    }

    pub fn into_result(self) -> Result<Self> {
        if let Some(c) = self.decomposition.iter().find(|c| !c.pass) {
            return Err(Error::DecompositionMismatch { degree: c.degree });
        }
        Ok(self)
    }
}

/// The equivariant Gysin sequence from
/// `0 → Ω_p⊗Λu → Eq1_p⊗Λu → G_p[−1]⊗Λu → 0`, with the entrywise check
/// `δ = eub ⊗ 1 + I ⊗ u`, `I = (−1)^{|β|} ι`.
pub fn equivariant_gysin(model: &Model, data: &PerverseData, eq: &Equivariant) -> Result<EquivariantGysin> {
    let s = gysin_ses(model, data, &eq.eq1)?;
    let top = eq.uc.top;
    let valid = eq.nu as i32 + 2;
    let a = UComplex::build(&s.omega, None, top)?;
    let c = UComplex::build(&s.gysin_shifted, None, top)?;
    let pi = a.tensor_map(&eq.uc, &s.pi)?;
    let oint = eq.uc.tensor_map(&c, &s.oint)?;

    let ha = a.product_cohomology(&s.omega.cohomology()?, valid)?;
    let hc = c.product_cohomology(&s.gysin_shifted.cohomology()?, valid)?;
    let ses = ShortExact { a: &a.complex, b: &eq.uc.complex, c: &c.complex, i: &pi, s: &oint };
    let les = ses.les_with(ha, eq.h.clone(), hc, ["IH(B)⊗Λu", "IH_S1(X)", "H(G)[-1]⊗Λu"], false)?;

    let mut nodes = Vec::new();
    let mut maps = Vec::new();
    for n in 0..valid {
        for (t, lbl) in les.sequence.nodes[3 * n as usize..3 * n as usize + 3].iter().enumerate() {
            nodes.push(lbl.clone());
            if t < 2 {
                maps.push(if t == 0 { les.i_star_at(n).clone() } else { les.s_star_at(n).clone() });
            }
        }
        if n + 1 < valid {
            maps.push(les.connecting_at(n).clone());
        }
    }
    let truncated = LongExactSequence::new(nodes, maps, true, false)?;
    let exactness = check_exact(&truncated);

    let mut decomposition = Vec::new();
    for n in 0..valid {
        let formula = delta_formula(data, &a, &c, n)?;
        decomposition.push(DecompositionCell { degree: n, pass: &formula == les.connecting_at(n) });
    }

    // u-linearity of δ on classes, and of π', ∮' on chains.
    let u_class = |uc: &UComplex, h: &Cohomology, n: i32| -> Result<Matrix> {
        let u = uc.u_chain(n);
        let cols: Vec<Vector> = (0..h.dim(n))
            .map(|i| {
                let z = h.lift(n, &unit_vec(h.dim(n), i));
                h.class_of(n + 2, &u.apply(&z)).ok_or_else(|| Error::Internal("u does not preserve cocycles".into()))
            })
            .collect::<Result<_>>()?;
        Ok(Matrix::from_cols(&cols, h.dim(n + 2)))
    };
    let mut u_linear = true;
    for n in 0..valid - 3 {
        let lhs = les.connecting_at(n + 2).mul(&u_class(&c, &les.hc, n)?);
        let rhs = u_class(&a, &les.ha, n + 1)?.mul(les.connecting_at(n));
        u_linear &= lhs == rhs;
    }
    let mut maps_commute_with_u = true;
    for n in 0..top - 1 {
        let (p0, p2) = (pi.at(n).unwrap(), pi.at(n + 2).unwrap());
        maps_commute_with_u &= eq.uc.u_chain(n).mul(p0) == p2.mul(&a.u_chain(n));
        let (o0, o2) = (oint.at(n).unwrap(), oint.at(n + 2).unwrap());
        maps_commute_with_u &= c.u_chain(n).mul(o0) == o2.mul(&eq.uc.u_chain(n));
    }

    Ok(EquivariantGysin { les, exactness, decomposition, u_linear, maps_commute_with_u })
}

/// The matrix of `eub ⊗ 1 + I ⊗ u : H^n(G[−1]⊗Λu) → H^{n+1}(Ω⊗Λu)` in the
/// product bases.
fn delta_formula(data: &PerverseData, a: &UComplex, c: &UComplex, n: i32) -> Result<Matrix> {
    let hdim_a = |m: i32| data.h_omega.dim(m);
    let rows: usize = a.layout.get((n + 1) as usize).map_or(0, |bl| bl.iter().map(|b| hdim_a(b.1)).sum());
    let row_off = |j: usize| -> Option<usize> {
        let mut off = 0;
        for &(jj, m, _, _) in a.layout.get((n + 1) as usize)? {
            if jj == j {
                return Some(off);
            }
            off += hdim_a(m);
        }
        None
    };
    let mut cols_total = 0;
    for &(_, m, _, _) in &c.layout[n as usize] {
        cols_total += data.h_gysin.dim(m - 1);
    }
    let mut out = Matrix::zeros(rows, cols_total);
    let mut col = 0;
    for &(j, m, _, _) in &c.layout[n as usize] {
        let k = m - 1; // G[−1]^m = G^{m−1}
        let g = data.h_gysin.dim(k);
        if g == 0 {
            continue;
        }
        if let Some(r) = row_off(j) {
            out.set_block(r, col, &data.eub_at(k));
        }
        if let Some(r) = row_off(j + 1) {
            out.set_block(r, col, &data.incl_star(k).scale(&sign(k as i64)));
        }
        col += g;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cone2, hopf, rot};

    fn eq(model: &Model, p: &str) -> (PerverseData, Equivariant) {
        let p = Perversity::parse(p).unwrap();
        let data = PerverseData::build(model, &p).unwrap();
        let e = Equivariant::build(model, &p, &data, default_nu(model)).unwrap();
        (data, e)
    }

    #[test]
    fn pair_complex_dims() {
        let m = hopf();
        let (data, e) = eq(&m, "");
        assert_eq!((0..=3).map(|k| e.eq1.dim(k)).collect::<Vec<_>>(), vec![1, 1, 1, 1]);
        let g = gysin_les(&m, &data, &e.eq1).unwrap();
        assert_eq!(g.ih_x, vec![1, 0, 0, 1]);
        assert!(g.exactness.pass && g.connecting_is_eub);

        let m = rot();
        let (data, e) = eq(&m, "");
        assert_eq!(gysin_les(&m, &data, &e.eq1).unwrap().ih_x, vec![1, 1, 1, 1]);

        let m = cone2();
        let (data, e) = eq(&m, "apex=2");
        assert_eq!(gysin_les(&m, &data, &e.eq1).unwrap().ih_x, vec![1, 0, 0, 0]);
    }

    #[test]
    fn equivariant_dims_and_u_action() {
        let (_, e) = eq(&hopf(), "");
        assert_eq!(&e.dims()[..6], &[1, 0, 1, 0, 0, 0]);
        assert_eq!(e.u_maps[0].rank(), 1);

        let (_, e) = eq(&rot(), "");
        assert_eq!(&e.dims()[..6], &[1, 0, 1, 0, 0, 0]);
        assert_eq!(e.u_maps[0].rank(), 0);

        let (_, e) = eq(&cone2(), "apex=2");
        assert_eq!(&e.dims()[..7], &[1, 0, 1, 0, 1, 0, 1]);
        assert_eq!(e.u_maps[4].rank(), 1);
    }

    #[test]
    fn equivariant_gysin_decomposes() {
        for (m, p) in [(hopf(), ""), (rot(), ""), (cone2(), "apex=2"), (cone2(), "apex=1")] {
            let (data, e) = eq(&m, p);
            let g = equivariant_gysin(&m, &data, &e).unwrap();
            assert!(g.exactness.pass, "{} {p}", m.name);
            assert!(g.decomposition_ok(), "{} {p}", m.name);
            assert!(g.u_linear && g.maps_commute_with_u);
        }
    }

    #[test]
    fn nabla_squares_to_zero_and_truncation_is_stable() {
        let m = cone2();
        let (_, e) = eq(&m, "apex=2");
        let nu = e.nu;
        let p = Perversity::parse("apex=2").unwrap();
        let data = PerverseData::build(&m, &p).unwrap();
        let e2 = Equivariant::build(&m, &p, &data, nu + 2).unwrap();
        assert_eq!(e.dims(), e2.dims()[..=nu]);
    }
}
