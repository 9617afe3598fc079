//! Perverse complexes of the orbit-space model.
//!
//! * `Ω_p^k = {ω ∈ F_p^k : dω ∈ F_p^{k+1}}`
//! * `G_p^k = {β ∈ Ω_{p−x̄}^k : Eβ ∈ F_p^{k+2} + d F_p^{k+1}}` (the Gysin term,
//!   with its own grading)
//! * `K_p = Ω_p / G_p` (the co-Gysin complex)
//!
//! together with the Euler map `eub : H^k(G_p) → H^{k+2}(Ω_p)` and the
//! co-Gysin long exact sequence.

use crate::error::{Error, Result};
use crate::homalg::{ChainMap, Cohomology, Complex, Les, ShortExact};
use crate::model::{Model, Perversity};
use crate::ratla::{sign, scale_vec, solve_preimage, sub_vec, unit_vec, Matrix, QuotientSpace, Subspace, Vector};

/// A subcomplex of the ambient model, one subspace per degree `0..=N`,
/// together with the restricted differential in canonical coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubComplex {
    pub spaces: Vec<Subspace>,
    pub complex: Complex,
}

impl SubComplex {
    pub fn new(model: &Model, spaces: Vec<Subspace>) -> Result<Self> {
        let complex = Complex::from_subspaces(0, &spaces, |k| model.d(k))?;
        Ok(SubComplex { spaces, complex })
    }

    pub fn space(&self, k: i32) -> Option<&Subspace> {
        (k >= 0).then(|| self.spaces.get(k as usize)).flatten()
    }

    pub fn dim(&self, k: i32) -> usize {
        self.space(k).map_or(0, Subspace::dim)
    }

    /// Ambient vector with the given coordinates.
    pub fn embed(&self, k: i32, c: &[crate::ratla::Rational]) -> Vector {
        self.space(k).map_or_else(Vec::new, |s| s.from_coords(c))
    }

    pub fn coords(&self, k: i32, v: &[crate::ratla::Rational]) -> Option<Vector> {
        match self.space(k) {
            Some(s) => s.coords(v),
            None => crate::ratla::is_zero_vec(v).then(Vec::new),
        }
    }

    /// Inclusion `self ⊆ other` as a chain map.
    pub fn inclusion_into(&self, other: &SubComplex) -> Result<ChainMap> {
        let mut maps = Vec::new();
        for k in self.complex.degrees() {
            let cols: Vec<Vector> = (0..self.dim(k))
                .map(|i| {
                    let v = self.embed(k, &unit_vec(self.dim(k), i));
                    other.coords(k, &v).ok_or_else(|| Error::Internal(format!("not a subcomplex in degree {k}")))
                })
                .collect::<Result<_>>()?;
            maps.push(Matrix::from_cols(&cols, other.dim(k)));
        }
        ChainMap::new(&self.complex, &other.complex, maps)
    }

    pub fn contains(&self, other: &SubComplex) -> bool {
        self.spaces.iter().zip(&other.spaces).all(|(a, b)| a.contains_subspace(b))
    }
}

pub fn omega_spaces(model: &Model, p: &Perversity) -> Result<Vec<Subspace>> {
    let n = model.top_degree as i32;
    (0..=n)
        .map(|k| {
            let f = model.f_p(p, k)?;
            let next = model.f_p(p, k + 1)?;
            f.intersect(&next.preimage(&model.d(k)))
        })
        .collect()
}

pub fn build_omega(model: &Model, p: &Perversity) -> Result<SubComplex> {
    SubComplex::new(model, omega_spaces(model, p)?)
}

/// Columns spanning `F_p^{k+2} + d F_p^{k+1}`, split so a solution can be
/// read back as a witness `(f, g)` with `Eβ = f + dg`.
fn witness_system(model: &Model, p: &Perversity, k: i32) -> Result<(Matrix, Vec<Vector>, Vec<Vector>)> {
    let f2 = model.f_p(p, k + 2)?;
    let f1 = model.f_p(p, k + 1)?;
    let d = model.d(k + 1);
    let mut cols: Vec<Vector> = f2.basis().to_vec();
    cols.extend(f1.basis().iter().map(|g| d.apply(g)));
    Ok((Matrix::from_cols(&cols, model.dim(k + 2)), f2.basis().to_vec(), f1.basis().to_vec()))
}

/// A witness for `β ∈ G_p^k`: `(f, g)` with `f ∈ F_p^{k+2}`, `g ∈ F_p^{k+1}`
/// and `Eβ = f + dg`.
pub fn euler_witness(model: &Model, p: &Perversity, k: i32, beta: &[crate::ratla::Rational]) -> Result<(Vector, Vector)> {
    let (m, fb, gb) = witness_system(model, p, k)?;
    let target = model.e(k).apply(beta);
    let c = solve_preimage(&m, &target).ok_or(Error::WitnessNotFound { degree: k })?;
    let mut g = crate::ratla::zero_vec(model.dim(k + 1));
    for (ci, b) in c[fb.len()..].iter().zip(&gb) {
        crate::ratla::axpy(&mut g, ci, b);
    }
    let f = sub_vec(&target, &model.d(k + 1).apply(&g));
    Ok((f, g))
}

pub fn gysin_spaces(model: &Model, p: &Perversity, omega_minus: &[Subspace]) -> Result<Vec<Subspace>> {
    let n = model.top_degree as i32;
    (0..=n)
        .map(|k| {
            let (m, _, _) = witness_system(model, p, k)?;
            let allowed = m.image();
            omega_minus[k as usize].intersect(&allowed.preimage(&model.e(k)))
        })
        .collect()
}

/// All complexes and maps attached to one perversity.
#[derive(Clone, Debug)]
pub struct PerverseData {
    pub p: Perversity,
    pub p_minus: Perversity,
    pub omega: SubComplex,
    pub omega_minus: SubComplex,
    pub gysin: SubComplex,
    /// `K_p` in quotient coordinates of `Ω_p`.
    pub cogysin: Complex,
    /// `P : Ω_p → K_p`
    pub proj: ChainMap,
    pub k_quot: Vec<QuotientSpace>,
    /// `I : G_p → Ω_p` (plain inclusion)
    pub incl: ChainMap,
    pub h_omega: Cohomology,
    pub h_gysin: Cohomology,
    pub h_cogysin: Cohomology,
    /// `eub[k] : H^k(G_p) → H^{k+2}(Ω_p)` for `k = 0..=N`.
    pub eub: Vec<Matrix>,
    /// `0 → G_p → Ω_p → K_p → 0`
    pub cogysin_les: Les,
}

impl PerverseData {
    pub fn build(model: &Model, p: &Perversity) -> Result<Self> {
        model.check_perversity(p)?;
        let p_minus = model.minus_xbar(p)?;
        let omega = build_omega(model, p)?;
        let omega_minus = build_omega(model, &p_minus)?;
        let gysin = SubComplex::new(model, gysin_spaces(model, p, &omega_minus.spaces)?)?;
        if !omega.contains(&gysin) {
            return Err(Error::Internal("Gysin term is not contained in Ω_p".into()));
        }
        let incl = gysin.inclusion_into(&omega)?;
        let sub: Vec<Subspace> = omega
            .complex
            .degrees()
            .map(|k| {
                let m = incl.at(k).expect("inclusion covers every degree");
                m.image()
            })
            .collect();
        let (cogysin, proj, k_quot) = omega.complex.quotient(&sub)?;
        let h_omega = omega.complex.cohomology()?;
        let h_gysin = gysin.complex.cohomology()?;
        let h_cogysin = cogysin.cohomology()?;
        let eub = euler_map(model, p, &gysin, &omega, &h_gysin, &h_omega)?;
        let ses = ShortExact { a: &gysin.complex, b: &omega.complex, c: &cogysin, i: &incl, s: &proj };
        let cogysin_les = ses.les_with(h_gysin.clone(), h_omega.clone(), h_cogysin.clone(), ["H(G)", "IH(B)", "H(K)"], true)?;
        Ok(PerverseData {
            p: p.clone(),
            p_minus,
            omega,
            omega_minus,
            gysin,
            cogysin,
            proj,
            k_quot,
            incl,
            h_omega,
            h_gysin,
            h_cogysin,
            eub,
            cogysin_les,
        })
    }

    pub fn top(&self) -> i32 {
        self.omega.complex.hi()
    }

    pub fn eub_at(&self, k: i32) -> Matrix {
        if k >= 0 && (k as usize) < self.eub.len() {
            self.eub[k as usize].clone()
        } else {
            Matrix::zeros(self.h_omega.dim(k + 2), self.h_gysin.dim(k))
        }
    }

    /// `I_* : H^k(G) → H^k(Ω)`
    pub fn incl_star(&self, k: i32) -> Matrix {
        if k >= 0 && k <= self.top() {
            self.cogysin_les.i_star_at(k).clone()
        } else {
            Matrix::zeros(self.h_omega.dim(k), self.h_gysin.dim(k))
        }
    }

    /// `P_* : H^k(Ω) → H^k(K)`
    pub fn proj_star(&self, k: i32) -> Matrix {
        if k >= 0 && k <= self.top() {
            self.cogysin_les.s_star_at(k).clone()
        } else {
            Matrix::zeros(self.h_cogysin.dim(k), self.h_omega.dim(k))
        }
    }

    /// `∂ : H^k(K) → H^{k+1}(G)`
    pub fn partial(&self, k: i32) -> Matrix {
        if k >= 0 && k <= self.top() {
            self.cogysin_les.connecting_at(k).clone()
        } else {
            Matrix::zeros(self.h_gysin.dim(k + 1), self.h_cogysin.dim(k))
        }
    }

    /// Ambient lift of a cohomology class of `G_p`.
    pub fn gysin_rep(&self, k: i32, c: &[crate::ratla::Rational]) -> Vector {
        self.gysin.embed(k, &self.h_gysin.lift(k, c))
    }

    pub fn omega_rep(&self, k: i32, c: &[crate::ratla::Rational]) -> Vector {
        self.omega.embed(k, &self.h_omega.lift(k, c))
    }

    /// Class in `H(Ω_p)` of an ambient cocycle lying in `Ω_p`.
    pub fn omega_class(&self, k: i32, v: &[crate::ratla::Rational]) -> Option<Vector> {
        let c = self.omega.coords(k, v)?;
        self.h_omega.class_of(k, &c)
    }

    /// Ambient lift of a class of `H(K_p)`: a form `α ∈ Ω_p` with `dα ∈ G_p`.
    pub fn cogysin_rep(&self, k: i32, c: &[crate::ratla::Rational]) -> Vector {
        let qc = self.h_cogysin.lift(k, c);
        if qc.is_empty() {
            return crate::ratla::zero_vec(self.omega.space(k).map_or(0, |s| s.ambient_dim()));
        }
        let omega_coords = self.k_quot[k as usize].lift(&qc);
        self.omega.embed(k, &omega_coords)
    }

    /// Class in `H(K_p)` of an ambient form in `Ω_p` whose image in `K_p` is
    /// a cocycle.
    pub fn cogysin_class(&self, k: i32, v: &[crate::ratla::Rational]) -> Option<Vector> {
        let c = self.omega.coords(k, v)?;
        let q = self.k_quot.get(k as usize)?.project(&c);
        self.h_cogysin.class_of(k, &q)
    }
}

/// `eub[β] = (−1)^{|β|}[Eβ − dg] = (−1)^{|β|}[f]` using a witness. The form
/// `f` is a cocycle of `Ω_p` because `df = dEβ = E dβ = 0`.
pub fn euler_map(
    model: &Model,
    p: &Perversity,
    gysin: &SubComplex,
    omega: &SubComplex,
    h_gysin: &Cohomology,
    h_omega: &Cohomology,
) -> Result<Vec<Matrix>> {
    let n = model.top_degree as i32;
    let mut out = Vec::new();
    for k in 0..=n {
        let cols: Vec<Vector> = (0..h_gysin.dim(k))
            .map(|i| {
                let beta = gysin.embed(k, &h_gysin.lift(k, &unit_vec(h_gysin.dim(k), i)));
                eub_of_cocycle(model, p, k, &beta, omega, h_omega, None)
            })
            .collect::<Result<_>>()?;
        out.push(Matrix::from_cols(&cols, h_omega.dim(k + 2)));
    }
    Ok(out)
}

/// Euler map on a single `G_p`-cocycle; `witness_shift` adds `h` to the
/// witness `g` (it must satisfy `dh ∈ F_p`) to exercise independence of the
/// witness.
pub fn eub_of_cocycle(
    model: &Model,
    p: &Perversity,
    k: i32,
    beta: &[crate::ratla::Rational],
    omega: &SubComplex,
    h_omega: &Cohomology,
    witness_shift: Option<&[crate::ratla::Rational]>,
) -> Result<Vector> {
    let (mut f, g) = euler_witness(model, p, k, beta)?;
    if let Some(h) = witness_shift {
        let g2 = crate::ratla::add_vec(&g, h);
        f = sub_vec(&model.e(k).apply(beta), &model.d(k + 1).apply(&g2));
    }
    let f = scale_vec(&sign(k as i64), &f);
    let c = omega.coords(k + 2, &f).ok_or_else(|| Error::PropertyViolation {
        location: format!("Euler map, degree {k}"),
        detail: "witness does not land in Ω_p".into(),
    })?;
    h_omega.class_of(k + 2, &c).ok_or_else(|| Error::PropertyViolation {
        location: format!("Euler map, degree {k}"),
        detail: "witness is not a cocycle".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cone2, hopf, noperv, rot};
    use crate::ratla::{ivec, q};

    fn apex(v: i64) -> Perversity {
        Perversity::parse(&format!("apex={v}")).unwrap()
    }

    #[test]
    fn omega_on_stratum_free_model_is_everything() {
        let m = hopf();
        let o = build_omega(&m, &Perversity::default()).unwrap();
        assert!(o.spaces.iter().all(Subspace::is_full));
    }

    #[test]
    fn cone2_omega_dims() {
        let m = cone2();
        assert_eq!(build_omega(&m, &apex(0)).unwrap().spaces.iter().map(Subspace::dim).collect::<Vec<_>>(), vec![1, 0, 0]);
        assert_eq!(build_omega(&m, &apex(2)).unwrap().spaces.iter().map(Subspace::dim).collect::<Vec<_>>(), vec![1, 0, 1]);
        assert!(build_omega(&m, &apex(-3)).unwrap().complex.is_zero());
    }

    #[test]
    fn gysin_term_examples() {
        let free = PerverseData::build(&hopf(), &Perversity::default()).unwrap();
        assert!(free.gysin.spaces.iter().all(Subspace::is_full));
        assert_eq!(free.h_cogysin.dims(), vec![0, 0, 0]);

        let zero_e = PerverseData::build(&rot(), &Perversity::default()).unwrap();
        assert_eq!(zero_e.gysin.spaces, zero_e.omega_minus.spaces);
        assert!(zero_e.eub.iter().all(Matrix::is_zero));

        let c = PerverseData::build(&cone2(), &apex(2)).unwrap();
        assert_eq!(c.gysin.spaces.iter().map(Subspace::dim).collect::<Vec<_>>(), vec![1, 0, 0]);
        assert_eq!(c.h_cogysin.dims(), vec![0, 0, 1]);
    }

    #[test]
    fn euler_map_examples() {
        let h = PerverseData::build(&hopf(), &Perversity::default()).unwrap();
        assert_eq!(h.eub[0], Matrix::identity(1));
        let c = PerverseData::build(&cone2(), &apex(2)).unwrap();
        assert_eq!(c.eub[0], Matrix::identity(1));
    }

    #[test]
    fn euler_map_ignores_witness_choice() {
        let m = noperv();
        let p = apex(1);
        let data = PerverseData::build(&m, &p).unwrap();
        let beta = data.gysin_rep(0, &[q(1)]);
        let plain = eub_of_cocycle(&m, &p, 0, &beta, &data.omega, &data.h_omega, None).unwrap();
        // h = w lies in F_1 with dw = ε ∈ F_1, so it is a legal shift
        let shifted = eub_of_cocycle(&m, &p, 0, &beta, &data.omega, &data.h_omega, Some(&ivec(&[1]))).unwrap();
        assert_eq!(plain, shifted);
    }

    #[test]
    fn no_perverse_strata_means_gysin_is_omega_minus() {
        let m = noperv();
        assert!(m.no_perverse_strata());
        for v in -1..=3 {
            let d = PerverseData::build(&m, &apex(v)).unwrap();
            assert_eq!(d.gysin.spaces, d.omega_minus.spaces, "apex={v}");
        }
    }

    #[test]
    fn unknown_stratum_is_rejected() {
        let r = PerverseData::build(&cone2(), &Perversity::parse("nowhere=1").unwrap());
        assert!(matches!(r, Err(Error::UnknownStratum(_))));
    }
}
