//! Comparing two models through a chain isomorphism of their ambients that
//! respects the stratifications: optimality, relatedness of the Euler
//! cocycles, and the equalities of equivariant invariants that relatedness
//! forces.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::equivariant::Equivariant;
use crate::error::{Error, Result};
use crate::localize::{localize, LambdaUModule};
use crate::model::{Model, Perversity};
use crate::perverse::PerverseData;
use crate::ratla::{axpy, fmt_rational, parse_rational, solve_preimage, sub_vec, zero_vec, Matrix, Vector};

/// `f : A₂ → A₁` per degree together with the stratum correspondence
/// `S₂ ↦ S₁`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelIso {
    pub maps: Vec<Matrix>,
    pub strata: BTreeMap<String, String>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawIso {
    maps: Vec<Vec<Vec<serde_json::Value>>>,
    #[serde(default)]
    strata: BTreeMap<String, String>,
}

impl ModelIso {
    /// Identity between a model and itself (or a model on the same ambient
    /// and strata).
    pub fn identity(m: &Model) -> Self {
        ModelIso {
            maps: m.dims.iter().map(|&n| Matrix::identity(n)).collect(),
            strata: m.strata.iter().map(|s| (s.name.clone(), s.name.clone())).collect(),
        }
    }

    /// File format: `{"maps": [[[…row…], …] per degree], "strata": {"S2": "S1"}}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawIso = serde_json::from_str(text)?;
        let mut maps = Vec::new();
        for (k, m) in raw.maps.iter().enumerate() {
            let cols = m.first().map_or(0, Vec::len);
            let mut out = Matrix::zeros(m.len(), cols);
            for (r, row) in m.iter().enumerate() {
                if row.len() != cols {
                    return Err(Error::InvalidIso(format!("degree {k}: ragged matrix")));
                }
                for (c, x) in row.iter().enumerate() {
                    out[(r, c)] = match x {
                        serde_json::Value::String(s) => parse_rational(s)?,
                        serde_json::Value::Number(n) => {
                            parse_rational(&n.to_string()).map_err(|_| Error::InvalidIso(format!("degree {k}: entry {n}")))?
                        }
                        other => return Err(Error::InvalidIso(format!("degree {k}: entry {other} is not a rational"))),
                    };
                }
            }
            maps.push(out);
        }
        Ok(ModelIso { maps, strata: raw.strata })
    }

    pub fn to_json(&self) -> String {
        let raw = RawIso {
            maps: self
                .maps
                .iter()
                .map(|m| (0..m.rows()).map(|r| m.row(r).iter().map(|x| serde_json::Value::String(fmt_rational(x))).collect()).collect())
                .collect(),
            strata: self.strata.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("iso serializes")
    }

    fn at(&self, k: i32) -> Option<&Matrix> {
        if k < 0 {
            return None;
        }
        self.maps.get(k as usize)
    }

    /// Check every invariant; [`Error::InvalidIso`] names the first failure.
    pub fn check(&self, m1: &Model, m2: &Model) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidIso(s));
        if m1.top_degree != m2.top_degree || self.maps.len() != m1.top_degree + 1 {
            return bad("one map per degree between models of the same top degree is required".into());
        }
        for k in 0..=m1.top_degree as i32 {
            let f = self.at(k).expect("length checked");
            if f.shape() != (m1.dim(k), m2.dim(k)) {
                return bad(format!("degree {k}: expected a {}×{} matrix", m1.dim(k), m2.dim(k)));
            }
            if f.inverse().is_none() {
                return bad(format!("degree {k}: not invertible"));
            }
            if k < m1.top_degree as i32 {
                let f1 = self.at(k + 1).expect("length checked");
                if f.rows() > 0 && f1.mul(&m2.d(k)) != m1.d(k).mul(f) {
                    return bad(format!("degree {k}: f∘d ≠ d∘f"));
                }
            }
        }
        let s1: Vec<&str> = m1.strata.iter().map(|s| s.name.as_str()).collect();
        let s2: Vec<&str> = m2.strata.iter().map(|s| s.name.as_str()).collect();
        if self.strata.len() != s2.len() || s2.iter().any(|s| !self.strata.contains_key(*s)) {
            return bad("the correspondence must assign every stratum of the second model".into());
        }
        let mut targets: Vec<&str> = self.strata.values().map(String::as_str).collect();
        targets.sort();
        let mut sorted1 = s1.clone();
        sorted1.sort();
        if targets != sorted1 {
            return bad("the correspondence is not a bijection onto the strata of the first model".into());
        }
        for (a, b) in &self.strata {
            let kmax = m1.filtrations[b].kmax().max(m2.filtrations[a].kmax()) + 1;
            for l in 0..=kmax {
                for k in 0..=m1.top_degree as i32 {
                    let img = m2.level(a, l, k).image_under(self.at(k).expect("length checked"));
                    if img != m1.level(b, l, k) {
                        return bad(format!("f does not carry level {l} of {a} onto level {l} of {b} in degree {k}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// A perversity of the first model read on the second.
    pub fn pull_perversity(&self, p1: &Perversity) -> Result<Perversity> {
        let mut v = BTreeMap::new();
        for (a, b) in &self.strata {
            v.insert(a.clone(), p1.get(b).ok_or_else(|| Error::UnknownStratum(b.clone()))?);
        }
        Ok(Perversity::new(v))
    }
}

/// True when every stratum keeps its kind.
pub fn is_optimal(iso: &ModelIso, m1: &Model, m2: &Model) -> Result<bool> {
    iso.check(m1, m2)?;
    for (a, b) in &iso.strata {
        if m2.stratum(a)?.kind != m1.stratum(b)?.kind {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, Serialize)]
pub struct Relatedness {
    pub related: bool,
    /// `f(ε₂) − ε₁`
    pub discrepancy: Vec<String>,
    /// `γ ∈ Ω¹_ē` with `dγ = f(ε₂) − ε₁`, when it exists.
    pub witness: Option<Vec<String>>,
}

fn fmt_vec(v: &[crate::ratla::Rational]) -> Vec<String> {
    v.iter().map(fmt_rational).collect()
}

/// Whether `f(ε₂) − ε₁ ∈ d(Ω¹_ē)` in the first model.
pub fn f_related(iso: &ModelIso, m1: &Model, m2: &Model) -> Result<Relatedness> {
    if !is_optimal(iso, m1, m2)? {
        return Err(Error::Precondition("the isomorphism is not optimal, so ē is not shared".into()));
    }
    let f2 = iso.at(2).map_or_else(|| Matrix::zeros(m1.dim(2), m2.dim(2)), Matrix::clone);
    let diff = sub_vec(&f2.apply(&m2.euler_cocycle), &m1.euler_cocycle);
    let e = m1.ebar();
    let f1 = m1.f_p(&e, 1)?;
    let omega1 = f1.intersect(&m1.f_p(&e, 2)?.preimage(&m1.d(1)))?;
    let image: Vec<Vector> = omega1.basis().iter().map(|g| m1.d(1).apply(g)).collect();
    let dmat = Matrix::from_cols(&image, m1.dim(2));
    let witness = solve_preimage(&dmat, &diff).map(|c| {
        let mut g = zero_vec(m1.dim(1));
        for (ci, b) in c.iter().zip(omega1.basis()) {
            axpy(&mut g, ci, b);
        }
        g
    });
    Ok(Relatedness { related: witness.is_some(), discrepancy: fmt_vec(&diff), witness: witness.map(|g| fmt_vec(&g)) })
}

#[derive(Clone, Debug, Serialize)]
pub struct PerversityComparison {
    pub perversity: String,
    pub dims: [Vec<usize>; 2],
    pub u_ranks: [Vec<usize>; 2],
    pub localized: [(usize, usize); 2],
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsequenceReport {
    pub nu: usize,
    pub perversities: Vec<PerversityComparison>,
    pub pass: bool,
}

impl ConsequenceReport {
    pub fn into_result(self) -> Result<Self> {
        if let Some(c) = self.perversities.iter().find(|c| !c.pass) {
            return Err(Error::TheoremViolation(format!(
                "related models disagree at {}: dims {:?} vs {:?}, u-ranks {:?} vs {:?}, IL {:?} vs {:?}",
                c.perversity, c.dims[0], c.dims[1], c.u_ranks[0], c.u_ranks[1], c.localized[0], c.localized[1]
            )));
        }
        Ok(self)
    }
}

/// For every perversity of the first model, equivariant dimensions,
/// `u`-ranks and localizations of the two models agree.
pub fn consequence_check(iso: &ModelIso, m1: &Model, m2: &Model) -> Result<ConsequenceReport> {
    if !f_related(iso, m1, m2)?.related {
        return Err(Error::Precondition("the Euler cocycles are not related by the isomorphism".into()));
    }
    let nu = m1.top_degree.max(m2.top_degree) + 6;
    let mut out = Vec::new();
    for p1 in &m1.perversities {
        let p2 = iso.pull_perversity(p1)?;
        let side = |m: &Model, p: &Perversity| -> Result<(Vec<usize>, Vec<usize>, (usize, usize))> {
            let data = PerverseData::build(m, p)?;
            let eq = Equivariant::build(m, p, &data, nu)?;
            let il = localize(&LambdaUModule::from_equivariant(&eq))?;
            Ok((eq.dims(), eq.u_ranks(), il.ranks()))
        };
        let (d1, u1, l1) = side(m1, p1)?;
        let (d2, u2, l2) = side(m2, &p2)?;
        let pass = d1 == d2 && u1 == u2 && l1 == l2;
        out.push(PerversityComparison { perversity: p1.to_string(), dims: [d1, d2], u_ranks: [u1, u2], localized: [l1, l2], pass });
    }
    let pass = out.iter().all(|c| c.pass);
    Ok(ConsequenceReport { nu, perversities: out, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cone2, hopf, hopf_scaled, noperv, rot, transport};
    use crate::model::StratumKind;
    use crate::ratla::q;

    #[test]
    fn identity_is_optimal_and_related() {
        for m in [hopf(), cone2(), noperv()] {
            let id = ModelIso::identity(&m);
            assert!(is_optimal(&id, &m, &m).unwrap());
            let r = f_related(&id, &m, &m).unwrap();
            assert!(r.related);
            assert!(r.witness.unwrap().iter().all(|x| x == "0"));
            assert!(consequence_check(&id, &m, &m).unwrap().pass);
        }
    }

    #[test]
    fn kind_change_is_not_optimal() {
        let m1 = cone2();
        let mut m2 = cone2();
        m2.strata[0].kind = StratumKind::Mobile;
        assert!(!is_optimal(&ModelIso::identity(&m1), &m1, &m2).unwrap());
        assert!(matches!(f_related(&ModelIso::identity(&m1), &m1, &m2), Err(Error::Precondition(_))));
    }

    #[test]
    fn doubled_euler_cocycle() {
        let (a, b) = (hopf(), hopf_scaled(2));
        let id = ModelIso::identity(&a);
        assert!(is_optimal(&id, &a, &b).unwrap());
        assert!(!f_related(&id, &a, &b).unwrap().related);
        assert!(matches!(consequence_check(&id, &a, &b), Err(Error::Precondition(_))));
        let mut c = cone2();
        c.euler_cocycle = vec![q(2)];
        c.euler_op[0] = Matrix::from_i64(1, 1, &[2]);
        assert!(is_optimal(&ModelIso::identity(&cone2()), &cone2(), &c).unwrap());
    }

    #[test]
    fn exact_difference_is_related() {
        let m1 = noperv();
        let mut m2 = noperv();
        m2.euler_cocycle = vec![q(0), q(0)];
        m2.euler_op[0] = Matrix::zeros(2, 1);
        let r = f_related(&ModelIso::identity(&m1), &m1, &m2).unwrap();
        assert!(r.related);
        assert_eq!(r.witness.unwrap(), vec!["-1".to_string()]);
    }

    #[test]
    fn transported_model_is_related() {
        let m1 = cone2();
        let qm = vec![Matrix::from_i64(1, 1, &[-1]), Matrix::zeros(0, 0), Matrix::from_i64(1, 1, &[3])];
        let m2 = transport(&m1, &qm).unwrap();
        let iso = ModelIso { maps: qm.iter().map(|x| x.inverse().unwrap()).collect(), strata: ModelIso::identity(&m1).strata };
        assert!(f_related(&iso, &m1, &m2).unwrap().related);
        assert!(consequence_check(&iso, &m1, &m2).unwrap().pass);
        let back = ModelIso::from_json(&iso.to_json()).unwrap();
        assert_eq!(back, iso);
    }

    #[test]
    fn hopf_and_rot_are_not_related() {
        let (a, b) = (hopf(), rot());
        assert!(!f_related(&ModelIso::identity(&a), &a, &b).unwrap().related);
    }

    #[test]
    fn broken_iso_is_rejected() {
        let m = hopf();
        let mut iso = ModelIso::identity(&m);
        iso.maps[0] = Matrix::zeros(1, 1);
        assert!(matches!(is_optimal(&iso, &m, &m), Err(Error::InvalidIso(_))));
    }
}
