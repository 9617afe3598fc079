//! The invariant suite behind `eqih selftest` and the acceptance tests:
//! nine criteria over the fixtures and a batch of seeded random models.

use serde::Serialize;

use crate::classify::{consequence_check, f_related, ModelIso};
use crate::equivariant::{default_nu, equivariant_gysin, gysin_les, Equivariant};
use crate::error::{Error, Result};
use crate::fixtures::{self, expectations, Origin};
use crate::homalg::check_exact;
use crate::localize::{cone_formula_check, localize, localized_gysin, LambdaUModule};
use crate::model::{validate, Model, Perversity};
use crate::perverse::PerverseData;
use crate::ratla::{scale_vec, unit_vec, zero_vec, Matrix, Vector};
use crate::spectral::{skjelbred, skjelbred_eligible, BasicSpectral};

pub const CRITERIA: [&str; 9] = [
    "HOPF: free action",
    "ROT: zero Euler class",
    "CONE2: cone formula",
    "basic spectral sequence",
    "long exact sequences",
    "connecting map decomposition",
    "oracle equivalence",
    "classification",
    "truncation robustness",
];

#[derive(Clone, Debug, Default, Serialize)]
pub struct Criterion {
    pub id: usize,
    pub title: String,
    pub pass: bool,
    pub checked: usize,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

impl Criterion {
    fn new(id: usize) -> Self {
        Criterion { id, title: CRITERIA[id - 1].to_string(), pass: true, ..Default::default() }
    }

    fn check(&mut self, label: impl Into<String>, ok: Result<(), String>) {
        self.checked += 1;
        if let Err(e) = ok {
            self.pass = false;
            self.failures.push(format!("{}: {e}", label.into()));
        }
    }

    fn absorb(&mut self, other: &Criterion) {
        self.checked += other.checked;
        self.pass &= other.pass;
        self.failures.extend(other.failures.iter().cloned());
    }

    pub fn line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let mut s = format!("criterion {} [{verdict}] {} ({} checks)", self.id, self.title, self.checked);
        if !self.notes.is_empty() {
            s.push_str(&format!("; {}", self.notes.join("; ")));
        }
        if let Some(f) = self.failures.first() {
            s.push_str(&format!("; first failure: {f}"));
            if self.failures.len() > 1 {
                s.push_str(&format!(" (+{} more)", self.failures.len() - 1));
            }
        }
        s
    }
}

fn eq_or<T: PartialEq + std::fmt::Debug>(got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("got {got:?}, expected {want:?}"))
    }
}

fn truth(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn expected(fixture: &str, perversity: &str, quantity: &str) -> (Vec<usize>, Origin) {
    let e = expectations();
    let x = e
        .entries
        .iter()
        .find(|x| x.fixture == fixture && x.perversity == perversity && x.quantity == quantity)
        .unwrap_or_else(|| panic!("no stored expectation for {fixture} {perversity} {quantity}"));
    (x.value.clone(), x.origin)
}

fn pad(v: &[usize], len: usize) -> Vec<usize> {
    (0..len).map(|i| v.get(i).copied().unwrap_or(0)).collect()
}

/// Everything computed for one perversity.
pub struct Run {
    pub p: Perversity,
    pub data: PerverseData,
    pub eq: Equivariant,
}

pub fn run(model: &Model, p: &Perversity) -> Result<Run> {
    let data = PerverseData::build(model, p)?;
    let eq = Equivariant::build(model, p, &data, default_nu(model))?;
    Ok(Run { p: p.clone(), data, eq })
}

/// The fixtures followed by `seeds` random models.
pub fn suite_models(seeds: u64) -> Vec<Model> {
    let mut v = fixtures::all_named();
    v.extend((0..seeds).map(|s| fixtures::random(s, 1 + (s % 3) as usize)));
    v
}

/// Criteria 4, 5, 6, 7 and 9 on one model.
#[derive(Clone, Debug, Serialize)]
pub struct ModelOutcome {
    pub model: String,
    pub criteria: Vec<Criterion>,
    pub nonzero_d3: usize,
    pub skjelbred_runs: usize,
}

pub fn check_model(model: &Model) -> ModelOutcome {
    let mut c: Vec<Criterion> = (1..=9).map(Criterion::new).collect();
    let mut nonzero_d3 = 0;
    let mut skjelbred_runs = 0;
    let name = model.name.clone();
    let v = validate(model, true);
    c[3].check(format!("{name} validate"), truth(v.pass, || format!("{:?}", v.failed())));
    let zero = model.normalize(&model.zero_perversity());
    for p in &model.perversities {
        let at = |what: &str| format!("{name} p=[{p}] {what}");
        let r = match run(model, p) {
            Ok(r) => r,
            Err(e) => {
                c[3].check(at("build"), Err(e.to_string()));
                continue;
            }
        };
        let (data, eq) = (&r.data, &r.eq);

        match gysin_les(model, data, &eq.eq1) {
            Ok(g) => {
                c[4].check(at("Gysin sequence"), truth(g.exactness.pass, || format!("{:?}", g.exactness.first_failure())));
                c[4].check(at("Gysin connecting map is eub"), truth(g.connecting_is_eub, || "differs".into()));
            }
            Err(e) => c[4].check(at("Gysin sequence"), Err(e.to_string())),
        }
        let cg = check_exact(&data.cogysin_les.sequence);
        c[4].check(at("co-Gysin sequence"), truth(cg.pass, || format!("{:?}", cg.first_failure())));

        let eg = equivariant_gysin(model, data, eq);
        match &eg {
            Ok(eg) => {
                c[4].check(at("equivariant Gysin sequence"), truth(eg.exactness.pass, || format!("{:?}", eg.exactness.first_failure())));
                c[5].check(at("decomposition"), truth(eg.decomposition_ok(), || {
                    let bad: Vec<i32> = eg.decomposition.iter().filter(|d| !d.pass).map(|d| d.degree).collect();
                    format!("degrees {bad:?}")
                }));
                c[5].check(at("u-linearity"), truth(eg.u_linear && eg.maps_commute_with_u, || "maps do not commute with u".into()));
            }
            Err(e) => c[4].check(at("equivariant Gysin sequence"), Err(e.to_string())),
        }

        match localize(&LambdaUModule::from_equivariant(eq)) {
            Ok(il) => {
                if let Ok(eg) = &eg {
                    match localized_gysin(data, &il, eg, eq.nu) {
                        Ok(lg) => c[4].check(at("localized Gysin sequence"), truth(lg.pass, || format!("{lg:?}"))),
                        Err(e) => c[4].check(at("localized Gysin sequence"), Err(e.to_string())),
                    }
                }
            }
            Err(e) => c[4].check(at("localization"), Err(e.to_string())),
        }

        match BasicSpectral::compute(model, p, data, eq, None) {
            Ok(bs) => {
                for pc in bs.properties(eq) {
                    c[3].check(at(&pc.property), truth(pc.pass, || pc.detail.clone()));
                }
                match bs.d3_check(data) {
                    Ok(cells) => {
                        for cell in &cells {
                            c[3].check(at(&format!("d3 at ({}, {})", cell.i, cell.row)), truth(cell.pass, || {
                                format!("engine {} vs formula {}", cell.engine, cell.formula)
                            }));
                            if cell.nonzero {
                                nonzero_d3 += 1;
                            }
                        }
                    }
                    Err(e) => c[3].check(at("d3"), Err(e.to_string())),
                }
                if model.normalize(p) == zero
                    && skjelbred_eligible(data) {
                        skjelbred_runs += 1;
                        match skjelbred(model, data, eq, &bs) {
                            Ok(s) => {
                                c[4].check(at("Skjelbred sequence"), truth(s.exactness.pass, || format!("{:?}", s.exactness.first_failure())));
                                for lc in &s.lemma_checks {
                                    c[3].check(at(&lc.property), truth(lc.pass, || lc.detail.clone()));
                                }
                            }
                            Err(e) => c[4].check(at("Skjelbred sequence"), Err(e.to_string())),
                        }
                    }
            }
            Err(e) => c[3].check(at("pages"), Err(e.to_string())),
        }

        match fixtures::oracle_cohomology(model, p, eq.nu) {
            Ok(o) => {
                c[6].check(at("oracle dims"), eq_or(o.dims, eq.dims()));
                c[6].check(at("oracle u-ranks"), eq_or(o.u_ranks, eq.u_ranks()));
            }
            Err(e) => c[6].check(at("oracle"), Err(e.to_string())),
        }

        match Equivariant::build(model, p, data, eq.nu + 2) {
            Ok(wide) => {
                let nu = eq.nu;
                c[8].check(at("dims at nu+2"), eq_or(wide.dims()[..=nu].to_vec(), eq.dims()));
                c[8].check(at("u-ranks at nu+2"), eq_or(wide.u_ranks()[..=nu].to_vec(), eq.u_ranks()));
                let a = localize(&LambdaUModule::from_equivariant(eq)).map(|l| l.ranks()).map_err(|e| e.to_string());
                let b = localize(&LambdaUModule::from_equivariant(&wide)).map(|l| l.ranks()).map_err(|e| e.to_string());
                c[8].check(at("IL at nu+2"), eq_or(b, a));
            }
            Err(e) => c[8].check(at("nu+2"), Err(e.to_string())),
        }
    }
    let criteria = c.into_iter().filter(|x| [4, 5, 6, 7, 9].contains(&x.id)).collect();
    ModelOutcome { model: name, criteria, nonzero_d3, skjelbred_runs }
}

/// Class in `IH_{S¹}` of `(a, 0) ⊗ 1`.
fn base_class(r: &Run, model: &Model, n: i32, a: &[crate::ratla::Rational]) -> Result<Vector> {
    let v = r
        .eq
        .eq1
        .coords(n, &crate::ratla::concat_vec(a, &zero_vec(model.dim(n - 1))))
        .ok_or_else(|| Error::Internal("form is not in the pair complex".into()))?;
    r.eq.h.class_of(n, &r.eq.uc.place(n, 0, &v)).ok_or_else(|| Error::Internal("not a cocycle".into()))
}

fn by_parity(dims: &[usize]) -> (usize, usize) {
    let even = dims.iter().step_by(2).sum();
    let odd = dims.iter().skip(1).step_by(2).sum();
    (even, odd)
}

pub fn criterion_1() -> Criterion {
    let mut c = Criterion::new(1);
    let m = fixtures::hopf();
    let (ih_x, o1) = expected("HOPF", "", "ih_total");
    let (ih_b, _) = expected("HOPF", "", "ih_base");
    let (il, _) = expected("HOPF", "", "localized");
    c.notes.push(format!("IH(X) {ih_x:?} from {o1:?}, u·[1] = −[ε]").to_lowercase());
    for p in &m.perversities {
        let r = match run(&m, p) {
            Ok(r) => r,
            Err(e) => {
                c.check("build", Err(e.to_string()));
                continue;
            }
        };
        c.check("H(K) = 0", truth(r.data.h_cogysin.dims().iter().all(|&d| d == 0), || format!("{:?}", r.data.h_cogysin.dims())));
        c.check("IH(X)", gysin_les(&m, &r.data, &r.eq.eq1).map_err(|e| e.to_string()).and_then(|g| eq_or(g.ih_x, ih_x.clone())));
        c.check("IH(B)", eq_or(r.data.h_omega.dims(), ih_b.clone()));
        c.check("IH_S1 = IH(B)", eq_or(r.eq.dims(), pad(&ih_b, r.eq.nu + 1)));
        // u on H^0 against multiplication by the Euler class, through (a, 0) ⊗ 1.
        let u_vs_e = (|| -> Result<Result<(), String>> {
            let one = r.data.omega_rep(0, &unit_vec(1, 0));
            let a0 = base_class(&r, &m, 0, &one)?;
            let prod = m.multiply(0, &one, 2, &m.euler_cocycle).ok_or_else(|| Error::Internal("no product".into()))?;
            let a2 = base_class(&r, &m, 2, &prod)?;
            let u0 = r.eq.u_maps[0].apply(&a0);
            Ok(eq_or(u0, scale_vec(&crate::ratla::q(-1), &a2)))
        })();
        c.check("u = e·", u_vs_e.unwrap_or_else(|e| Err(e.to_string())));
        c.check("IL", localize(&LambdaUModule::from_equivariant(&r.eq)).map_err(|e| e.to_string()).and_then(|l| eq_or(vec![l.even_rank, l.odd_rank], il.clone())));
    }
    c
}

pub fn criterion_2() -> Criterion {
    let mut c = Criterion::new(2);
    let m = fixtures::rot();
    let (ih_x, _) = expected("ROT", "", "ih_total");
    let (il, _) = expected("ROT", "", "localized");
    for p in &m.perversities {
        let r = match run(&m, p) {
            Ok(r) => r,
            Err(e) => {
                c.check("build", Err(e.to_string()));
                continue;
            }
        };
        let hb = r.data.h_omega.dims();
        let sum: Vec<usize> = (0..4).map(|k| hb.get(k).copied().unwrap_or(0) + if k > 0 { hb.get(k - 1).copied().unwrap_or(0) } else { 0 }).collect();
        c.check("IH(X) = IH(B) ⊕ IH(B)[−1]", eq_or(sum, ih_x.clone()));
        c.check("IH(X)", gysin_les(&m, &r.data, &r.eq.eq1).map_err(|e| e.to_string()).and_then(|g| eq_or(g.ih_x, ih_x.clone())));
        match BasicSpectral::compute(&m, p, &r.data, &r.eq, None) {
            Ok(bs) => {
                let later = bs.ss.pages[2..].iter().all(|pg| pg.d.values().all(Matrix::is_zero));
                c.check("d_r = 0 for r ≥ 2", truth(later, || "nonzero differential".into()));
                c.check("E_2 = E_∞", eq_or(bs.ss.page(2).dims_table(), bs.ss.e_inf().dims_table()));
            }
            Err(e) => c.check("pages", Err(e.to_string())),
        }
        let (ke, ko) = by_parity(&r.data.h_cogysin.dims());
        match localize(&LambdaUModule::from_equivariant(&r.eq)) {
            Ok(l) => {
                c.check("IL = H(K) ⊗ Q(u)", eq_or(l.ranks(), (ke, ko)));
                c.check("IL", eq_or(vec![l.even_rank, l.odd_rank], il.clone()));
            }
            Err(e) => c.check("IL", Err(e.to_string())),
        }
    }
    c
}

pub fn criterion_3() -> Criterion {
    let mut c = Criterion::new(3);
    let m = fixtures::cone2();
    let (ih_x, _) = expected("CONE2", "apex=2", "ih_total");
    let (il2, _) = expected("CONE2", "apex=2", "localized");
    for p in &m.perversities {
        let r = match run(&m, p) {
            Ok(r) => r,
            Err(e) => {
                c.check("build", Err(e.to_string()));
                continue;
            }
        };
        let l = match localize(&LambdaUModule::from_equivariant(&r.eq)) {
            Ok(l) => l,
            Err(e) => {
                c.check(format!("IL at {p}"), Err(e.to_string()));
                continue;
            }
        };
        if p.get("apex") == Some(2) {
            c.check("IH_2(X)", gysin_les(&m, &r.data, &r.eq.eq1).map_err(|e| e.to_string()).and_then(|g| eq_or(g.ih_x, ih_x.clone())));
            c.check("IL_2", eq_or(vec![l.even_rank, l.odd_rank], il2.clone()));
        }
        c.check(format!("cone formula at {p}"), cone_formula_check(&m, p, &l).map_err(|e| e.to_string()).and_then(|k| truth(k.pass, || format!("{k:?}"))));
    }
    c
}

pub fn criterion_8() -> Criterion {
    let mut c = Criterion::new(8);
    let hopf = fixtures::hopf();
    let id = ModelIso::identity(&hopf);
    c.check(
        "HOPF vs HOPF with 2ε",
        f_related(&id, &hopf, &fixtures::hopf_scaled(2)).map_err(|e| e.to_string()).and_then(|r| truth(!r.related, || "reported related".into())),
    );
    for (m1, qs) in transported_pairs() {
        let m2 = match fixtures::transport(&m1, &qs) {
            Ok(m) => m,
            Err(e) => {
                c.check("transport", Err(e.to_string()));
                continue;
            }
        };
        let iso = ModelIso { maps: qs.iter().map(|x| x.inverse().expect("invertible")).collect(), strata: ModelIso::identity(&m1).strata };
        let label = format!("{} transported", m1.name);
        c.check(format!("{label}: related"), f_related(&iso, &m1, &m2).map_err(|e| e.to_string()).and_then(|r| truth(r.related, || "not related".into())));
        c.check(
            format!("{label}: consequences"),
            consequence_check(&iso, &m1, &m2).and_then(|r| r.into_result()).map(|_| ()).map_err(|e| e.to_string()),
        );
    }
    let rot = fixtures::rot();
    c.check(
        "HOPF vs ROT not related",
        f_related(&ModelIso::identity(&hopf), &hopf, &rot).map_err(|e| e.to_string()).and_then(|r| truth(!r.related, || "reported related".into())),
    );
    c.check("HOPF vs ROT refused", truth(matches!(consequence_check(&ModelIso::identity(&hopf), &hopf, &rot), Err(Error::Precondition(_))), || "not refused".into()));
    let ils: Vec<Result<(usize, usize), String>> = [&hopf, &rot]
        .iter()
        .map(|m| {
            let r = run(m, &Perversity::default()).map_err(|e| e.to_string())?;
            localize(&LambdaUModule::from_equivariant(&r.eq)).map(|l| l.ranks()).map_err(|e| e.to_string())
        })
        .collect();
    c.check("HOPF and ROT both localize to zero", eq_or(ils, vec![Ok((0, 0)), Ok((0, 0))]));
    c.notes.push("localization does not see the Euler class".into());
    c
}

/// Models paired with a change of basis per degree.
fn transported_pairs() -> Vec<(Model, Vec<Matrix>)> {
    let cone = fixtures::cone2();
    let cq = vec![Matrix::from_i64(1, 1, &[-1]), Matrix::zeros(0, 0), Matrix::from_i64(1, 1, &[3])];
    let nop = fixtures::noperv();
    let nq = vec![Matrix::from_i64(1, 1, &[2]), Matrix::from_i64(1, 1, &[-1]), Matrix::from_i64(2, 2, &[1, 1, 0, 1])];
    let r = fixtures::random(11, 2);
    let rq: Vec<Matrix> = r
        .dims
        .iter()
        .map(|&n| {
            let mut m = Matrix::identity(n);
            for i in 1..n {
                m[(0, i)] = crate::ratla::q(i as i64);
            }
            m
        })
        .collect();
    vec![(cone, cq), (nop, nq), (r, rq)]
}

/// From this many random models on, at least one nonzero `d₃` is required.
pub const D3_COVERAGE_SEEDS: u64 = 20;

/// All nine criteria. `check` maps the suite models to their outcomes and
/// may run in parallel; the result is independent of its order.
pub fn run_suite(seeds: u64, check: impl FnOnce(&[Model]) -> Vec<ModelOutcome>) -> Vec<Criterion> {
    let models = suite_models(seeds);
    let outcomes = check(&models);
    let mut out = vec![criterion_1(), criterion_2(), criterion_3()];
    let mut shared: Vec<Criterion> = [4, 5, 6, 7, 9].iter().map(|&i| Criterion::new(i)).collect();
    let mut d3 = 0;
    let mut sk = 0;
    for o in &outcomes {
        for (s, x) in shared.iter_mut().zip(&o.criteria) {
            s.absorb(x);
        }
        d3 += o.nonzero_d3;
        sk += o.skjelbred_runs;
    }
    let n_random = seeds;
    shared[0].notes.push(format!("{} models ({} random), {d3} cells with nonzero d3", outcomes.len(), n_random));
    if seeds >= D3_COVERAGE_SEEDS {
        shared[0].check("d3 coverage", truth(d3 > 0, || "no random model reached a nonzero d3".into()));
    }
    shared[1].notes.push(format!("{sk} Skjelbred sequences"));
    let mut rest = shared.into_iter();
    out.extend(rest.by_ref().take(4));
    out.push(criterion_8());
    out.extend(rest);
    out
}

pub fn run_sequential(seeds: u64) -> Vec<Criterion> {
    run_suite(seeds, |ms| ms.iter().map(check_model).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_criteria_pass() {
        for c in [criterion_1(), criterion_2(), criterion_3(), criterion_8()] {
            assert!(c.pass, "{}", c.line());
        }
    }

    #[test]
    fn one_model_outcome() {
        let o = check_model(&fixtures::cone2());
        for c in &o.criteria {
            assert!(c.pass, "{}", c.line());
        }
    }

    #[test]
    fn some_random_model_has_nonzero_d3() {
        let hit = (0..D3_COVERAGE_SEEDS).find(|&s| check_model(&fixtures::random(s, 1 + (s % 3) as usize)).nonzero_d3 > 0);
        assert!(hit.is_some());
    }
}
