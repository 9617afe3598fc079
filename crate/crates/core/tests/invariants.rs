use eqih::equivariant::{self, default_nu, Equivariant};
use eqih::fixtures;
use eqih::localize::{self, LambdaUModule};
use eqih::model::{validate, Model};
use eqih::perverse::PerverseData;
use eqih::ratla::Matrix;
use eqih::spectral::BasicSpectral;
use proptest::prelude::*;

fn model_strategy() -> impl Strategy<Value = Model> {
    (0u64..10_000, 1usize..=3).prop_map(|(seed, size)| fixtures::random(seed, size))
}

fn unimodular(n: usize, shift: i64) -> Matrix {
    let mut m = Matrix::identity(n);
    for i in 0..n {
        for j in i + 1..n {
            m[(i, j)] = eqih::ratla::q((i as i64 + 2 * j as i64 + shift) % 3 - 1);
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn random_models_are_valid(m in model_strategy()) {
        let report = validate(&m, true);
        prop_assert!(report.pass, "{:?}", report.failed());
    }

    #[test]
    fn engine_matches_oracle(m in model_strategy()) {
        let nu = default_nu(&m);
        for p in &m.perversities {
            let p = m.normalize(p);
            let data = PerverseData::build(&m, &p).unwrap();
            let eq = Equivariant::build(&m, &p, &data, nu).unwrap();
            let oracle = fixtures::oracle_cohomology(&m, &p, nu).unwrap();
            prop_assert_eq!(&oracle.dims, &eq.dims());
            prop_assert_eq!(&oracle.u_ranks, &eq.u_ranks());
        }
    }

    #[test]
    fn gysin_sequences_are_exact(m in model_strategy()) {
        for p in &m.perversities {
            let p = m.normalize(p);
            let data = PerverseData::build(&m, &p).unwrap();
            let eq1 = equivariant::build_eq1(&m, &p, &data).unwrap();
            let les = equivariant::gysin_les(&m, &data, &eq1).unwrap();
            prop_assert!(les.exactness.pass);
            prop_assert!(les.connecting_is_eub);
            prop_assert!(eqih::homalg::check_exact(&data.cogysin_les.sequence).pass);
        }
    }

    #[test]
    fn change_of_basis_preserves_everything(m in model_strategy(), shift in 0i64..3) {
        let qs: Vec<Matrix> = m.dims.iter().map(|&n| unimodular(n, shift)).collect();
        let t = fixtures::transport(&m, &qs).unwrap();
        for p in &m.perversities {
            let p = m.normalize(p);
            let a = PerverseData::build(&m, &p).unwrap();
            let b = PerverseData::build(&t, &p).unwrap();
            prop_assert_eq!(a.h_omega.dims(), b.h_omega.dims());
            prop_assert_eq!(a.h_gysin.dims(), b.h_gysin.dims());
            let ea = Equivariant::build(&m, &p, &a, default_nu(&m)).unwrap();
            let eb = Equivariant::build(&t, &p, &b, default_nu(&t)).unwrap();
            prop_assert_eq!(ea.dims(), eb.dims());
            prop_assert_eq!(ea.u_ranks(), eb.u_ranks());
        }
    }

    #[test]
    fn spectral_sequence_converges(m in model_strategy()) {
        let p = m.normalize(&m.perversities[m.perversities.len() / 2]);
        let data = PerverseData::build(&m, &p).unwrap();
        let eq = Equivariant::build(&m, &p, &data, default_nu(&m)).unwrap();
        let bs = BasicSpectral::compute(&m, &p, &data, &eq, None).unwrap();
        for n in 0..=bs.nmax {
            prop_assert_eq!(bs.ss.e_inf_total(n), eq.h.dim(n));
        }
        for cell in bs.d3_check(&data).unwrap() {
            prop_assert!(cell.pass, "{:?}", cell);
        }
    }

    #[test]
    fn localization_is_stable_under_longer_truncation(m in model_strategy()) {
        let p = m.normalize(&m.perversities[0]);
        let data = PerverseData::build(&m, &p).unwrap();
        let nu = default_nu(&m);
        let short = Equivariant::build(&m, &p, &data, nu).unwrap();
        let long = Equivariant::build(&m, &p, &data, nu + 2).unwrap();
        prop_assert_eq!(&long.dims()[..=nu], &short.dims()[..]);
        let a = localize::localize(&LambdaUModule::from_equivariant(&short)).unwrap();
        let b = localize::localize(&LambdaUModule::from_equivariant(&long)).unwrap();
        prop_assert_eq!(a.ranks(), b.ranks());
    }
}
