//! Known answers for the named models, checked against both the engine and
//! the direct oracle.

use eqih::equivariant::{default_nu, Equivariant};
use eqih::fixtures::{self, Origin};
use eqih::localize::{localize, LambdaUModule};
use eqih::model::Perversity;
use eqih::perverse::PerverseData;

fn equivariant_dims(name: &str, p: &str) -> (Vec<usize>, Vec<usize>) {
    let m = fixtures::make(name).unwrap();
    let p = m.normalize(&Perversity::parse(p).unwrap());
    let data = PerverseData::build(&m, &p).unwrap();
    let nu = default_nu(&m);
    let eq = Equivariant::build(&m, &p, &data, nu).unwrap();
    let oracle = fixtures::oracle_cohomology(&m, &p, nu).unwrap();
    assert_eq!(oracle.dims, eq.dims(), "{name} {p}");
    (eq.dims(), eq.u_ranks())
}

#[test]
fn free_actions_give_the_base() {
    for name in ["HOPF", "ROT"] {
        let (dims, _) = equivariant_dims(name, "");
        assert_eq!(&dims[..3], &[1, 0, 1]);
        assert!(dims[3..].iter().all(|&d| d == 0));
    }
}

#[test]
fn u_sees_the_euler_class() {
    assert_eq!(equivariant_dims("HOPF", "").1[0], 1);
    assert_eq!(equivariant_dims("ROT", "").1[0], 0);
}

#[test]
fn cone_equivariant_groups() {
    for v in 0..=2 {
        let (dims, ranks) = equivariant_dims("CONE2", &format!("apex={v}"));
        assert!(dims.iter().step_by(2).all(|&d| d == 1));
        assert!(dims.iter().skip(1).step_by(2).all(|&d| d == 0));
        assert!(ranks.iter().step_by(2).all(|&r| r == 1));
    }
    let (dims, _) = equivariant_dims("CONE2", "apex=3");
    assert_eq!(&dims[..4], &[1, 0, 1, 0]);
    assert!(dims[4..].iter().all(|&d| d == 0));
}

#[test]
fn stored_expectations_hold() {
    let e = fixtures::expectations();
    assert!(!e.entries.is_empty());
    for x in &e.entries {
        let m = fixtures::make(&x.fixture).unwrap();
        let p = m.normalize(&Perversity::parse(&x.perversity).unwrap());
        let data = PerverseData::build(&m, &p).unwrap();
        let eq = Equivariant::build(&m, &p, &data, default_nu(&m)).unwrap();
        let got = match x.quantity.as_str() {
            "ih_base" => data.h_omega.dims(),
            "cogysin" => data.h_cogysin.dims(),
            "ih_total" => {
                let eq1 = eqih::equivariant::build_eq1(&m, &p, &data).unwrap();
                eqih::equivariant::gysin_les(&m, &data, &eq1).unwrap().ih_x
            }
            "equivariant" => eq.dims(),
            "localized" => {
                let (even, odd) = localize(&LambdaUModule::from_equivariant(&eq)).unwrap().ranks();
                vec![even, odd]
            }
            other => panic!("unknown quantity {other}"),
        };
        assert_eq!(got, x.value, "{} {} {}", x.fixture, x.perversity, x.quantity);
        assert!(matches!(x.origin, Origin::Geometry | Origin::Construction | Origin::Oracle));
    }
}
